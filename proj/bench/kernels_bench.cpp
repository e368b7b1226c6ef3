// Serial reference kernels against the OpenMP/GEMM versions at the sizes used
// in training: 2 mics, 10 look directions, 40 filters, 257 bins.
#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "nbe2e/frontend/kernels.hpp"

namespace {

using namespace nbe2e;
namespace k = nbe2e::frontend::kernels;

constexpr int kChannels = 2, kDirections = 10, kFilters = 40, kBins = 257;

struct Inputs {
  std::vector<CMat> X, Y, Z, gY;
  CMat H, S, gH, gS;
  Mat O, gO;

  explicit Inputs(int frames) {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> n;
    auto rand = [&](Eigen::Index r, Eigen::Index c) {
      CMat m(r, c);
      for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = {n(rng), n(rng)};
      return m;
    };
    for (int c = 0; c < kChannels; ++c) X.push_back(rand(frames, kBins));
    H = rand(kDirections * kChannels, kBins);
    S = rand(kDirections * kFilters, kBins);
    gH = CMat::Zero(H.rows(), H.cols());
    gS = CMat::Zero(S.rows(), S.cols());
    k::spatial_filter_parallel(X, k::ConstCMap(H.data(), H.rows(), H.cols()), Y);
    k::fclp_parallel(Y, k::ConstCMap(S.data(), S.rows(), S.cols()), kFilters, 1e-7, Z, O);
    gO = Mat::Ones(O.rows(), O.cols());
  }
  k::ConstCMap h() const { return {H.data(), H.rows(), H.cols()}; }
  k::ConstCMap s() const { return {S.data(), S.rows(), S.cols()}; }
};

template <auto Fn>
void BM_spatial(benchmark::State& state) {
  Inputs in(static_cast<int>(state.range(0)));
  std::vector<CMat> Y;
  for (auto _ : state) {
    Fn(in.X, in.h(), Y);
    benchmark::DoNotOptimize(Y.data());
  }
}

template <auto Fn>
void BM_spatial_backward(benchmark::State& state) {
  Inputs in(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    Fn(in.Y, in.X, k::CMap(in.gH.data(), in.gH.rows(), in.gH.cols()));
    benchmark::ClobberMemory();
  }
}

template <auto Fn>
void BM_fclp(benchmark::State& state) {
  Inputs in(static_cast<int>(state.range(0)));
  std::vector<CMat> Z;
  Mat O;
  for (auto _ : state) {
    Fn(in.Y, in.s(), kFilters, 1e-7, Z, O);
    benchmark::DoNotOptimize(O.data());
  }
}

template <auto Fn>
void BM_fclp_backward(benchmark::State& state) {
  Inputs in(static_cast<int>(state.range(0)));
  std::vector<CMat> gY;
  for (auto _ : state) {
    Fn(in.gO, in.Y, in.s(), in.Z, kFilters, 1e-7, gY, k::CMap(in.gS.data(), in.gS.rows(), in.gS.cols()));
    benchmark::DoNotOptimize(gY.data());
  }
}

}  // namespace

BENCHMARK(BM_spatial<k::spatial_filter_serial>)->Name("spatial_filter/serial")->Arg(100)->Arg(200);
BENCHMARK(BM_spatial<k::spatial_filter_parallel>)->Name("spatial_filter/parallel")->Arg(100)->Arg(200);
BENCHMARK(BM_spatial_backward<k::spatial_filter_backward_serial>)->Name("spatial_filter_backward/serial")->Arg(200);
BENCHMARK(BM_spatial_backward<k::spatial_filter_backward_parallel>)->Name("spatial_filter_backward/parallel")->Arg(200);
BENCHMARK(BM_fclp<k::fclp_serial>)->Name("fclp/serial")->Arg(100)->Arg(200);
BENCHMARK(BM_fclp<k::fclp_parallel>)->Name("fclp/parallel")->Arg(100)->Arg(200);
BENCHMARK(BM_fclp_backward<k::fclp_backward_serial>)->Name("fclp_backward/serial")->Arg(200);
BENCHMARK(BM_fclp_backward<k::fclp_backward_parallel>)->Name("fclp_backward/parallel")->Arg(200);

BENCHMARK_MAIN();
