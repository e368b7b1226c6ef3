#include "nbe2e/signal/fft.hpp"

#include <algorithm>
#include <cstring>
#include <mutex>
#include <stdexcept>

#include <fftw3.h>

namespace nbe2e::signal {
namespace {

// The FFTW planner is not re-entrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

RealFft::RealFft(int size) : size_(size) {
  if (size < 2) throw std::invalid_argument("fft size must be >= 2");
  std::lock_guard lock(planner_mutex());
  real_buf_ = fftw_alloc_real(size_);
  complex_buf_ = fftw_alloc_complex(size_ / 2 + 1);
  auto* cbuf = static_cast<fftw_complex*>(complex_buf_);
  forward_plan_ = fftw_plan_dft_r2c_1d(size_, real_buf_, cbuf, FFTW_ESTIMATE);
  inverse_plan_ = fftw_plan_dft_c2r_1d(size_, cbuf, real_buf_, FFTW_ESTIMATE | FFTW_DESTROY_INPUT);
}

RealFft::~RealFft() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
  fftw_free(real_buf_);
  fftw_free(complex_buf_);
}

void RealFft::forward(std::span<const double> in, std::span<std::complex<double>> out) {
  if (in.size() > static_cast<std::size_t>(size_) || out.size() != static_cast<std::size_t>(bins()))
    throw std::invalid_argument("RealFft::forward: bad buffer size");
  std::copy(in.begin(), in.end(), real_buf_);
  std::fill(real_buf_ + in.size(), real_buf_ + size_, 0.0);
  fftw_execute(static_cast<fftw_plan>(forward_plan_));
  std::memcpy(out.data(), complex_buf_, sizeof(fftw_complex) * bins());
}

void RealFft::inverse(std::span<const std::complex<double>> in, std::span<double> out) {
  if (in.size() != static_cast<std::size_t>(bins()) || out.size() > static_cast<std::size_t>(size_))
    throw std::invalid_argument("RealFft::inverse: bad buffer size");
  std::memcpy(complex_buf_, in.data(), sizeof(fftw_complex) * bins());
  fftw_execute(static_cast<fftw_plan>(inverse_plan_));
  const double scale = 1.0 / size_;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = real_buf_[i] * scale;
}

int next_pow2(long long n) {
  int p = 1;
  while (p < n) p <<= 1;
  return p;
}

std::vector<double> fft_convolve(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) return {};
  const std::size_t out_len = a.size() + b.size() - 1;
  RealFft fft(std::max(2, next_pow2(static_cast<long long>(out_len))));
  std::vector<std::complex<double>> fa(fft.bins()), fb(fft.bins());
  fft.forward(a, fa);
  fft.forward(b, fb);
  for (int k = 0; k < fft.bins(); ++k) fa[k] *= fb[k];
  std::vector<double> out(out_len);
  fft.inverse(fa, out);
  return out;
}

}  // namespace nbe2e::signal
