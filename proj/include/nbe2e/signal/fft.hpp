#pragma once

#include <complex>
#include <span>
#include <vector>

namespace nbe2e::signal {

// Real-input FFT of a fixed size backed by an FFTW plan.
//
// Plans are created with FFTW_ESTIMATE so the same size always yields the same
// algorithm and bit-identical results between runs. An instance owns its
// buffers and must not be shared between threads; constructing instances
// concurrently is safe.
class RealFft {
 public:
  explicit RealFft(int size);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  int size() const { return size_; }
  int bins() const { return size_ / 2 + 1; }

  // in.size() <= size() (zero padded); out.size() == bins().
  void forward(std::span<const double> in, std::span<std::complex<double>> out);
  // Inverse including the 1/size normalisation; out.size() <= size().
  void inverse(std::span<const std::complex<double>> in, std::span<double> out);

 private:
  int size_;
  double* real_buf_ = nullptr;
  void* complex_buf_ = nullptr;
  void* forward_plan_ = nullptr;
  void* inverse_plan_ = nullptr;
};

// Smallest power of two >= n.
int next_pow2(long long n);

// Linear convolution via FFT; output length a.size() + b.size() - 1.
std::vector<double> fft_convolve(std::span<const double> a, std::span<const double> b);

}  // namespace nbe2e::signal
