#pragma once

// Real linear convolution through FFTW. Internal to the quadrature module.

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace fplab::detail {

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

template <typename T>
using FftwBuffer = std::unique_ptr<T[], FftwFree>;

/// Circular convolution of length `size` (a power of two); callers pad to
/// at least len(signal) + len(kernel) - 1 to make it linear.
class FftConvolver {
 public:
  explicit FftConvolver(std::size_t size);
  ~FftConvolver();
  FftConvolver(const FftConvolver&) = delete;
  FftConvolver& operator=(const FftConvolver&) = delete;

  std::size_t size() const { return size_; }

  /// Stores the spectrum of `kernel`, laid out circularly (index m holds
  /// lag m, index size - m holds lag -m).
  void set_kernel(std::span<const double> kernel);

  /// out[i] = sum_j signal[j] kernel[(i - j) mod size] for i < out.size().
  void convolve(std::span<const double> signal, std::span<double> out);

 private:
  std::size_t size_;
  FftwBuffer<double> real_;
  FftwBuffer<fftw_complex> spectrum_;
  std::vector<std::complex<double>> kernel_spectrum_;
  fftw_plan forward_ = nullptr;
  fftw_plan backward_ = nullptr;
};

}  // namespace fplab::detail
