#include "fft_convolver.hpp"

#include "fplab/error.hpp"

#include <algorithm>
#include <mutex>

namespace fplab::detail {

namespace {
// FFTW planner calls are not thread safe; execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

FftConvolver::FftConvolver(std::size_t size)
    : size_(size),
      real_(static_cast<double*>(fftw_malloc(sizeof(double) * size))),
      spectrum_(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (size / 2 + 1)))) {
  if (size < 2 || (size & (size - 1)) != 0) {
    throw DomainError("FftConvolver size must be a power of two");
  }
  if (!real_ || !spectrum_) throw NumericalError("fftw_malloc failed");
  std::lock_guard lock(planner_mutex());
  const int n = static_cast<int>(size);
  forward_ = fftw_plan_dft_r2c_1d(n, real_.get(), spectrum_.get(), FFTW_ESTIMATE);
  backward_ = fftw_plan_dft_c2r_1d(n, spectrum_.get(), real_.get(), FFTW_ESTIMATE);
  if (!forward_ || !backward_) throw NumericalError("fftw planning failed");
}

FftConvolver::~FftConvolver() {
  std::lock_guard lock(planner_mutex());
  if (forward_) fftw_destroy_plan(forward_);
  if (backward_) fftw_destroy_plan(backward_);
}

void FftConvolver::set_kernel(std::span<const double> kernel) {
  if (kernel.size() != size_) throw DomainError("kernel length must equal FFT size");
  std::copy(kernel.begin(), kernel.end(), real_.get());
  fftw_execute(forward_);
  kernel_spectrum_.resize(size_ / 2 + 1);
  for (std::size_t k = 0; k < kernel_spectrum_.size(); ++k) {
    kernel_spectrum_[k] = {spectrum_[k][0], spectrum_[k][1]};
  }
}

void FftConvolver::convolve(std::span<const double> signal, std::span<double> out) {
  if (kernel_spectrum_.empty()) throw DomainError("convolve called before set_kernel");
  if (signal.size() > size_ || out.size() > size_) {
    throw DomainError("signal longer than FFT size");
  }
  std::fill(real_.get(), real_.get() + size_, 0.0);
  std::copy(signal.begin(), signal.end(), real_.get());
  fftw_execute(forward_);
  for (std::size_t k = 0; k < kernel_spectrum_.size(); ++k) {
    const std::complex<double> s(spectrum_[k][0], spectrum_[k][1]);
    const auto prod = s * kernel_spectrum_[k];
    spectrum_[k][0] = prod.real();
    spectrum_[k][1] = prod.imag();
  }
  fftw_execute(backward_);
  const double scale = 1.0 / static_cast<double>(size_);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = real_[i] * scale;
}

}  // namespace fplab::detail
