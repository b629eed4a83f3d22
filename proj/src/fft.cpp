#include "fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <vector>

#include "fractanaka/errors.hpp"

namespace fractanaka::detail {

namespace {
// FFTW's planner is not re-entrant.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

RealFft::RealFft(std::size_t length) : length_(length) {
    if (length < 2) throw DomainError("FFT length must be at least 2");
    std::vector<double> real(length);
    std::vector<std::complex<double>> spec(spectrum_size());
    const int n = static_cast<int>(length);
    std::lock_guard lock(planner_mutex());
    forward_ = fftw_plan_dft_r2c_1d(n, real.data(), reinterpret_cast<fftw_complex*>(spec.data()),
                                    FFTW_ESTIMATE | FFTW_UNALIGNED);
    inverse_ = fftw_plan_dft_c2r_1d(n, reinterpret_cast<fftw_complex*>(spec.data()), real.data(),
                                    FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (forward_ == nullptr || inverse_ == nullptr) throw NumericalError("FFTW planning failed");
}

RealFft::~RealFft() {
    std::lock_guard lock(planner_mutex());
    if (forward_ != nullptr) fftw_destroy_plan(forward_);
    if (inverse_ != nullptr) fftw_destroy_plan(inverse_);
}

void RealFft::forward(std::span<const double> in, std::span<std::complex<double>> out) const {
    if (in.size() != length_ || out.size() != spectrum_size()) throw DomainError("FFT buffer size mismatch");
    // r2c does not write its input for out-of-place 1-D transforms.
    fftw_execute_dft_r2c(forward_, const_cast<double*>(in.data()), reinterpret_cast<fftw_complex*>(out.data()));
}

void RealFft::inverse(std::span<std::complex<double>> in, std::span<double> out) const {
    if (out.size() != length_ || in.size() != spectrum_size()) throw DomainError("FFT buffer size mismatch");
    fftw_execute_dft_c2r(inverse_, reinterpret_cast<fftw_complex*>(in.data()), out.data());
}

}  // namespace fractanaka::detail
