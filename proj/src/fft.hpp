#pragma once

#include <complex>
#include <cstddef>
#include <span>

typedef struct fftw_plan_s* fftw_plan;

namespace fractanaka::detail {

/// Real <-> half-complex FFT of fixed length backed by FFTW. Plans are built
/// with FFTW_ESTIMATE | FFTW_UNALIGNED so results do not depend on buffer
/// alignment or on which thread executes them. Execution is thread-safe.
class RealFft {
public:
    explicit RealFft(std::size_t length);
    ~RealFft();
    RealFft(const RealFft&) = delete;
    RealFft& operator=(const RealFft&) = delete;

    std::size_t length() const noexcept { return length_; }
    std::size_t spectrum_size() const noexcept { return length_ / 2 + 1; }

    /// out[k] = sum_j in[j] exp(-2 pi i j k / L), k = 0..L/2.
    void forward(std::span<const double> in, std::span<std::complex<double>> out) const;
    /// out[j] = sum_k in[k] exp(+2 pi i j k / L) over the Hermitian extension
    /// (unnormalized). `in` is clobbered.
    void inverse(std::span<std::complex<double>> in, std::span<double> out) const;

private:
    std::size_t length_;
    fftw_plan forward_ = nullptr;
    fftw_plan inverse_ = nullptr;
};

}  // namespace fractanaka::detail
