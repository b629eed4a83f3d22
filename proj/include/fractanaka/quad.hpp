#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "fractanaka/grid.hpp"

namespace fractanaka {

namespace detail {
class RealFft;
}

/// (k+1)^p - 2 k^p + |k-1|^p for integer k >= 0, accurate to a few ulps of
/// the result even when the three powers nearly cancel.
double power_second_difference(std::size_t k, double p);

/// Exact value of the integral of |s-r|^{2H-2} over [a1,b1] x [a2,b2], from
/// second differences of Phi(u) = |u|^{2H} / (2H(2H-1)). Finite when the
/// rectangle touches or straddles the diagonal. Degenerate rectangles give 0.
double kernel_cell_weight(double a1, double b1, double a2, double b2, HurstParam h);

/// Cell integrals of the kernel |s-r|^{2H-2} on a uniform grid. On a uniform
/// grid w[i][j] depends on |i-j| only, so one lag vector is stored.
class KernelWeights {
public:
    KernelWeights(TimeGrid grid, HurstParam h);

    const TimeGrid& grid() const noexcept { return grid_; }
    HurstParam hurst() const noexcept { return h_; }
    std::size_t cells() const noexcept { return lag_.size(); }

    double operator()(std::size_t i, std::size_t j) const noexcept { return lag_[i > j ? i - j : j - i]; }
    std::span<const double> by_lag() const noexcept { return lag_; }

    /// Sum over all N x N cells.
    double total() const;

private:
    TimeGrid grid_;
    HurstParam h_;
    std::vector<double> lag_;
};

/// Fraction of the cell (r-cell i, s-cell j) lying in {r <= s}: 1 below the
/// diagonal, 1/2 on it, 0 above. Integrands that vanish for r > s (adapted
/// Malliavin derivatives) are weighted by it.
inline double adapted_cell_fraction(std::size_t i, std::size_t j) noexcept {
    return i < j ? 1.0 : (i == j ? 0.5 : 0.0);
}

/// Left-point Riemann-Stieltjes sum  sum_i g_i (x_{i+1} - x_i).
double rs_integral(std::span<const double> integrand, std::span<const double> driver);

/// sum_{i,j < N} F(i,j) w[i][j]. F is sampled at the lower-left node of each
/// cell; row index i is the r-cell, column index j the s-cell.
double singular_double_integral(const SquareMatrix& f, const KernelWeights& weights);

/// Causal and anti-causal Toeplitz products with the kernel lag vector,
/// restricted to the adapted triangle (diagonal cells count half):
///   causal(a)[j]     = sum_{i<j} a_i w(j-i) + a_j w(0)/2
///   anticausal(c)[i] = sum_{j>i} c_j w(j-i) + c_i w(0)/2
/// FFT based for long grids.
class TriangularConvolver {
public:
    explicit TriangularConvolver(const KernelWeights& weights);

    std::size_t cells() const noexcept { return lag_.size(); }
    void causal(std::span<const double> a, std::span<double> out) const;
    void anticausal(std::span<const double> c, std::span<double> out) const;

private:
    void full_causal(std::span<const double> a, std::span<double> out) const;

    std::vector<double> lag_;
    std::shared_ptr<const detail::RealFft> fft_;
    std::vector<std::complex<double>> lag_spectrum_;
};

/// Both parts of the fractional norm
///   ||g||_{2,beta} = int |g(s)| s^{-beta} ds + intint |g(t)-g(s)| |t-s|^{-1-beta} ds dt.
struct FractionalNorm {
    double weighted_sup = 0.0;  // first integral
    double increments = 0.0;    // double integral
    double total() const noexcept { return weighted_sup + increments; }
};

/// g is held constant on each cell at its left node; the singular factors are
/// integrated exactly per cell. beta must lie in (0, 1).
FractionalNorm fractional_norm_parts(const GridFunction& g, double beta);
double fractional_norm(const GridFunction& g, double beta);

/// beta = (1-H) + 0.1 (2H-1), inside (1-H, H).
double default_beta(HurstParam h);

}  // namespace fractanaka
