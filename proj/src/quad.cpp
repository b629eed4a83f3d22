#include "fractanaka/quad.hpp"

#include <algorithm>
#include <cmath>

#include "fft.hpp"
#include "fractanaka/errors.hpp"

namespace fractanaka {

double power_second_difference(std::size_t k, double p) {
    const double kd = static_cast<double>(k);
    if (k < 16) {
        return std::pow(kd + 1.0, p) - 2.0 * std::pow(kd, p) + std::pow(std::abs(kd - 1.0), p);
    }
    // k^p [(1+1/k)^p + (1-1/k)^p - 2] = 2 k^p sum_{m>=1} C(p,2m) k^{-2m}
    const double inv2 = 1.0 / (kd * kd);
    double binom = 1.0;  // C(p, j)
    double x = 1.0;      // k^{-j} for even j
    double sum = 0.0;
    for (int j = 0; j < 200; j += 2) {
        binom *= (p - j) / (j + 1.0);
        binom *= (p - j - 1.0) / (j + 2.0);
        x *= inv2;
        const double term = binom * x;
        sum += term;
        if (std::abs(term) <= 1e-18 * std::abs(sum)) break;
    }
    return 2.0 * std::pow(kd, p) * sum;
}

double kernel_cell_weight(double a1, double b1, double a2, double b2, HurstParam h) {
    if (!(b1 > a1) || !(b2 > a2)) return 0.0;
    const double p = 2.0 * h.value();
    const double c = 1.0 / (p * (p - 1.0));
    auto phi = [&](double u) { return c * std::pow(std::abs(u), p); };
    return phi(b1 - a2) - phi(b1 - b2) - phi(a1 - a2) + phi(a1 - b2);
}

KernelWeights::KernelWeights(TimeGrid grid, HurstParam h) : grid_(grid), h_(h), lag_(grid.steps()) {
    const double p = 2.0 * h.value();
    const double scale = std::pow(grid.step(), p) / (p * (p - 1.0));
    for (std::size_t k = 0; k < lag_.size(); ++k) lag_[k] = scale * power_second_difference(k, p);
}

double KernelWeights::total() const {
    // Each lag k > 0 appears 2 (N - k) times.
    const std::size_t n = lag_.size();
    long double s = static_cast<long double>(n) * lag_[0];
    for (std::size_t k = 1; k < n; ++k) s += 2.0L * static_cast<long double>(n - k) * lag_[k];
    return static_cast<double>(s);
}

double rs_integral(std::span<const double> integrand, std::span<const double> driver) {
    if (driver.size() < 2) throw DomainError("rs_integral: driver needs at least two nodes");
    const std::size_t n = driver.size() - 1;
    if (integrand.size() != n && integrand.size() != n + 1) {
        throw DomainError("rs_integral: integrand and driver lengths differ");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += integrand[i] * (driver[i + 1] - driver[i]);
    return s;
}

double singular_double_integral(const SquareMatrix& f, const KernelWeights& weights) {
    const std::size_t n = weights.cells();
    if (f.size() != n && f.size() != n + 1) throw DomainError("singular_double_integral: shape mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < n; ++j) row += f(i, j) * weights(i, j);
        s += row;
    }
    return s;
}

namespace {
constexpr std::size_t kDirectLimit = 64;

std::size_t fft_length(std::size_t n) {
    std::size_t l = 1;
    while (l < 2 * n) l <<= 1;
    return l;
}
}  // namespace

TriangularConvolver::TriangularConvolver(const KernelWeights& weights)
    : lag_(weights.by_lag().begin(), weights.by_lag().end()) {
    if (lag_.size() <= kDirectLimit) return;
    auto fft = std::make_shared<detail::RealFft>(fft_length(lag_.size()));
    std::vector<double> padded(fft->length(), 0.0);
    std::copy(lag_.begin(), lag_.end(), padded.begin());
    lag_spectrum_.resize(fft->spectrum_size());
    fft->forward(padded, lag_spectrum_);
    fft_ = std::move(fft);
}

void TriangularConvolver::full_causal(std::span<const double> a, std::span<double> out) const {
    const std::size_t n = lag_.size();
    if (!fft_) {
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i <= j; ++i) s += a[i] * lag_[j - i];
            out[j] = s;
        }
        return;
    }
    const std::size_t len = fft_->length();
    std::vector<double> buf(len, 0.0);
    std::copy(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(n), buf.begin());
    std::vector<std::complex<double>> spec(fft_->spectrum_size());
    fft_->forward(buf, spec);
    for (std::size_t k = 0; k < spec.size(); ++k) spec[k] *= lag_spectrum_[k];
    fft_->inverse(spec, buf);
    const double norm = 1.0 / static_cast<double>(len);
    for (std::size_t j = 0; j < n; ++j) out[j] = buf[j] * norm;
}

void TriangularConvolver::causal(std::span<const double> a, std::span<double> out) const {
    const std::size_t n = lag_.size();
    if (a.size() < n || out.size() < n) throw DomainError("TriangularConvolver: buffer too short");
    full_causal(a, out);
    for (std::size_t j = 0; j < n; ++j) out[j] -= 0.5 * lag_[0] * a[j];
}

void TriangularConvolver::anticausal(std::span<const double> c, std::span<double> out) const {
    const std::size_t n = lag_.size();
    if (c.size() < n || out.size() < n) throw DomainError("TriangularConvolver: buffer too short");
    std::vector<double> rev(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(n));
    std::reverse(rev.begin(), rev.end());
    std::vector<double> tmp(n);
    full_causal(rev, tmp);
    for (std::size_t i = 0; i < n; ++i) out[i] = tmp[n - 1 - i] - 0.5 * lag_[0] * c[i];
}

FractionalNorm fractional_norm_parts(const GridFunction& g, double beta) {
    if (!(beta > 0.0 && beta < 1.0)) throw DomainError("fractional_norm: beta must lie in (0, 1)");
    const TimeGrid& grid = g.grid;
    const std::size_t n = grid.steps();
    const double q = 1.0 - beta;
    FractionalNorm out;
    for (std::size_t i = 0; i < n; ++i) {
        const double cell = (std::pow(grid.node(i + 1), q) - std::pow(grid.node(i), q)) / q;
        out.weighted_sup += std::abs(g.values[i]) * cell;
    }
    // Off-diagonal cell integrals of |t-s|^{-1-beta}; lag 0 never contributes.
    std::vector<double> v(n, 0.0);
    const double scale = std::pow(grid.step(), q) / (beta * q);
    for (std::size_t k = 1; k < n; ++k) v[k] = -scale * power_second_difference(k, q);
    double inc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double row = 0.0;
        for (std::size_t j = i + 1; j < n; ++j) row += std::abs(g.values[j] - g.values[i]) * v[j - i];
        inc += row;
    }
    out.increments = 2.0 * inc;
    return out;
}

double fractional_norm(const GridFunction& g, double beta) { return fractional_norm_parts(g, beta).total(); }

double default_beta(HurstParam h) { return (1.0 - h.value()) + 0.1 * (2.0 * h.value() - 1.0); }

}  // namespace fractanaka
