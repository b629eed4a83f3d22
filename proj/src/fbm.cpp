#include "fractanaka/fbm.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <string>

#include "fft.hpp"
#include "fractanaka/counter_rng.hpp"
#include "fractanaka/errors.hpp"
#include "fractanaka/parallel.hpp"
#include "fractanaka/quad.hpp"

namespace fractanaka {

FbmPath::FbmPath(TimeGrid g, std::vector<double> v) : grid(g), values(std::move(v)) {
    if (values.size() != grid.nodes()) throw DomainError("fBm path needs one value per node");
    if (values[0] != 0.0) throw DomainError("fBm path must start at 0");
    for (double x : values) {
        if (!std::isfinite(x)) throw DomainError("fBm path has a non-finite entry");
    }
}

double covariance(double t, double s, HurstParam h) {
    if (t < 0.0 || s < 0.0) throw DomainError("covariance: times must be nonnegative");
    const double p = 2.0 * h.value();
    return 0.5 * (std::pow(t, p) + std::pow(s, p) - std::pow(std::abs(t - s), p));
}

double increment_autocovariance(std::size_t k, double dt, HurstParam h) {
    const double p = 2.0 * h.value();
    return 0.5 * std::pow(dt, p) * power_second_difference(k, p);
}

struct FbmSampler::Impl {
    // circulant
    std::shared_ptr<detail::RealFft> fft;
    std::vector<double> sqrt_eig;  // sqrt(lambda_k / M), k = 0..N
    // cholesky, lower triangle row-major
    std::vector<double> chol;
};

namespace {

void cumulate(std::span<const double> increments, std::span<double> out) {
    out[0] = 0.0;
    double s = 0.0;
    for (std::size_t i = 0; i < increments.size(); ++i) {
        s += increments[i];
        out[i + 1] = s;
    }
}

}  // namespace

FbmSampler::FbmSampler(TimeGrid grid, HurstParam h, SampleMethod method)
    : grid_(grid), h_(h), method_(method), impl_(std::make_unique<Impl>()) {
    const std::size_t n = grid.steps();
    const double dt = grid.step();
    if (method == SampleMethod::circulant) {
        const std::size_t m = 2 * n;
        auto fft = std::make_shared<detail::RealFft>(m);
        std::vector<double> row(m);
        for (std::size_t k = 0; k <= n; ++k) row[k] = increment_autocovariance(k, dt, h);
        for (std::size_t k = n + 1; k < m; ++k) row[k] = row[m - k];
        std::vector<std::complex<double>> eig(fft->spectrum_size());
        fft->forward(row, eig);
        double lmax = 0.0;
        for (const auto& e : eig) lmax = std::max(lmax, e.real());
        impl_->sqrt_eig.resize(eig.size());
        for (std::size_t k = 0; k < eig.size(); ++k) {
            double l = eig[k].real();
            if (l < -1e-10 * lmax) {
                throw NumericalError("circulant embedding has a negative eigenvalue " + std::to_string(l) +
                                     " at frequency " + std::to_string(k));
            }
            l = std::max(l, 0.0);
            impl_->sqrt_eig[k] = std::sqrt(l / static_cast<double>(m));
        }
        impl_->fft = std::move(fft);
    } else {
        Eigen::MatrixXd c(n, n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                c(i, j) = increment_autocovariance(i > j ? i - j : j - i, dt, h);
            }
        }
        Eigen::LLT<Eigen::MatrixXd> llt(c);
        if (llt.info() != Eigen::Success) throw NumericalError("Cholesky factorization of fGn covariance failed");
        const Eigen::MatrixXd l = llt.matrixL();
        impl_->chol.resize(n * (n + 1) / 2);
        std::size_t pos = 0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j <= i; ++j) impl_->chol[pos++] = l(i, j);
        }
    }
}

FbmSampler::~FbmSampler() = default;
FbmSampler::FbmSampler(FbmSampler&&) noexcept = default;
FbmSampler& FbmSampler::operator=(FbmSampler&&) noexcept = default;

void FbmSampler::sample_into(std::uint64_t seed, std::uint64_t index, std::span<double> out) const {
    const std::size_t n = grid_.steps();
    if (out.size() != n + 1) throw DomainError("sample_into: output must have N+1 entries");
    CounterNormalStream rng(seed, index);
    std::vector<double> incr(n);
    if (method_ == SampleMethod::circulant) {
        const std::size_t m = 2 * n;
        std::vector<double> z(m);
        rng.fill(z);
        const auto& s = impl_->sqrt_eig;
        std::vector<std::complex<double>> spec(n + 1);
        spec[0] = {s[0] * z[0], 0.0};
        spec[n] = {s[n] * z[1], 0.0};
        const double half = std::sqrt(0.5);
        for (std::size_t k = 1; k < n; ++k) {
            spec[k] = {half * s[k] * z[2 * k], half * s[k] * z[2 * k + 1]};
        }
        std::vector<double> y(m);
        impl_->fft->inverse(spec, y);
        std::copy(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(n), incr.begin());
    } else {
        std::vector<double> z(n);
        rng.fill(z);
        std::size_t pos = 0;
        for (std::size_t i = 0; i < n; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j <= i; ++j) acc += impl_->chol[pos++] * z[j];
            incr[i] = acc;
        }
    }
    cumulate(incr, out);
}

FbmPath FbmSampler::sample(std::uint64_t seed, std::uint64_t index) const {
    std::vector<double> v(grid_.nodes());
    sample_into(seed, index, v);
    return FbmPath(grid_, std::move(v));
}

std::vector<FbmPath> sample_fbm(const TimeGrid& grid, HurstParam h, std::size_t count, std::uint64_t seed,
                                SampleMethod method) {
    if (count == 0) return {};
    const FbmSampler sampler(grid, h, method);
    std::vector<std::vector<double>> values(count, std::vector<double>(grid.nodes()));
    const auto total = static_cast<std::ptrdiff_t>(count);
#pragma omp parallel for schedule(static) num_threads(worker_count())
    for (std::ptrdiff_t p = 0; p < total; ++p) {
        sampler.sample_into(seed, static_cast<std::uint64_t>(p), values[static_cast<std::size_t>(p)]);
    }
    std::vector<FbmPath> paths;
    paths.reserve(count);
    for (auto& v : values) paths.emplace_back(grid, std::move(v));
    return paths;
}

FbmPath subsample(const FbmPath& path, std::size_t factor) {
    const TimeGrid coarse = path.grid.coarsened(factor);
    std::vector<double> v(coarse.nodes());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = path.values[i * factor];
    return FbmPath(coarse, std::move(v));
}

double inner_product_H(const GridFunction& phi1, const GridFunction& phi2, HurstParam h) {
    require_same_grid(phi1.grid, phi2.grid, "inner_product_H");
    const KernelWeights w(phi1.grid, h);
    const TriangularConvolver conv(w);
    const std::size_t n = w.cells();
    std::vector<double> lo(n), hi(n);
    conv.causal(phi2.values, lo);
    conv.anticausal(phi2.values, hi);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += phi1.values[i] * (lo[i] + hi[i]);
    return h.alpha() * s;
}

}  // namespace fractanaka
