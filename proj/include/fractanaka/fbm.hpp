#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "fractanaka/grid.hpp"

namespace fractanaka {

namespace detail {
class RealFft;
}

/// Sampled fBm path; values[0] = 0.
struct FbmPath {
    TimeGrid grid;
    std::vector<double> values;

    FbmPath(TimeGrid g, std::vector<double> v);
};

/// R(t,s) = (t^{2H} + s^{2H} - |t-s|^{2H}) / 2.
double covariance(double t, double s, HurstParam h);

/// Autocovariance of unit-lag increments on a grid of spacing dt, at lag k.
double increment_autocovariance(std::size_t k, double dt, HurstParam h);

enum class SampleMethod { cholesky, circulant };

/// Exact sampler for fBm on a fixed grid. Path p under seed s uses normal
/// draws 0..M-1 of counter stream (s, p), so it is reproducible on its own.
class FbmSampler {
public:
    FbmSampler(TimeGrid grid, HurstParam h, SampleMethod method = SampleMethod::circulant);
    ~FbmSampler();
    FbmSampler(FbmSampler&&) noexcept;
    FbmSampler& operator=(FbmSampler&&) noexcept;

    const TimeGrid& grid() const noexcept { return grid_; }
    HurstParam hurst() const noexcept { return h_; }
    SampleMethod method() const noexcept { return method_; }

    /// Writes the N+1 node values of path `index` into `out`.
    void sample_into(std::uint64_t seed, std::uint64_t index, std::span<double> out) const;
    FbmPath sample(std::uint64_t seed, std::uint64_t index) const;

private:
    struct Impl;
    TimeGrid grid_;
    HurstParam h_;
    SampleMethod method_;
    std::unique_ptr<Impl> impl_;
};

/// Paths 0..count-1 under `seed`, generated in parallel.
std::vector<FbmPath> sample_fbm(const TimeGrid& grid, HurstParam h, std::size_t count, std::uint64_t seed,
                                SampleMethod method = SampleMethod::circulant);

/// Same path read at every factor-th node (grid with N / factor steps).
FbmPath subsample(const FbmPath& path, std::size_t factor);

/// alpha_H sum_{i,j} phi1_i phi2_j w[i][j]: the |H| inner product of two
/// step functions held at their left node values.
double inner_product_H(const GridFunction& phi1, const GridFunction& phi2, HurstParam h);

}  // namespace fractanaka
