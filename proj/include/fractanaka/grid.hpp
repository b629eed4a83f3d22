#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fractanaka {

/// Hurst index of the driving fBm. Valid range is the open interval (1/2, 1);
/// the value 1/2 is only reachable through brownian_for_testing().
class HurstParam {
public:
    explicit HurstParam(double h);

    /// H = 1/2 (standard Brownian motion). Accepted by the samplers only, as
    /// an oracle for independence of increments.
    static HurstParam brownian_for_testing();

    double value() const noexcept { return h_; }
    /// alpha_H = H(2H-1), the constant in front of the |s-r|^{2H-2} kernel.
    double alpha() const noexcept { return h_ * (2.0 * h_ - 1.0); }
    bool test_only() const noexcept { return test_only_; }

private:
    HurstParam(double h, bool test_only) : h_(h), test_only_(test_only) {}

    double h_;
    bool test_only_ = false;
};

/// Uniform grid t_i = i T / N, i = 0..N.
class TimeGrid {
public:
    TimeGrid(double horizon, std::size_t steps);

    double horizon() const noexcept { return horizon_; }
    std::size_t steps() const noexcept { return steps_; }
    std::size_t nodes() const noexcept { return steps_ + 1; }
    double step() const noexcept { return horizon_ / static_cast<double>(steps_); }
    double node(std::size_t i) const noexcept {
        return horizon_ * (static_cast<double>(i) / static_cast<double>(steps_));
    }
    std::vector<double> node_values() const;

    /// Index of the node equal to t (to 1e-9 relative); throws DomainError otherwise.
    std::size_t index_of(double t) const;

    /// Grid with N / factor steps over the same horizon.
    TimeGrid coarsened(std::size_t factor) const;
    /// Grid [0, t_k] with k steps.
    TimeGrid truncated(std::size_t steps) const;

    bool operator==(const TimeGrid&) const = default;

private:
    double horizon_;
    std::size_t steps_;
};

/// Real function sampled at the nodes of a grid.
struct GridFunction {
    TimeGrid grid;
    std::vector<double> values;

    GridFunction(TimeGrid g, std::vector<double> v);
};

void require_same_grid(const TimeGrid& a, const TimeGrid& b, const char* what);

}  // namespace fractanaka

namespace fractanaka {

/// Dense square matrix, row-major.
class SquareMatrix {
public:
    SquareMatrix() = default;
    explicit SquareMatrix(std::size_t n, double fill = 0.0) : n_(n), data_(n * n, fill) {}

    std::size_t size() const noexcept { return n_; }
    double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * n_ + j]; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * n_ + j]; }
    std::span<const double> data() const noexcept { return data_; }

private:
    std::size_t n_ = 0;
    std::vector<double> data_;
};

}  // namespace fractanaka
