#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "fractanaka/fbm.hpp"
#include "fractanaka/sde.hpp"
#include "fractanaka/tanaka.hpp"

namespace fractanaka {

struct MCEstimate {
    double mean = 0.0;
    double std_error = 0.0;  // sample std / sqrt(count); NaN when count < 2
    std::size_t count = 0;

    bool operator==(const MCEstimate&) const = default;
};

/// Fixed-order pairwise sum; the result depends only on the sequence.
double pairwise_sum(std::span<const double> v);

MCEstimate estimate(std::span<const double> samples);

/// Median of the means of `groups` contiguous index ranges of the samples.
double subensemble_median(std::span<const double> samples, std::size_t groups = 8);

enum class Term : std::size_t {
    abs_increment,
    mollified_increment,
    drift,
    rs_total,
    trace_sigma_prime,
    trace_local,
    skorokhod,
    residual_tchange,
    residual_tf,
    residual_pathwise,
};
inline constexpr std::size_t kTermCount = 10;
std::string_view to_string(Term t);
/// Value of one term; residual_pathwise is the sgn version
/// |X_t - x| - |X_0 - x| - drift_sgn - rs_sgn (independent of n).
double term_value(const TanakaTerms& terms, Term t);

struct ExperimentConfig {
    ModelSpec model = FbmModel{};
    HurstParam h{0.75};
    TimeGrid grid{1.0, 2048};
    std::size_t paths = 4096;
    std::uint64_t seed = 42;
    std::vector<double> levels{0.0};
    std::vector<MollifierIndex> ladder{MollifierIndex(4), MollifierIndex(16), MollifierIndex(64),
                                       MollifierIndex(256)};
    Convention convention = Convention::argument_at_s;
    double x0 = 0.0;
    SampleMethod method = SampleMethod::circulant;
    bool keep_rows = false;

    /// Throws DomainError when the ladder is not strictly increasing or paths < 2.
    void validate() const;
};

/// Estimates for every (level, n, term), plus per-path values when requested.
class EnsembleResult {
public:
    EnsembleResult(std::vector<double> levels, std::vector<MollifierIndex> ladder, std::size_t paths,
                   bool keep_rows);

    const std::vector<double>& levels() const noexcept { return levels_; }
    const std::vector<MollifierIndex>& ladder() const noexcept { return ladder_; }
    std::size_t paths() const noexcept { return paths_; }
    std::size_t size() const noexcept { return estimates_.size(); }

    const MCEstimate& at(std::size_t level, std::size_t n, Term t) const;
    MCEstimate& at(std::size_t level, std::size_t n, Term t);

    bool has_rows() const noexcept { return !rows_.empty(); }
    /// Per-path values of one key, in path order.
    std::span<const double> samples(std::size_t level, std::size_t n, Term t) const;
    std::span<double> samples(std::size_t level, std::size_t n, Term t);

    bool operator==(const EnsembleResult&) const = default;

private:
    std::size_t key(std::size_t level, std::size_t n, Term t) const;

    std::vector<double> levels_;
    std::vector<MollifierIndex> ladder_;
    std::size_t paths_;
    std::vector<MCEstimate> estimates_;
    std::vector<double> rows_;  // [key][path]
};

/// Samples the drivers, solves the model, builds derivative fields and
/// assembles TanakaTerms at every (level, n). Deterministic given the config,
/// whatever the worker count. Solver failures are rethrown naming the path.
EnsembleResult run_ensemble(const ExperimentConfig& config);

/// Drivers and solutions for paths 0..config.paths-1.
std::vector<SolutionPath> solve_ensemble(const ExperimentConfig& config);

struct Diagnostic {
    MCEstimate estimate;
    double median = 0.0;  // median over 8 contiguous sub-ensembles
};

struct CauchyReport {
    std::vector<double> times;
    std::vector<Diagnostic> per_time;
    Diagnostic max_over_time;  // entry with the largest mean
};

/// E[(O_n(t) - O_m(t))^4] with O_n(t) = sum_{t_i < t} f''_n(X_i - x) dt.
CauchyReport cauchy_l4_diagnostic(std::span<const SolutionPath> x_paths, MollifierIndex n, MollifierIndex m,
                                  LevelX level, std::span<const double> times);

/// E[(T_n - T_m)^2] of trace_local for consecutive ladder pairs, from an
/// ensemble run with keep_rows.
std::vector<Diagnostic> l2_trace_convergence(const EnsembleResult& result, std::size_t level = 0);
/// Same statistic for one arbitrary pair of ladder positions.
Diagnostic l2_trace_distance(const EnsembleResult& result, std::size_t level, std::size_t n_pos,
                             std::size_t m_pos);

struct DensityReport {
    bool degenerate = false;
    std::size_t count = 0;
    double bandwidth = 0.0;
    double kde_peak = 0.0;
    double peak_location = 0.0;
    double peak_bound = 0.0;  // kDensityConstant * t^{-H}
    bool within_bound = false;
    double tail_quadratic_slope = 0.0;  // slope of log p against x^2 in the tails
    double tail_exponent = 0.0;         // slope of log(-log(p / peak)) against log|x|
    std::vector<std::pair<double, double>> kde;
};

/// Calibrated on fBm (peak 1/sqrt(2 pi) at t = 1) and frozen.
inline constexpr double kDensityConstant = 0.45;

DensityReport density_diagnostic(std::span<const double> samples, double t, HurstParam h);

}  // namespace fractanaka
