#include "fractanaka/mc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>

#include "fractanaka/errors.hpp"
#include "fractanaka/parallel.hpp"

namespace fractanaka {

double pairwise_sum(std::span<const double> v) {
    if (v.size() <= 8) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    const std::size_t half = v.size() / 2;
    return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

MCEstimate estimate(std::span<const double> samples) {
    MCEstimate e;
    e.count = samples.size();
    if (e.count == 0) {
        e.mean = std::numeric_limits<double>::quiet_NaN();
        e.std_error = e.mean;
        return e;
    }
    e.mean = pairwise_sum(samples) / static_cast<double>(e.count);
    if (e.count < 2) {
        e.std_error = std::numeric_limits<double>::quiet_NaN();
        return e;
    }
    std::vector<double> sq(samples.size());
    for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = (samples[i] - e.mean) * (samples[i] - e.mean);
    const double var = pairwise_sum(sq) / static_cast<double>(e.count - 1);
    e.std_error = std::sqrt(var / static_cast<double>(e.count));
    return e;
}

double subensemble_median(std::span<const double> samples, std::size_t groups) {
    if (groups == 0 || samples.size() < groups) throw DomainError("subensemble_median: too few samples");
    std::vector<double> means(groups);
    for (std::size_t g = 0; g < groups; ++g) {
        const std::size_t lo = g * samples.size() / groups;
        const std::size_t hi = (g + 1) * samples.size() / groups;
        means[g] = pairwise_sum(samples.subspan(lo, hi - lo)) / static_cast<double>(hi - lo);
    }
    std::sort(means.begin(), means.end());
    return groups % 2 == 1 ? means[groups / 2] : 0.5 * (means[groups / 2 - 1] + means[groups / 2]);
}

std::string_view to_string(Term t) {
    static constexpr std::array<std::string_view, kTermCount> names{
        "abs_increment", "mollified_increment", "drift",            "rs_total",    "trace_sigma_prime",
        "trace_local",   "skorokhod",           "residual_tchange", "residual_tf", "residual_pathwise"};
    return names[static_cast<std::size_t>(t)];
}

double term_value(const TanakaTerms& terms, Term t) {
    switch (t) {
        case Term::abs_increment: return terms.abs_increment;
        case Term::mollified_increment: return terms.mollified_increment;
        case Term::drift: return terms.drift;
        case Term::rs_total: return terms.rs_total;
        case Term::trace_sigma_prime: return terms.trace_sigma_prime;
        case Term::trace_local: return terms.trace_local;
        case Term::skorokhod: return terms.skorokhod;
        case Term::residual_tchange: return mollified_identity_residual(terms);
        case Term::residual_tf: return tanaka_residual(terms);
        case Term::residual_pathwise: return terms.abs_increment - terms.drift_sgn - terms.rs_sgn;
    }
    return 0.0;
}

void ExperimentConfig::validate() const {
    if (paths < 2) throw DomainError("an ensemble needs at least 2 paths");
    if (ladder.empty()) throw DomainError("mollifier ladder is empty");
    for (std::size_t k = 1; k < ladder.size(); ++k) {
        if (!(ladder[k - 1] < ladder[k])) throw DomainError("mollifier ladder must be strictly increasing");
    }
    if (levels.empty()) throw DomainError("no levels given");
    for (double x : levels) {
        if (!std::isfinite(x)) throw DomainError("levels must be finite");
    }
}

EnsembleResult::EnsembleResult(std::vector<double> levels, std::vector<MollifierIndex> ladder, std::size_t paths,
                               bool keep_rows)
    : levels_(std::move(levels)), ladder_(std::move(ladder)), paths_(paths),
      estimates_(levels_.size() * ladder_.size() * kTermCount) {
    if (keep_rows) rows_.assign(estimates_.size() * paths_, 0.0);
}

std::size_t EnsembleResult::key(std::size_t level, std::size_t n, Term t) const {
    if (level >= levels_.size() || n >= ladder_.size()) throw DomainError("ensemble key out of range");
    return (level * ladder_.size() + n) * kTermCount + static_cast<std::size_t>(t);
}

const MCEstimate& EnsembleResult::at(std::size_t level, std::size_t n, Term t) const {
    return estimates_[key(level, n, t)];
}
MCEstimate& EnsembleResult::at(std::size_t level, std::size_t n, Term t) { return estimates_[key(level, n, t)]; }

std::span<const double> EnsembleResult::samples(std::size_t level, std::size_t n, Term t) const {
    if (rows_.empty()) throw DomainError("ensemble was run without keep_rows");
    return std::span<const double>(rows_).subspan(key(level, n, t) * paths_, paths_);
}
std::span<double> EnsembleResult::samples(std::size_t level, std::size_t n, Term t) {
    if (rows_.empty()) throw DomainError("ensemble was run without keep_rows");
    return std::span<double>(rows_).subspan(key(level, n, t) * paths_, paths_);
}

EnsembleResult run_ensemble(const ExperimentConfig& config) {
    config.validate();
    const FbmSampler sampler(config.grid, config.h, config.method);
    const TanakaAssembler assembler(KernelWeights(config.grid, config.h));
    const Coefficients coeffs = coefficients_of(config.model);
    const std::size_t nl = config.levels.size();
    const std::size_t nn = config.ladder.size();
    const std::size_t keys = nl * nn * kTermCount;
    std::vector<double> values(config.paths * keys);

    for_each_path(config.paths, [&](std::size_t p) {
        FbmPath driver = sampler.sample(config.seed, p);
        const SolutionPath x = solve_model(config.model, config.x0, driver);
        const DerivativeField d = derivative_field_for(config.model, x, driver);
        const PathContext ctx = assembler.prepare(x, d, coeffs, driver);
        double* row = values.data() + p * keys;
        for (std::size_t l = 0; l < nl; ++l) {
            for (std::size_t k = 0; k < nn; ++k) {
                const TanakaTerms t =
                    assembler.terms(ctx, LevelX{config.levels[l]}, config.ladder[k], config.convention);
                for (std::size_t term = 0; term < kTermCount; ++term) {
                    row[(l * nn + k) * kTermCount + term] = term_value(t, static_cast<Term>(term));
                }
            }
        }
    });

    EnsembleResult result(config.levels, config.ladder, config.paths, config.keep_rows);
    std::vector<double> column(config.paths);
    for (std::size_t l = 0; l < nl; ++l) {
        for (std::size_t k = 0; k < nn; ++k) {
            for (std::size_t term = 0; term < kTermCount; ++term) {
                const std::size_t key = (l * nn + k) * kTermCount + term;
                for (std::size_t p = 0; p < config.paths; ++p) column[p] = values[p * keys + key];
                result.at(l, k, static_cast<Term>(term)) = estimate(column);
                if (config.keep_rows) {
                    std::copy(column.begin(), column.end(), result.samples(l, k, static_cast<Term>(term)).begin());
                }
            }
        }
    }
    return result;
}

std::vector<SolutionPath> solve_ensemble(const ExperimentConfig& config) {
    if (config.paths == 0) return {};
    const FbmSampler sampler(config.grid, config.h, config.method);
    std::vector<std::optional<SolutionPath>> out(config.paths);
    for_each_path(config.paths, [&](std::size_t p) {
        out[p].emplace(solve_model(config.model, config.x0, sampler.sample(config.seed, p)));
    });
    std::vector<SolutionPath> paths;
    paths.reserve(out.size());
    for (auto& x : out) paths.push_back(std::move(*x));
    return paths;
}

namespace {
Diagnostic diagnose(std::span<const double> samples) {
    return {estimate(samples), subensemble_median(samples, std::min<std::size_t>(8, samples.size()))};
}
}  // namespace

CauchyReport cauchy_l4_diagnostic(std::span<const SolutionPath> x_paths, MollifierIndex n, MollifierIndex m,
                                  LevelX level, std::span<const double> times) {
    if (x_paths.empty()) throw DomainError("cauchy_l4_diagnostic: empty ensemble");
    if (times.empty()) throw DomainError("cauchy_l4_diagnostic: no evaluation times");
    const TimeGrid& grid = x_paths.front().grid;
    std::vector<std::size_t> idx;
    for (double t : times) idx.push_back(grid.index_of(t));
    const std::size_t last = *std::max_element(idx.begin(), idx.end());
    const std::size_t count = x_paths.size();
    std::vector<std::vector<double>> fourth(times.size(), std::vector<double>(count));
    for_each_path(count, [&](std::size_t p) {
        const SolutionPath& x = x_paths[p];
        require_same_grid(x.grid, grid, "cauchy_l4_diagnostic");
        // Running occupation difference, read off at each requested node.
        std::vector<double> occ(last + 1, 0.0);
        for (std::size_t i = 0; i < last; ++i) {
            const double u = x.values[i] - level.x;
            occ[i + 1] = occ[i] + (mollified_delta2(n, u) - mollified_delta2(m, u)) * grid.step();
        }
        for (std::size_t k = 0; k < idx.size(); ++k) fourth[k][p] = std::pow(occ[idx[k]], 4);
    });
    CauchyReport report;
    report.times.assign(times.begin(), times.end());
    for (const auto& f : fourth) report.per_time.push_back(diagnose(f));
    report.max_over_time = *std::max_element(report.per_time.begin(), report.per_time.end(),
                                             [](const Diagnostic& a, const Diagnostic& b) {
                                                 return a.estimate.mean < b.estimate.mean;
                                             });
    return report;
}

Diagnostic l2_trace_distance(const EnsembleResult& result, std::size_t level, std::size_t n_pos,
                             std::size_t m_pos) {
    const auto tn = result.samples(level, n_pos, Term::trace_local);
    const auto tm = result.samples(level, m_pos, Term::trace_local);
    std::vector<double> sq(tn.size());
    for (std::size_t p = 0; p < sq.size(); ++p) sq[p] = (tn[p] - tm[p]) * (tn[p] - tm[p]);
    return diagnose(sq);
}

std::vector<Diagnostic> l2_trace_convergence(const EnsembleResult& result, std::size_t level) {
    if (result.ladder().size() < 2) throw DomainError("l2_trace_convergence needs a ladder of length >= 2");
    std::vector<Diagnostic> out;
    for (std::size_t k = 0; k + 1 < result.ladder().size(); ++k) {
        out.push_back(l2_trace_distance(result, level, k, k + 1));
    }
    return out;
}

namespace {

double quantile(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

double slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        mx += x[k];
        my += y[k];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        sxy += (x[k] - mx) * (y[k] - my);
        sxx += (x[k] - mx) * (x[k] - mx);
    }
    return sxx > 0.0 ? sxy / sxx : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

DensityReport density_diagnostic(std::span<const double> samples, double t, HurstParam h) {
    if (samples.size() < 1024) throw DomainError("density_diagnostic needs at least 1024 samples");
    if (!(t > 0.0)) throw DomainError("density_diagnostic: t must be positive");
    DensityReport r;
    r.count = samples.size();
    r.peak_bound = kDensityConstant * std::pow(t, -h.value());
    const MCEstimate e = estimate(samples);
    const double sd = e.std_error * std::sqrt(static_cast<double>(e.count));
    std::vector<double> v(samples.begin(), samples.end());
    const double iqr = quantile(v, 0.75) - quantile(v, 0.25);
    const double spread = std::min(sd, iqr > 0.0 ? iqr / 1.34 : sd);
    if (!(spread > 0.0)) {
        r.degenerate = true;
        return r;
    }
    r.bandwidth = 0.9 * spread * std::pow(static_cast<double>(r.count), -0.2);
    const double bw = r.bandwidth;
    const double norm = 1.0 / (static_cast<double>(r.count) * bw * std::sqrt(2.0 * std::numbers::pi));
    std::vector<double> terms(v.size());
    auto kde = [&](double x) {
        for (std::size_t k = 0; k < v.size(); ++k) {
            const double z = (x - v[k]) / bw;
            terms[k] = std::exp(-0.5 * z * z);
        }
        return norm * pairwise_sum(terms);
    };
    const double lo = *std::min_element(v.begin(), v.end()) - 3.0 * bw;
    const double hi = *std::max_element(v.begin(), v.end()) + 3.0 * bw;
    constexpr std::size_t kPoints = 512;
    r.kde.reserve(kPoints);
    for (std::size_t k = 0; k < kPoints; ++k) {
        const double x = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(kPoints - 1);
        const double p = kde(x);
        r.kde.emplace_back(x, p);
        if (p > r.kde_peak) {
            r.kde_peak = p;
            r.peak_location = x;
        }
    }
    r.within_bound = r.kde_peak <= r.peak_bound;

    // Tail fit between the 90% and 99.5% quantiles of |x - median|.
    const double center = quantile(v, 0.5);
    std::vector<double> dev(v.size());
    for (std::size_t k = 0; k < v.size(); ++k) dev[k] = std::abs(v[k] - center);
    const double d_lo = quantile(dev, 0.90);
    const double d_hi = quantile(dev, 0.995);
    std::vector<double> x2, logp, logd, loglog;
    constexpr int kTail = 16;
    for (int side : {-1, 1}) {
        for (int k = 0; k < kTail; ++k) {
            const double d = d_lo + (d_hi - d_lo) * k / (kTail - 1.0);
            const double p = kde(center + side * d);
            if (!(p > 0.0) || !(p < r.kde_peak)) continue;
            x2.push_back(d * d);
            logp.push_back(std::log(p));
            logd.push_back(std::log(d));
            loglog.push_back(std::log(-std::log(p / r.kde_peak)));
        }
    }
    r.tail_quadratic_slope = slope(x2, logp);
    r.tail_exponent = slope(logd, loglog);
    return r;
}

}  // namespace fractanaka
