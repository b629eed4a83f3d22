#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include "fractanaka/cli.hpp"
#include "fractanaka/csv.hpp"
#include "fractanaka/errors.hpp"
#include "fractanaka/mc.hpp"
#include "fractanaka/parallel.hpp"

namespace fractanaka::cli {

namespace {

namespace fs = std::filesystem;

std::string num(double v) { return format_double(v); }

ModelSpec model_of(const CliConfig& cfg) {
    if (cfg.model == "fbm") return FbmModel{};
    if (cfg.model == "fou") return FouModel{cfg.nu};
    if (cfg.model == "doss") return DossModel::a_plus_sin(cfg.doss_a);
    if (cfg.model == "holder") {
        Coefficients c;
        c.b = [](double y) { return std::pow(std::abs(y), 0.8); };
        c.b_prime = [](double y) { return 0.8 * sign(y) * std::pow(std::abs(y), -0.2); };
        c.sigma = [](double) { return 1.0; };
        c.sigma_prime = [](double) { return 0.0; };
        return CustomModel{c};
    }
    throw UsageError("unknown model '" + cfg.model + "'");
}

ExperimentConfig experiment_of(const CliConfig& cfg) {
    ExperimentConfig e;
    e.model = model_of(cfg);
    e.h = HurstParam(cfg.hurst);
    e.grid = TimeGrid(cfg.horizon, cfg.grid_n);
    e.paths = cfg.paths;
    e.seed = cfg.seed;
    e.levels = cfg.levels;
    e.ladder.clear();
    for (long long n : cfg.ladder) e.ladder.emplace_back(n);
    e.convention = convention_from_string(cfg.convention);
    e.x0 = cfg.x0;
    e.method = cfg.method == "cholesky" ? SampleMethod::cholesky : SampleMethod::circulant;
    return e;
}

// E|Z - x| for Z ~ N(0, v).
double folded_mean(double x, double v) {
    return std::sqrt(2.0 * v / std::numbers::pi) * std::exp(-0.5 * x * x / v) + x * std::erf(x / std::sqrt(2.0 * v));
}

std::ofstream open_output(const CliConfig& cfg, const std::string& name) {
    std::ofstream out(fs::path(cfg.out_dir) / name, std::ios::binary);
    if (!out) throw NumericalError("cannot open " + (fs::path(cfg.out_dir) / name).string() + " for writing");
    return out;
}

void header(std::ostream& s, const CliConfig& cfg, const ExperimentConfig& e) {
    s << "model " << cfg.model << ", H " << num(e.h.value()) << ", T " << num(e.grid.horizon()) << ", N "
      << e.grid.steps() << ", paths " << e.paths << ", seed " << e.seed << ", convention "
      << to_string(e.convention) << '\n';
}

int run_sample(const CliConfig& cfg, const ExperimentConfig& e, std::ostream& log) {
    const auto paths = sample_fbm(e.grid, e.h, e.paths, e.seed, e.method);
    auto out = open_output(cfg, "paths.csv");
    write_paths_csv(out, paths);
    std::vector<double> end(paths.size()), mid_end(paths.size());
    const std::size_t n = e.grid.steps();
    for (std::size_t p = 0; p < paths.size(); ++p) {
        end[p] = paths[p].values[n] * paths[p].values[n];
        mid_end[p] = paths[p].values[n / 2] * paths[p].values[n];
    }
    const MCEstimate var = estimate(end);
    const MCEstimate cov = estimate(mid_end);
    const double t = e.grid.horizon();
    auto summary = open_output(cfg, "summary.txt");
    header(summary, cfg, e);
    summary << "E[B_T^2] " << num(var.mean) << " (stderr " << num(var.std_error) << ") vs T^{2H} "
            << num(std::pow(t, 2.0 * e.h.value())) << '\n';
    summary << "E[B_{T/2} B_T] " << num(cov.mean) << " (stderr " << num(cov.std_error) << ") vs R(T/2,T) "
            << num(covariance(e.grid.node(n / 2), t, e.h)) << '\n';
    log << "wrote paths.csv and summary.txt\n";
    return 0;
}

int run_solve(const CliConfig& cfg, const ExperimentConfig& e, std::ostream& log) {
    const auto xs = solve_ensemble(e);
    std::vector<std::vector<double>> values;
    std::vector<double> end, holder;
    for (const auto& x : xs) {
        values.push_back(x.values);
        end.push_back(x.values.back());
        const HolderEstimate h = holder_estimate(x);
        if (!h.degenerate) holder.push_back(h.exponent);
    }
    auto out = open_output(cfg, "paths.csv");
    write_paths_csv(out, e.grid, values);
    auto summary = open_output(cfg, "summary.txt");
    header(summary, cfg, e);
    const MCEstimate m = estimate(end);
    summary << "mean X_T " << num(m.mean) << " (stderr " << num(m.std_error) << ")\n";
    if (holder.size() >= 2) {
        const MCEstimate he = estimate(holder);
        summary << "mean Holder exponent " << num(he.mean) << " (stderr " << num(he.std_error) << ")\n";
    }
    if (const auto* fou = std::get_if<FouModel>(&e.model)) {
        std::vector<double> sq(end.size());
        for (std::size_t p = 0; p < end.size(); ++p) sq[p] = (end[p] - m.mean) * (end[p] - m.mean);
        const MCEstimate var = estimate(sq);
        std::vector<double> kernel(e.grid.nodes());
        for (std::size_t i = 0; i < kernel.size(); ++i) kernel[i] = std::exp(-(e.grid.horizon() - e.grid.node(i)));
        const GridFunction phi(e.grid, kernel);
        const double oracle = fou->nu * fou->nu * inner_product_H(phi, phi, e.h);
        summary << "Var X_T " << num(var.mean) << " (stderr " << num(var.std_error) << ") vs inner-product oracle "
                << num(oracle) << '\n';
    }
    log << "wrote paths.csv and summary.txt\n";
    return 0;
}

int run_tanaka(const CliConfig& cfg, ExperimentConfig e, std::ostream& log) {
    e.keep_rows = true;
    const EnsembleResult r = run_ensemble(e);
    {
        auto out = open_output(cfg, "terms.csv");
        write_terms_csv(out, r, e.convention);
    }
    {
        auto out = open_output(cfg, "ensemble.csv");
        write_ensemble_csv(out, r);
    }
    auto summary = open_output(cfg, "summary.txt");
    header(summary, cfg, e);
    const bool fbm = std::holds_alternative<FbmModel>(e.model) && e.x0 == 0.0;
    const double v = std::pow(e.grid.horizon(), 2.0 * e.h.value());
    for (std::size_t l = 0; l < r.levels().size(); ++l) {
        const double x = r.levels()[l];
        for (std::size_t k = 0; k < r.ladder().size(); ++k) {
            const long long n = r.ladder()[k].value();
            summary << "level " << num(x) << " n " << n << '\n';
            for (Term t : {Term::trace_local, Term::skorokhod, Term::residual_tchange, Term::residual_tf,
                           Term::residual_pathwise}) {
                const MCEstimate& m = r.at(l, k, t);
                summary << "  " << to_string(t) << " mean " << num(m.mean) << " stderr " << num(m.std_error) << '\n';
            }
            if (fbm) {
                const double oracle = folded_mean(x, v) - std::abs(x);
                const double inv_n = 1.0 / static_cast<double>(n);
                const double oracle_n = folded_mean(x, v + inv_n) - folded_mean(x, inv_n);
                const MCEstimate& m = r.at(l, k, Term::trace_local);
                summary << "  trace_local vs E|B_T - x| - |x| = " << num(oracle) << ": "
                        << num((m.mean - oracle) / m.std_error) << " stderr\n";
                summary << "  trace_local vs mollified oracle E f_n(B_T - x) - f_n(-x) = " << num(oracle_n) << ": "
                        << num((m.mean - oracle_n) / m.std_error) << " stderr\n";
            }
        }
    }
    log << "wrote terms.csv, ensemble.csv and summary.txt\n";
    return 0;
}

int run_pathwise(const CliConfig& cfg, const ExperimentConfig& e, std::ostream& log) {
    const Coefficients coeffs = coefficients_of(e.model);
    const FbmSampler sampler(e.grid, e.h, e.method);
    const double beta = default_beta(e.h);
    const std::size_t nl = e.levels.size(), nn = e.ladder.size();
    // Per path, per level: sgn residual, then (mollified residual, norm gap) per n.
    const std::size_t stride = nl * (1 + 2 * nn);
    std::vector<double> vals(e.paths * stride);
    for_each_path(e.paths, [&](std::size_t p) {
        const FbmPath driver = sampler.sample(e.seed, p);
        const SolutionPath x = solve_model(e.model, e.x0, driver);
        double* row = vals.data() + p * stride;
        for (std::size_t l = 0; l < nl; ++l) {
            const LevelX level{e.levels[l]};
            double* cell = row + l * (1 + 2 * nn);
            cell[0] = pathwise_residual(x, coeffs, level, driver);
            for (std::size_t k = 0; k < nn; ++k) {
                cell[1 + 2 * k] = pathwise_residual(x, coeffs, level, driver, e.ladder[k]);
                cell[2 + 2 * k] = mollified_sign_gap(x, coeffs, level, e.ladder[k], beta);
            }
        }
    });
    auto out = open_output(cfg, "pathwise.csv");
    out << "path_id,x,n,residual_sgn,residual_mollified,norm_gap\n";
    for (std::size_t p = 0; p < e.paths; ++p) {
        for (std::size_t l = 0; l < nl; ++l) {
            const double* cell = vals.data() + p * stride + l * (1 + 2 * nn);
            for (std::size_t k = 0; k < nn; ++k) {
                out << p << ',' << num(e.levels[l]) << ',' << e.ladder[k].value() << ',' << num(cell[0]) << ','
                    << num(cell[1 + 2 * k]) << ',' << num(cell[2 + 2 * k]) << '\n';
            }
        }
    }
    auto summary = open_output(cfg, "summary.txt");
    header(summary, cfg, e);
    summary << "beta " << num(beta) << '\n';
    std::vector<double> col(e.paths);
    for (std::size_t l = 0; l < nl; ++l) {
        auto column = [&](std::size_t off) {
            for (std::size_t p = 0; p < e.paths; ++p) col[p] = std::abs(vals[p * stride + l * (1 + 2 * nn) + off]);
            return estimate(col);
        };
        const MCEstimate s = column(0);
        summary << "level " << num(e.levels[l]) << " mean |residual_sgn| " << num(s.mean) << " stderr "
                << num(s.std_error) << '\n';
        for (std::size_t k = 0; k < nn; ++k) {
            const MCEstimate m = column(1 + 2 * k);
            const MCEstimate g = column(2 + 2 * k);
            summary << "  n " << e.ladder[k].value() << " mean |residual_mollified| " << num(m.mean)
                    << " mean norm_gap " << num(g.mean) << '\n';
        }
    }
    log << "wrote pathwise.csv and summary.txt\n";
    return 0;
}

int run_converge(const CliConfig& cfg, ExperimentConfig e, std::ostream& log) {
    if (e.ladder.size() < 2) throw UsageError("converge needs a ladder of at least two indices");
    const std::size_t n = e.grid.steps();
    const std::vector<double> times{e.grid.node(n / 4), e.grid.node(n / 2), e.grid.horizon()};
    const auto xs = solve_ensemble(e);
    e.keep_rows = true;
    const EnsembleResult r = run_ensemble(e);
    auto out = open_output(cfg, "ladder.csv");
    out << "x,n,m,cauchy_l4_end,cauchy_l4_end_stderr,cauchy_l4_max,l2_trace,l2_trace_stderr\n";
    auto summary = open_output(cfg, "summary.txt");
    header(summary, cfg, e);
    for (std::size_t l = 0; l < e.levels.size(); ++l) {
        const auto l2 = l2_trace_convergence(r, l);
        for (std::size_t k = 0; k + 1 < e.ladder.size(); ++k) {
            const CauchyReport c =
                cauchy_l4_diagnostic(xs, e.ladder[k], e.ladder[k + 1], LevelX{e.levels[l]}, times);
            const Diagnostic& end = c.per_time.back();
            out << num(e.levels[l]) << ',' << e.ladder[k].value() << ',' << e.ladder[k + 1].value() << ','
                << num(end.estimate.mean) << ',' << num(end.estimate.std_error) << ','
                << num(c.max_over_time.estimate.mean) << ',' << num(l2[k].estimate.mean) << ','
                << num(l2[k].estimate.std_error) << '\n';
            summary << "level " << num(e.levels[l]) << " (" << e.ladder[k].value() << ',' << e.ladder[k + 1].value()
                    << ") L4 median " << num(end.median) << " L2 trace median " << num(l2[k].median) << '\n';
        }
    }
    log << "wrote ladder.csv and summary.txt\n";
    return 0;
}

int run_density(const CliConfig& cfg, const ExperimentConfig& e, std::ostream& log) {
    const double t = cfg.density_time > 0.0 ? cfg.density_time : e.grid.horizon();
    const std::size_t idx = e.grid.index_of(t);
    const auto xs = solve_ensemble(e);
    std::vector<double> samples;
    samples.reserve(xs.size());
    for (const auto& x : xs) samples.push_back(x.values[idx]);
    const DensityReport d = density_diagnostic(samples, t, e.h);
    {
        auto out = open_output(cfg, "kde.csv");
        out << "x,kde\n";
        for (const auto& [x, p] : d.kde) out << num(x) << ',' << num(p) << '\n';
    }
    auto summary = open_output(cfg, "summary.txt");
    header(summary, cfg, e);
    if (d.degenerate) {
        summary << "degenerate sample: all values equal\n";
        log << "wrote kde.csv and summary.txt\n";
        return 0;
    }
    summary << "t " << num(t) << ", bandwidth " << num(d.bandwidth) << '\n';
    summary << "kde peak " << num(d.kde_peak) << " at " << num(d.peak_location) << '\n';
    if (std::holds_alternative<FbmModel>(e.model)) {
        const double oracle = std::pow(t, -e.h.value()) / std::sqrt(2.0 * std::numbers::pi);
        summary << "peak vs 1/sqrt(2 pi) t^{-H} = " << num(oracle) << ": relative difference "
                << num(d.kde_peak / oracle - 1.0) << '\n';
    }
    summary << "bound C t^{-H} = " << num(d.peak_bound) << " (C = " << num(kDensityConstant) << "): "
            << (d.within_bound ? "holds" : "violated") << '\n';
    summary << "tail slope of log p against x^2 " << num(d.tail_quadratic_slope) << ", tail exponent "
            << num(d.tail_exponent) << '\n';
    log << "wrote kde.csv and summary.txt\n";
    return 0;
}

}  // namespace

int run(const CliConfig& cfg, std::ostream& log) {
    try {
        if (cfg.workers > 0) set_worker_count(cfg.workers);
        fs::create_directories(cfg.out_dir);
        const ExperimentConfig e = experiment_of(cfg);
        switch (cfg.subcommand) {
            case Subcommand::sample: return run_sample(cfg, e, log);
            case Subcommand::solve: return run_solve(cfg, e, log);
            case Subcommand::tanaka: return run_tanaka(cfg, e, log);
            case Subcommand::pathwise: return run_pathwise(cfg, e, log);
            case Subcommand::converge: return run_converge(cfg, e, log);
            case Subcommand::density: return run_density(cfg, e, log);
        }
    } catch (const UsageError& ex) {
        log << "usage error: " << ex.what() << '\n';
        return 2;
    } catch (const DomainError& ex) {
        log << "error: " << ex.what() << '\n';
        return 2;
    } catch (const NumericalError& ex) {
        log << "numerical failure: " << ex.what() << '\n';
        return 1;
    } catch (const std::exception& ex) {
        log << "failure: " << ex.what() << '\n';
        return 1;
    }
    return 2;
}

int main(const std::vector<std::string>& args, std::ostream& log, std::ostream& err) {
    CliConfig cfg;
    try {
        cfg = parse_config(args);
    } catch (const HelpRequested& ex) {
        log << ex.what();
        return 0;
    } catch (const UsageError& ex) {
        err << ex.what() << '\n';
        return 2;
    } catch (const DomainError& ex) {
        err << ex.what() << '\n';
        return 2;
    }
    std::ostringstream buffer;
    const int code = run(cfg, buffer);
    (code == 0 ? log : err) << buffer.str();
    return code;
}

}  // namespace fractanaka::cli
