#include "fractanaka/tanaka.hpp"

#include <cmath>
#include <string>

#include "fractanaka/errors.hpp"

namespace fractanaka {

std::string_view to_string(Convention c) {
    return c == Convention::argument_at_s ? "argument_at_s" : "argument_at_r";
}

Convention convention_from_string(std::string_view s) {
    if (s == "argument_at_s" || s == "s") return Convention::argument_at_s;
    if (s == "argument_at_r" || s == "r") return Convention::argument_at_r;
    throw DomainError("unknown convention '" + std::string(s) + "' (expected argument_at_s or argument_at_r)");
}

TanakaAssembler::TanakaAssembler(const KernelWeights& weights) : weights_(weights), conv_(weights) {}

PathContext TanakaAssembler::base_context(const SolutionPath& x, const Coefficients& coeffs, const FbmPath& driver,
                                          const DerivativeField& d) const {
    const TimeGrid& grid = weights_.grid();
    require_same_grid(x.grid, grid, "Tanaka terms (solution path)");
    require_same_grid(driver.grid, grid, "Tanaka terms (driver)");
    require_same_grid(d.grid(), grid, "Tanaka terms (derivative field)");
    const std::size_t n = grid.steps();
    PathContext ctx;
    ctx.x = x.values;
    ctx.b.resize(n);
    ctx.sigma.resize(n);
    ctx.sigma_prime.resize(n);
    ctx.db.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double xi = x.values[i];
        ctx.b[i] = coeffs.b(xi);
        ctx.sigma[i] = coeffs.sigma(xi);
        ctx.sigma_prime[i] = coeffs.sigma_prime(xi);
        ctx.db[i] = driver.values[i + 1] - driver.values[i];
    }
    ctx.dt = grid.step();
    ctx.alpha = weights_.hurst().alpha();
    ctx.p.assign(n, 0.0);
    ctx.q.assign(n, 0.0);
    ctx.r.assign(n, 0.0);
    return ctx;
}

PathContext TanakaAssembler::prepare(const SolutionPath& x, const DerivativeField& d, const Coefficients& coeffs,
                                     const FbmPath& driver) const {
    if (!d.is_separable()) return prepare_dense(x, d, coeffs, driver);
    PathContext ctx = base_context(x, coeffs, driver, d);
    const std::size_t n = weights_.cells();
    const auto& a = d.row_factor();
    const auto& c = d.col_factor();
    std::vector<double> tmp(n), out(n);

    conv_.causal(a, out);
    for (std::size_t j = 0; j < n; ++j) ctx.p[j] = c[j] * out[j];

    for (std::size_t i = 0; i < n; ++i) tmp[i] = ctx.sigma_prime[i] * a[i];
    conv_.causal(tmp, out);
    for (std::size_t j = 0; j < n; ++j) ctx.q[j] = c[j] * out[j];

    for (std::size_t j = 0; j < n; ++j) tmp[j] = ctx.sigma[j] * c[j];
    conv_.anticausal(tmp, out);
    for (std::size_t i = 0; i < n; ++i) ctx.r[i] = a[i] * out[i];
    return ctx;
}

PathContext TanakaAssembler::prepare_dense(const SolutionPath& x, const DerivativeField& d,
                                           const Coefficients& coeffs, const FbmPath& driver) const {
    PathContext ctx = base_context(x, coeffs, driver, d);
    const std::size_t n = weights_.cells();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            const double v = adapted_cell_fraction(i, j) * d(i, j) * weights_(i, j);
            ctx.p[j] += v;
            ctx.q[j] += ctx.sigma_prime[i] * v;
            ctx.r[i] += ctx.sigma[j] * v;
        }
    }
    return ctx;
}

TanakaTerms TanakaAssembler::terms(const PathContext& ctx, LevelX level, MollifierIndex n,
                                   Convention convention) const {
    const std::size_t cells = ctx.b.size();
    const bool at_s = convention == Convention::argument_at_s;
    TanakaTerms t;
    t.level = level;
    t.n = n;
    t.convention = convention;
    double drift = 0.0, rs = 0.0, tsp = 0.0, tl = 0.0;
    double drift_sgn = 0.0, rs_sgn = 0.0, tsp_sgn = 0.0;
    for (std::size_t j = 0; j < cells; ++j) {
        const double u = ctx.x[j] - level.x;
        const double fp = mollified_sign(n, u);
        const double fpp = mollified_delta2(n, u);
        const double sg = sign(u);
        drift += fp * ctx.b[j];
        drift_sgn += sg * ctx.b[j];
        rs += fp * ctx.sigma[j] * ctx.db[j];
        rs_sgn += sg * ctx.sigma[j] * ctx.db[j];
        const double sp_weight = at_s ? ctx.sigma_prime[j] * ctx.p[j] : ctx.q[j];
        tsp += fp * sp_weight;
        tsp_sgn += sg * sp_weight;
        tl += fpp * (at_s ? ctx.sigma[j] * ctx.p[j] : ctx.r[j]);
    }
    const double x_end = ctx.x[cells];
    const double x_start = ctx.x[0];
    t.abs_increment = std::abs(x_end - level.x) - std::abs(x_start - level.x);
    t.mollified_increment = mollified_abs(n, x_end - level.x) - mollified_abs(n, x_start - level.x);
    t.drift = drift * ctx.dt;
    t.drift_sgn = drift_sgn * ctx.dt;
    t.rs_total = rs;
    t.rs_sgn = rs_sgn;
    t.trace_sigma_prime = ctx.alpha * tsp;
    t.trace_sigma_prime_sgn = ctx.alpha * tsp_sgn;
    t.trace_local = ctx.alpha * tl;
    t.skorokhod = t.rs_total - t.trace_sigma_prime - t.trace_local;
    return t;
}

TanakaTerms decomposition_terms(const SolutionPath& x_path, const DerivativeField& d, const Coefficients& coeffs,
                                LevelX level, MollifierIndex n, const FbmPath& driver, const KernelWeights& weights,
                                Convention convention) {
    const TanakaAssembler assembler(weights);
    return assembler.terms(assembler.prepare(x_path, d, coeffs, driver), level, n, convention);
}

double mollified_identity_residual(const TanakaTerms& t) { return t.mollified_increment - t.drift - t.rs_total; }

double tanaka_residual(const TanakaTerms& t) {
    return t.abs_increment - t.drift_sgn - t.trace_sigma_prime_sgn - t.trace_local;
}

double pathwise_residual(const SolutionPath& x_path, const Coefficients& coeffs, LevelX level,
                         const FbmPath& driver, std::optional<MollifierIndex> n) {
    require_same_grid(x_path.grid, driver.grid, "pathwise_residual");
    const std::size_t cells = x_path.grid.steps();
    const double dt = x_path.grid.step();
    double drift = 0.0, rs = 0.0;
    for (std::size_t i = 0; i < cells; ++i) {
        const double xi = x_path.values[i];
        const double g = n ? mollified_sign(*n, xi - level.x) : sign(xi - level.x);
        drift += g * coeffs.b(xi);
        rs += g * coeffs.sigma(xi) * (driver.values[i + 1] - driver.values[i]);
    }
    const double lhs = std::abs(x_path.values[cells] - level.x) - std::abs(x_path.values[0] - level.x);
    return lhs - drift * dt - rs;
}

double mollified_sign_gap(const SolutionPath& x_path, const Coefficients& coeffs, LevelX level, MollifierIndex n,
                          double beta) {
    std::vector<double> g(x_path.values.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double u = x_path.values[i] - level.x;
        g[i] = (mollified_sign(n, u) - sign(u)) * coeffs.sigma(x_path.values[i]);
    }
    return fractional_norm(GridFunction(x_path.grid, std::move(g)), beta);
}

double convex_residual(std::span<const Atom> atoms, double alpha, double beta, const TanakaAssembler& assembler,
                       const PathContext& ctx, MollifierIndex n, Convention convention) {
    (void)alpha;  // constant part of f cancels in f(X_t) - f(X_0)
    for (const Atom& at : atoms) {
        if (!(at.w >= 0.0)) throw DomainError("convex_residual: atom weights must be nonnegative");
    }
    const std::size_t cells = ctx.b.size();
    double drift = 0.0, trace = 0.0;
    for (std::size_t j = 0; j < cells; ++j) {
        drift += ctx.b[j];
        trace += convention == Convention::argument_at_s ? ctx.sigma_prime[j] * ctx.p[j] : ctx.q[j];
    }
    const double linear = ctx.x[cells] - ctx.x[0] - drift * ctx.dt - ctx.alpha * trace;
    double res = beta * linear;
    for (const Atom& at : atoms) {
        res += at.w * tanaka_residual(assembler.terms(ctx, LevelX{at.a}, n, convention));
    }
    return res;
}

double convex_residual(std::span<const Atom> atoms, double alpha, double beta, const SolutionPath& x_path,
                       const DerivativeField& d, const Coefficients& coeffs, MollifierIndex n,
                       const FbmPath& driver, const KernelWeights& weights, Convention convention) {
    const TanakaAssembler assembler(weights);
    return convex_residual(atoms, alpha, beta, assembler, assembler.prepare(x_path, d, coeffs, driver), n,
                           convention);
}

double weighted_local_time_fbm(const FbmPath& b_path, HurstParam h, LevelX level, MollifierIndex n) {
    const TimeGrid& grid = b_path.grid;
    const double expo = 2.0 * h.value() - 1.0;
    double s = 0.0;
    for (std::size_t i = 1; i < grid.steps(); ++i) {
        s += gaussian_kernel(n.epsilon(), b_path.values[i] - level.x) * std::pow(grid.node(i), expo);
    }
    return 2.0 * h.value() * s * grid.step();
}

}  // namespace fractanaka
