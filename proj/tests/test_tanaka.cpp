#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "fractanaka/errors.hpp"
#include "fractanaka/mc.hpp"
#include "fractanaka/tanaka.hpp"

using namespace fractanaka;

namespace {

const double kSqrt2Pi = std::sqrt(2.0 * std::numbers::pi);

// E|a + sqrt(v) Z|
double folded(double a, double v) {
    return std::sqrt(2.0 * v / std::numbers::pi) * std::exp(-a * a / (2.0 * v)) + a * std::erf(a / std::sqrt(2.0 * v));
}

struct Batch {
    std::vector<SolutionPath> x;
    std::vector<FbmPath> b;
};

Batch solve_batch(const ModelSpec& model, double h, std::size_t n, std::size_t paths, std::uint64_t seed,
                  double x0 = 0.0, double horizon = 1.0) {
    Batch out;
    out.b = sample_fbm(TimeGrid(horizon, n), HurstParam(h), paths, seed);
    for (const auto& b : out.b) out.x.push_back(solve_model(model, x0, b));
    return out;
}

std::vector<TanakaTerms> terms_batch(const ModelSpec& model, const Batch& batch, double h, double level, long long n,
                                     Convention conv = Convention::argument_at_s) {
    const TanakaAssembler asm_(KernelWeights(batch.b[0].grid, HurstParam(h)));
    const Coefficients c = coefficients_of(model);
    std::vector<TanakaTerms> out;
    for (std::size_t p = 0; p < batch.b.size(); ++p) {
        const DerivativeField d = derivative_field_for(model, batch.x[p], batch.b[p]);
        out.push_back(asm_.terms(asm_.prepare(batch.x[p], d, c, batch.b[p]), LevelX{level}, MollifierIndex(n), conv));
    }
    return out;
}

template <class F>
MCEstimate stat(const std::vector<TanakaTerms>& ts, F f) {
    std::vector<double> v;
    for (const auto& t : ts) v.push_back(f(t));
    return estimate(v);
}

FbmPath subsample_prefix(const FbmPath& b, std::size_t steps) {
    const TimeGrid g(b.grid.step() * static_cast<double>(steps), steps);
    return FbmPath(g, std::vector<double>(b.values.begin(), b.values.begin() + static_cast<std::ptrdiff_t>(steps) + 1));
}

}  // namespace

TEST(DecompositionTerms, BookkeepingIsExact) {
    const DossModel m = DossModel::a_plus_sin(2.0);
    const Batch batch = solve_batch(m, 0.7, 512, 4, 1);
    for (Convention conv : {Convention::argument_at_s, Convention::argument_at_r}) {
        for (const auto& t : terms_batch(m, batch, 0.7, 0.2, 16, conv)) {
            EXPECT_NEAR(t.skorokhod + t.trace_sigma_prime + t.trace_local, t.rs_total, 1e-12);
            EXPECT_EQ(t.convention, conv);
            EXPECT_EQ(t.n.value(), 16);
        }
    }
}

TEST(DecompositionTerms, NoNoiseReducesToOde) {
    const CustomModel m{Coefficients::constant(0.5, 0.0)};
    const Batch batch = solve_batch(m, 0.75, 256, 2, 2, -0.2);
    const KernelWeights w(batch.b[0].grid, HurstParam(0.75));
    const Coefficients c = coefficients_of(m);
    const TanakaTerms t = decomposition_terms(batch.x[0], derivative_field(c, batch.x[0], batch.b[0]), c, LevelX{0.0},
                                              MollifierIndex(8), batch.b[0], w);
    EXPECT_EQ(t.rs_total, 0.0);
    EXPECT_EQ(t.trace_sigma_prime, 0.0);
    EXPECT_EQ(t.trace_local, 0.0);
    EXPECT_EQ(t.skorokhod, 0.0);
    EXPECT_NEAR(mollified_identity_residual(t), 0.0, 2.0 * batch.b[0].grid.step() * 0.5);
}

TEST(DecompositionTerms, ConstantPathHasZeroResidual) {
    const CustomModel m{Coefficients::constant(0.0, 0.0)};
    const Batch batch = solve_batch(m, 0.75, 64, 1, 3, 0.4);
    const TanakaTerms t = terms_batch(m, batch, 0.75, 0.0, 4)[0];
    EXPECT_EQ(mollified_identity_residual(t), 0.0);
    EXPECT_EQ(tanaka_residual(t), 0.0);
}

TEST(DecompositionTerms, FbmTraceMatchesClosedForm) {
    // Kernel row sums telescope: alpha sum_i m_ij w_ij = (t_{j+1}^{2H} - t_j^{2H}) / 2.
    for (double h : {0.6, 0.75, 0.9}) {
        const Batch batch = solve_batch(FbmModel{}, h, 1024, 3, 4);
        const auto ts = terms_batch(FbmModel{}, batch, h, 0.1, 64);
        for (std::size_t p = 0; p < ts.size(); ++p) {
            const TimeGrid& g = batch.b[p].grid;
            double want = 0.0;
            for (std::size_t j = 0; j < g.steps(); ++j) {
                want += mollified_delta2(MollifierIndex(64), batch.b[p].values[j] - 0.1) *
                        (std::pow(g.node(j + 1), 2 * h) - std::pow(g.node(j), 2 * h)) / 2.0;
            }
            EXPECT_EQ(ts[p].trace_sigma_prime, 0.0);
            EXPECT_NEAR(ts[p].trace_local, want, 1e-6) << h;
        }
    }
}

TEST(DecompositionTerms, SeparableAndDenseRoutesAgree) {
    const DossModel m = DossModel::a_plus_sin(2.0);
    const Batch batch = solve_batch(m, 0.65, 300, 2, 5);
    const TanakaAssembler asm_(KernelWeights(batch.b[0].grid, HurstParam(0.65)));
    const Coefficients c = coefficients_of(m);
    for (std::size_t p = 0; p < 2; ++p) {
        const DerivativeField d = derivative_field(c, batch.x[p], batch.b[p]);
        const DerivativeField dd = DerivativeField::from_dense(batch.b[p].grid, d.dense());
        const PathContext fast = asm_.prepare(batch.x[p], d, c, batch.b[p]);
        const PathContext slow = asm_.prepare_dense(batch.x[p], d, c, batch.b[p]);
        const PathContext dense = asm_.prepare(batch.x[p], dd, c, batch.b[p]);
        for (std::size_t k = 0; k < fast.p.size(); ++k) {
            EXPECT_NEAR(fast.p[k], slow.p[k], 1e-10 * (1.0 + std::abs(slow.p[k])));
            EXPECT_NEAR(fast.q[k], slow.q[k], 1e-10 * (1.0 + std::abs(slow.q[k])));
            EXPECT_NEAR(fast.r[k], slow.r[k], 1e-10 * (1.0 + std::abs(slow.r[k])));
            EXPECT_NEAR(dense.p[k], slow.p[k], 1e-12 * (1.0 + std::abs(slow.p[k])));
        }
        for (Convention conv : {Convention::argument_at_s, Convention::argument_at_r}) {
            const TanakaTerms a = asm_.terms(fast, LevelX{0.1}, MollifierIndex(16), conv);
            const TanakaTerms b = asm_.terms(slow, LevelX{0.1}, MollifierIndex(16), conv);
            EXPECT_NEAR(a.trace_local, b.trace_local, 1e-10);
            EXPECT_NEAR(a.trace_sigma_prime, b.trace_sigma_prime, 1e-10);
        }
    }
}

TEST(DecompositionTerms, SingularDoubleIntegralRouteAgrees) {
    const DossModel m = DossModel::a_plus_sin(2.0);
    const Batch batch = solve_batch(m, 0.8, 128, 1, 6);
    const KernelWeights w(batch.b[0].grid, HurstParam(0.8));
    const Coefficients c = coefficients_of(m);
    const DerivativeField d = derivative_field(c, batch.x[0], batch.b[0]);
    const MollifierIndex n(16);
    const double level = 0.2;
    const std::size_t nodes = batch.x[0].grid.nodes();
    const auto& x = batch.x[0].values;
    SquareMatrix fs(nodes, 0.0), fl(nodes, 0.0), rs(nodes, 0.0), rl(nodes, 0.0);
    // F(s, r) stored as matrix(r, s)
    for (std::size_t i = 0; i < nodes; ++i) {
        for (std::size_t j = i; j < nodes; ++j) {
            const double dm = adapted_cell_fraction(i, j) * d(i, j);
            fs(i, j) = mollified_sign(n, x[j] - level) * m.sigma_prime(x[j]) * dm;
            fl(i, j) = mollified_delta2(n, x[j] - level) * m.sigma(x[j]) * dm;
            rs(i, j) = mollified_sign(n, x[j] - level) * m.sigma_prime(x[i]) * dm;
            rl(i, j) = mollified_delta2(n, x[i] - level) * m.sigma(x[j]) * dm;
        }
    }
    const double alpha = HurstParam(0.8).alpha();
    const TanakaTerms at_s = decomposition_terms(batch.x[0], d, c, LevelX{level}, n, batch.b[0], w);
    const TanakaTerms at_r =
        decomposition_terms(batch.x[0], d, c, LevelX{level}, n, batch.b[0], w, Convention::argument_at_r);
    EXPECT_NEAR(at_s.trace_sigma_prime, alpha * singular_double_integral(fs, w), 1e-10);
    EXPECT_NEAR(at_s.trace_local, alpha * singular_double_integral(fl, w), 1e-10);
    EXPECT_NEAR(at_r.trace_sigma_prime, alpha * singular_double_integral(rs, w), 1e-10);
    EXPECT_NEAR(at_r.trace_local, alpha * singular_double_integral(rl, w), 1e-10);
}

TEST(DecompositionTerms, LevelShiftForFbm) {
    const Batch batch = solve_batch(FbmModel{}, 0.75, 512, 1, 7);
    const Batch shifted = solve_batch(FbmModel{}, 0.75, 512, 1, 7, -0.3);
    const TanakaTerms a = terms_batch(FbmModel{}, batch, 0.75, 0.3, 32)[0];
    const TanakaTerms b = terms_batch(FbmModel{}, shifted, 0.75, 0.0, 32)[0];
    EXPECT_NEAR(a.abs_increment, b.abs_increment, 1e-12);
    EXPECT_NEAR(a.rs_total, b.rs_total, 1e-12);
    EXPECT_NEAR(a.trace_local, b.trace_local, 1e-12);
    EXPECT_NEAR(a.skorokhod, b.skorokhod, 1e-12);
}

TEST(DecompositionTerms, DriftConvergesMonotonicallyToSgn) {
    const FouModel m{1.0};
    const Batch batch = solve_batch(m, 0.75, 1024, 8, 8, 0.5);
    for (std::size_t p = 0; p < 8; ++p) {
        Batch one{{batch.x[p]}, {batch.b[p]}};
        double prev = std::numeric_limits<double>::infinity();
        for (long long n : {4, 16, 64, 256}) {
            const TanakaTerms t = terms_batch(m, one, 0.75, 0.0, n)[0];
            const double gap = std::abs(t.drift - t.drift_sgn);
            EXPECT_LT(gap, prev);
            prev = gap;
        }
    }
}

TEST(DecompositionTerms, FouSkorokhodHasZeroMean) {
    const FouModel m{1.0};
    const Batch batch = solve_batch(m, 0.75, 2048, 4096, 9);
    const MCEstimate e = stat(terms_batch(m, batch, 0.75, 0.0, 16), [](const TanakaTerms& t) { return t.skorokhod; });
    EXPECT_LT(std::abs(e.mean), 4.0 * e.std_error) << e.mean << " +- " << e.std_error;
}

TEST(MollifiedIdentityResidual, RefinementRateLaw) {
    // Left-point error ~ sum f''_n (dB)^2 / 2 ~ dt^{2H-1}: factor 2^{2H-1} per doubling.
    for (double h : {0.75, 0.9}) {
        const auto fine = sample_fbm(TimeGrid(1.0, 2048), HurstParam(h), 200, 10);
        std::vector<std::vector<double>> res(4);
        for (std::size_t k = 0; k < 4; ++k) {
            const std::size_t factor = std::size_t{8} >> k;
            Batch batch;
            for (const auto& b : fine) {
                batch.b.push_back(subsample(b, factor));
                batch.x.push_back(solve_model(FbmModel{}, 0.0, batch.b.back()));
            }
            for (const auto& t : terms_batch(FbmModel{}, batch, h, 0.0, 4)) res[k].push_back(std::abs(mollified_identity_residual(t)));
        }
        const double expected = std::pow(2.0, 2 * h - 1);
        for (std::size_t k = 1; k < 4; ++k) {
            const double ratio = estimate(res[k - 1]).mean / estimate(res[k]).mean;
            EXPECT_NEAR(ratio, expected, 0.2) << "H=" << h << " step " << k;
        }
        if (h == 0.9) {
            for (std::size_t k = 1; k < 4; ++k) {
                int good = 0;
                for (std::size_t p = 0; p < fine.size(); ++p) good += res[k - 1][p] >= 1.5 * res[k][p] ? 1 : 0;
                EXPECT_GE(good, 180) << "step " << k;
            }
        }
    }
}

TEST(MollifiedIdentityResidual, DossCalibration) {
    // Baseline holds at H = 0.9; at H = 0.75 the dt^{2H-1} error puts the 95th percentile near 0.1.
    const DossModel m = DossModel::a_plus_sin(2.0);
    const Batch batch = solve_batch(m, 0.9, 2048, 200, 11);
    int good = 0;
    for (const auto& t : terms_batch(m, batch, 0.9, 0.0, 16)) good += std::abs(mollified_identity_residual(t)) <= 1e-2 ? 1 : 0;
    EXPECT_GE(good, 190);
}

TEST(TanakaResidual, NoNoiseNoCrossing) {
    const CustomModel m{Coefficients::constant(1.0, 0.0)};
    const Batch batch = solve_batch(m, 0.75, 100, 1, 12, 0.5);
    EXPECT_LE(std::abs(tanaka_residual(terms_batch(m, batch, 0.75, 0.0, 64)[0])), 1e-12);
    const Batch crossing = solve_batch(m, 0.75, 100, 1, 12, -0.305);
    EXPECT_LE(std::abs(tanaka_residual(terms_batch(m, crossing, 0.75, 0.0, 64)[0])), 2.0 * 0.01);
}

TEST(TanakaResidual, FbmMeanMatchesMollifiedOracle) {
    // E trace_local = E f_n(B_1) = folded(0, 1 + 1/n) - folded(0, 1/n).
    const Batch batch = solve_batch(FbmModel{}, 0.75, 2048, 4096, 13);
    for (long long n : {16, 64}) {
        const auto ts = terms_batch(FbmModel{}, batch, 0.75, 0.0, n);
        const MCEstimate tl = stat(ts, [](const TanakaTerms& t) { return t.trace_local; });
        const double eps = 1.0 / static_cast<double>(n);
        EXPECT_LT(std::abs(tl.mean - (folded(0.0, 1.0 + eps) - folded(0.0, eps))), 4.0 * tl.std_error) << n;
        const MCEstimate r = stat(ts, [](const TanakaTerms& t) { return tanaka_residual(t); });
        const double want = folded(0.0, 1.0) - folded(0.0, 1.0 + eps) + folded(0.0, eps);
        EXPECT_LT(std::abs(r.mean - want), 4.0 * r.std_error) << n;
    }
}

TEST(TanakaResidual, FouMeanVanishesOnceMollifierBiasIsRemoved) {
    const FouModel m{1.0};
    const Batch batch = solve_batch(m, 0.75, 2048, 4096, 14);
    const auto ts = terms_batch(m, batch, 0.75, 0.0, 64);
    // Same identity with f_n in place of |.|: exact in expectation at every n.
    const MCEstimate e = stat(ts, [](const TanakaTerms& t) {
        return t.mollified_increment - t.drift - t.trace_sigma_prime - t.trace_local;
    });
    EXPECT_LT(std::abs(e.mean), 4.0 * e.std_error) << e.mean << " +- " << e.std_error;
    // The |.| version carries E|X_1| - E f_n(X_1) > 0, of order sqrt(2 / (pi n)).
    const MCEstimate bias = stat(ts, [](const TanakaTerms& t) { return t.abs_increment - t.mollified_increment; });
    EXPECT_GT(bias.mean, 0.0);
    EXPECT_LT(bias.mean, std::sqrt(2.0 / (std::numbers::pi * 64.0)));
}

TEST(ConvexResidual, SingleAtomIsTanakaResidual) {
    const DossModel m = DossModel::a_plus_sin(2.0);
    const Batch batch = solve_batch(m, 0.75, 256, 3, 15);
    const KernelWeights w(batch.b[0].grid, HurstParam(0.75));
    const Coefficients c = coefficients_of(m);
    const std::vector<Atom> atoms{{0.0, 1.0}};
    for (std::size_t p = 0; p < 3; ++p) {
        const DerivativeField d = derivative_field(c, batch.x[p], batch.b[p]);
        const TanakaTerms t = decomposition_terms(batch.x[p], d, c, LevelX{0.0}, MollifierIndex(32), batch.b[p], w);
        EXPECT_NEAR(convex_residual(atoms, 0.0, 0.0, batch.x[p], d, c, MollifierIndex(32), batch.b[p], w), tanaka_residual(t), 1e-13);
    }
}

TEST(ConvexResidual, NegativeWeightRejected) {
    const Batch batch = solve_batch(FbmModel{}, 0.75, 64, 1, 16);
    const KernelWeights w(batch.b[0].grid, HurstParam(0.75));
    const Coefficients c = coefficients_of(FbmModel{});
    const DerivativeField d = derivative_field_exact(FbmModel{}, batch.x[0]);
    const std::vector<Atom> atoms{{0.0, 1.0}, {0.5, -0.1}};
    EXPECT_THROW(convex_residual(atoms, 0.0, 1.0, batch.x[0], d, c, MollifierIndex(4), batch.b[0], w), DomainError);
}

TEST(ConvexResidual, LinearPartHasZeroMean) {
    const DossModel m = DossModel::a_plus_sin(2.0);
    const Batch batch = solve_batch(m, 0.75, 1024, 2048, 17);
    const KernelWeights w(batch.b[0].grid, HurstParam(0.75));
    const Coefficients c = coefficients_of(m);
    std::vector<double> v;
    for (std::size_t p = 0; p < batch.b.size(); ++p) {
        const DerivativeField d = derivative_field_exact(m, batch.x[p]);
        v.push_back(convex_residual(std::span<const Atom>{}, 0.0, 1.0, batch.x[p], d, c, MollifierIndex(4), batch.b[p], w));
    }
    const MCEstimate e = estimate(v);
    EXPECT_LT(std::abs(e.mean), 4.0 * e.std_error) << e.mean << " +- " << e.std_error;
}

TEST(ConvexResidual, TwoAtomsMatchFoldedOracle) {
    const Batch batch = solve_batch(FbmModel{}, 0.75, 2048, 4096, 18);
    const TanakaAssembler asm_(KernelWeights(batch.b[0].grid, HurstParam(0.75)));
    const Coefficients c = coefficients_of(FbmModel{});
    const std::vector<Atom> atoms{{-0.5, 1.0}, {0.5, 1.0}};
    std::vector<double> v;
    for (std::size_t p = 0; p < batch.b.size(); ++p) {
        const PathContext ctx = asm_.prepare(batch.x[p], derivative_field_exact(FbmModel{}, batch.x[p]), c, batch.b[p]);
        v.push_back(convex_residual(atoms, 0.3, 0.0, asm_, ctx, MollifierIndex(64)));
    }
    const MCEstimate e = estimate(v);
    const double eps = 1.0 / 64.0;
    double want = 0.0;
    for (const Atom& a : atoms) want += folded(a.a, 1.0) - folded(a.a, 1.0 + eps) + folded(a.a, eps) - std::abs(a.a);
    EXPECT_LT(std::abs(e.mean - want), 4.0 * e.std_error) << e.mean << " vs " << want;
}

TEST(WeightedLocalTime, FarLevelIsNegligible) {
    const auto b = sample_fbm(TimeGrid(1.0, 512), HurstParam(0.75), 1, 19)[0];
    double top = 0.0;
    for (double v : b.values) top = std::max(top, std::abs(v));
    EXPECT_LT(weighted_local_time_fbm(b, HurstParam(0.75), LevelX{top + 5.0}, MollifierIndex(256)), 1e-100);
}

TEST(WeightedLocalTime, EnsembleMeanMatchesSmoothedOracle) {
    const double h = 0.75;
    const auto paths = sample_fbm(TimeGrid(2.0, 4096), HurstParam(h), 8192, 20);
    // E[2H int rho_eps(B_s) s^{2H-1} ds] = 2 (sqrt(t^{2H} + eps) - sqrt(eps)) / sqrt(2 pi)
    auto oracle = [&](double t, double eps) { return 2.0 * (std::sqrt(std::pow(t, 2 * h) + eps) - std::sqrt(eps)) / kSqrt2Pi; };
    for (long long n : {64, 4096}) {
        std::vector<double> one, two;
        for (const auto& b : paths) {
            two.push_back(weighted_local_time_fbm(b, HurstParam(h), LevelX{0.0}, MollifierIndex(n)));
            one.push_back(weighted_local_time_fbm(subsample_prefix(b, 2048), HurstParam(h), LevelX{0.0}, MollifierIndex(n)));
        }
        const MCEstimate e1 = estimate(one), e2 = estimate(two);
        const double eps = 1.0 / static_cast<double>(n);
        EXPECT_LT(std::abs(e1.mean - oracle(1.0, eps)), 4.0 * e1.std_error) << n;
        EXPECT_LT(std::abs(e2.mean - oracle(2.0, eps)), 4.0 * e2.std_error) << n;
        if (n == 4096) {
            EXPECT_LT(std::abs(e1.mean - 2.0 / kSqrt2Pi), 4.0 * e1.std_error);
            const double ratio = e2.mean / e1.mean;
            const double se = ratio * std::hypot(e1.std_error / e1.mean, e2.std_error / e2.mean);
            EXPECT_LT(std::abs(ratio - std::pow(2.0, h)), 4.0 * se) << ratio;
        }
    }
}

TEST(PathwiseResidual, TelescopesAwayFromLevel) {
    const Coefficients c = Coefficients::constant(0.0, 0.3);
    const auto b = sample_fbm(TimeGrid(1.0, 1024), HurstParam(0.75), 1, 21)[0];
    const SolutionPath x = solve_euler(c, 10.0, b);
    EXPECT_NEAR(pathwise_residual(x, c, LevelX{0.0}, b), 0.0, 1e-12);
    EXPECT_NEAR(pathwise_residual(x, c, LevelX{20.0}, b), 0.0, 1e-12);
}

TEST(PathwiseResidual, HolderDriftJointRefinement) {
    Coefficients c = Coefficients::constant(0.0, 1.0);
    c.b = [](double y) { return std::pow(std::abs(y), 0.8); };
    const auto fine = sample_fbm(TimeGrid(1.0, 4096), HurstParam(0.75), 256, 22);
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < 4; ++k) {
        const std::size_t factor = std::size_t{16} >> k;
        const long long n = 4LL << (2 * k);
        std::vector<double> sgn, moll;
        for (const auto& bf : fine) {
            const FbmPath b = subsample(bf, factor);
            const SolutionPath x = solve_euler(c, 0.0, b);
            sgn.push_back(std::abs(pathwise_residual(x, c, LevelX{0.0}, b)));
            moll.push_back(std::abs(pathwise_residual(x, c, LevelX{0.0}, b, MollifierIndex(n))));
        }
        const double m = estimate(sgn).mean;
        EXPECT_LT(m, prev) << k;
        prev = m;
        (void)moll;
    }
}

TEST(MollifiedSignGap, DecreasesAlongLadder) {
    const Coefficients c = coefficients_of(DossModel::a_plus_sin(2.0));
    const auto paths = sample_fbm(TimeGrid(1.0, 512), HurstParam(0.75), 40, 23);
    const double beta = default_beta(HurstParam(0.75));
    int good = 0;
    for (const auto& b : paths) {
        const SolutionPath x = solve_doss(DossModel::a_plus_sin(2.0), 0.0, b);
        double prev = std::numeric_limits<double>::infinity();
        bool ok = true;
        for (long long n : {4, 16, 64, 256}) {
            const double g = mollified_sign_gap(x, c, LevelX{0.0}, MollifierIndex(n), beta);
            ok = ok && g < prev;
            prev = g;
        }
        good += ok ? 1 : 0;
    }
    EXPECT_GE(good, 38);
}

TEST(ConventionTest, RoundTrip) {
    for (Convention c : {Convention::argument_at_s, Convention::argument_at_r}) EXPECT_EQ(convention_from_string(to_string(c)), c);
    EXPECT_THROW(convention_from_string("nowhere"), DomainError);
}
