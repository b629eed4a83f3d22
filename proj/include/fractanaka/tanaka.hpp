#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "fractanaka/malliavin.hpp"
#include "fractanaka/mollify.hpp"
#include "fractanaka/quad.hpp"
#include "fractanaka/sde.hpp"

namespace fractanaka {

/// Where f''_n and sigma' are evaluated inside the trace integrals.
///   argument_at_s: f'_n(X_s) sigma'(X_s) and f''_n(X_s) sigma(X_s) (chain rule of D_r[f'_n(X_s) sigma(X_s)])
///   argument_at_r: f'_n(X_s) sigma'(X_r) and f''_n(X_r) sigma(X_s)
enum class Convention { argument_at_s, argument_at_r };

std::string_view to_string(Convention c);
Convention convention_from_string(std::string_view s);

struct LevelX {
    double x = 0.0;
};

/// Terms of the Tanaka decomposition of |X_t - x| for one path, t = end of grid.
struct TanakaTerms {
    double abs_increment = 0.0;        // |X_t - x| - |X_0 - x|
    double mollified_increment = 0.0;  // f_n(X_t - x) - f_n(X_0 - x)
    double drift = 0.0;                // sum f'_n(X - x) b(X) dt
    double rs_total = 0.0;             // sum f'_n(X - x) sigma(X) dB
    double trace_sigma_prime = 0.0;
    double trace_local = 0.0;
    double skorokhod = 0.0;            // rs_total - trace_sigma_prime - trace_local

    // Same terms with f'_n replaced by sgn.
    double drift_sgn = 0.0;
    double rs_sgn = 0.0;
    double trace_sigma_prime_sgn = 0.0;

    LevelX level;
    MollifierIndex n{1};
    Convention convention = Convention::argument_at_s;
};

/// Per-path data that does not depend on (level, n, convention): coefficient
/// values along the path and the three kernel-weighted sums of D_r X_s
///   p[j] = sum_i m_ij d_ij w_ij,  q[j] = sum_i m_ij sigma'(X_i) d_ij w_ij,
///   r[i] = sum_j m_ij sigma(X_j) d_ij w_ij,
/// with m the adapted cell fraction (diagonal counts half).
struct PathContext {
    std::vector<double> x;      // N+1 nodes
    std::vector<double> b;      // b(X_i), i < N
    std::vector<double> sigma;  // sigma(X_i), i < N
    std::vector<double> sigma_prime;
    std::vector<double> db;     // B_{i+1} - B_i
    std::vector<double> p, q, r;
    double dt = 0.0;
    double alpha = 0.0;
};

/// Assembles TanakaTerms. Separable derivative fields go through FFT
/// convolutions (O(N log N) per path); dense fields through the direct
/// O(N^2) sums. The assembler is immutable and shareable across threads.
class TanakaAssembler {
public:
    explicit TanakaAssembler(const KernelWeights& weights);

    const KernelWeights& weights() const noexcept { return weights_; }

    PathContext prepare(const SolutionPath& x, const DerivativeField& d, const Coefficients& coeffs,
                        const FbmPath& driver) const;
    /// Same context built with the direct O(N^2) sums regardless of the field
    /// layout; a cross-check for prepare().
    PathContext prepare_dense(const SolutionPath& x, const DerivativeField& d, const Coefficients& coeffs,
                              const FbmPath& driver) const;

    TanakaTerms terms(const PathContext& ctx, LevelX level, MollifierIndex n, Convention convention) const;

private:
    PathContext base_context(const SolutionPath& x, const Coefficients& coeffs, const FbmPath& driver,
                             const DerivativeField& d) const;

    KernelWeights weights_;
    TriangularConvolver conv_;
};

TanakaTerms decomposition_terms(const SolutionPath& x_path, const DerivativeField& d, const Coefficients& coeffs,
                                LevelX level, MollifierIndex n, const FbmPath& driver, const KernelWeights& weights,
                                Convention convention = Convention::argument_at_s);

/// f_n(X_t - x) - f_n(X_0 - x) - drift - rs_total. Vanishes under grid
/// refinement at fixed n.
double mollified_identity_residual(const TanakaTerms& terms);

/// |X_t - x| - |X_0 - x| - drift_sgn - trace_sigma_prime_sgn - trace_local.
/// The Skorokhod integral of sgn(X - x) sigma(X) is omitted: it has zero mean,
/// so the ensemble mean of this residual tests the trace terms alone.
double tanaka_residual(const TanakaTerms& terms);

/// |X_t - x| - |X_0 - x| - int g(X - x) b(X) ds - int g(X - x) sigma(X) dB with
/// g = sgn, or g = f'_n when n is given. Both integrals are left-point sums.
double pathwise_residual(const SolutionPath& x_path, const Coefficients& coeffs, LevelX level,
                         const FbmPath& driver, std::optional<MollifierIndex> n = std::nullopt);

/// ||(f'_n(X - x) - sgn(X - x)) sigma(X)||_{2,beta} along the path.
double mollified_sign_gap(const SolutionPath& x_path, const Coefficients& coeffs, LevelX level, MollifierIndex n,
                          double beta);

struct Atom {
    double a;
    double w;
};

/// Residual of the Tanaka identity for f(y) = alpha + beta y + sum w_k |y - a_k|:
/// beta * (linear residual) + sum w_k tanaka_residual(level a_k). The linear
/// residual is X_t - X_0 - int b ds - trace with f' = 1 (Skorokhod part
/// omitted, as in tanaka_residual). Negative weights throw DomainError.
double convex_residual(std::span<const Atom> atoms, double alpha, double beta, const TanakaAssembler& assembler,
                       const PathContext& ctx, MollifierIndex n, Convention convention = Convention::argument_at_s);
double convex_residual(std::span<const Atom> atoms, double alpha, double beta, const SolutionPath& x_path,
                       const DerivativeField& d, const Coefficients& coeffs, MollifierIndex n,
                       const FbmPath& driver, const KernelWeights& weights,
                       Convention convention = Convention::argument_at_s);

/// 2H sum_i rho_{1/n}(B_i - x) t_i^{2H-1} dt over i < N.
double weighted_local_time_fbm(const FbmPath& b_path, HurstParam h, LevelX level, MollifierIndex n);

}  // namespace fractanaka
