#pragma once

#include <optional>
#include <vector>

#include "fractanaka/fbm.hpp"
#include "fractanaka/sde.hpp"

namespace fractanaka {

/// D_{t_i} X_{t_j} on the grid, zero for i > j, diagonal D_{t_i} X_{t_i} = sigma(X_{t_i}).
///
/// Every field produced by this library factorizes as row(i) * col(j) on
/// i <= j, and is kept in that form (O(N) memory). dense() materializes the
/// (N+1) x (N+1) matrix on request; from_dense() wraps an arbitrary field.
class DerivativeField {
public:
    static constexpr std::size_t kDenseLimit = 4096;

    static DerivativeField separable(TimeGrid grid, std::vector<double> row, std::vector<double> col);
    /// Entries with i > j are ignored (treated as 0).
    static DerivativeField from_dense(TimeGrid grid, SquareMatrix d);

    const TimeGrid& grid() const noexcept { return grid_; }
    bool is_separable() const noexcept { return !dense_.has_value(); }
    const std::vector<double>& row_factor() const noexcept { return row_; }
    const std::vector<double>& col_factor() const noexcept { return col_; }

    double operator()(std::size_t i, std::size_t j) const noexcept {
        if (i > j) return 0.0;
        return dense_ ? (*dense_)(i, j) : row_[i] * col_[j];
    }

    /// Full matrix; throws DomainError above kDenseLimit steps.
    SquareMatrix dense() const;

private:
    DerivativeField(TimeGrid grid) : grid_(grid) {}

    TimeGrid grid_;
    std::vector<double> row_;
    std::vector<double> col_;
    std::optional<SquareMatrix> dense_;
};

/// First-variation process J with J_0 = 1.
///
/// The drift part is a left-point sum of b'(X). The noise part uses the
/// pathwise chain rule  int sigma'(X) dB = log(sigma(X_s)/sigma(X_0)) - int (sigma'/sigma)(X) b(X) du
/// on steps where sigma keeps its sign away from 0, and the left-point
/// Young sum otherwise. Throws NumericalError when |log J| exceeds 700.
std::vector<double> first_variation(const Coefficients& coeffs, const SolutionPath& x, const FbmPath& driver);

/// d[i][j] = sigma(X_i) J_j / J_i for i <= j.
DerivativeField derivative_field(const Coefficients& coeffs, const SolutionPath& x, const FbmPath& driver);

/// Closed-form fields: FBM 1, FOU nu e^{-(s-r)}, DOSS sigma(X_s). CUSTOM
/// models throw DomainError.
DerivativeField derivative_field_exact(const ModelSpec& model, const SolutionPath& x);

/// Closed form when available, first variation otherwise.
DerivativeField derivative_field_for(const ModelSpec& model, const SolutionPath& x, const FbmPath& driver);

}  // namespace fractanaka
