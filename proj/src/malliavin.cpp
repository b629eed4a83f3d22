#include "fractanaka/malliavin.hpp"

#include <cmath>

#include "fractanaka/errors.hpp"

namespace fractanaka {

DerivativeField DerivativeField::separable(TimeGrid grid, std::vector<double> row, std::vector<double> col) {
    if (row.size() != grid.nodes() || col.size() != grid.nodes()) {
        throw DomainError("derivative field factors need one value per node");
    }
    for (std::size_t k = 0; k < row.size(); ++k) {
        if (!std::isfinite(row[k]) || !std::isfinite(col[k])) throw NumericalError("non-finite derivative field", static_cast<std::ptrdiff_t>(k));
    }
    DerivativeField f(grid);
    f.row_ = std::move(row);
    f.col_ = std::move(col);
    return f;
}

DerivativeField DerivativeField::from_dense(TimeGrid grid, SquareMatrix d) {
    if (d.size() != grid.nodes()) throw DomainError("dense derivative field must be (N+1) x (N+1)");
    for (std::size_t i = 0; i < d.size(); ++i) {
        for (std::size_t j = 0; j < d.size(); ++j) {
            if (i > j) {
                d(i, j) = 0.0;
            } else if (!std::isfinite(d(i, j))) {
                throw NumericalError("non-finite derivative field entry", static_cast<std::ptrdiff_t>(j));
            }
        }
    }
    DerivativeField f(grid);
    f.dense_ = std::move(d);
    return f;
}

SquareMatrix DerivativeField::dense() const {
    if (dense_) return *dense_;
    if (grid_.steps() > kDenseLimit) throw DomainError("derivative field too large to materialize");
    const std::size_t n = grid_.nodes();
    SquareMatrix d(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) d(i, j) = row_[i] * col_[j];
    }
    return d;
}

std::vector<double> first_variation(const Coefficients& coeffs, const SolutionPath& x, const FbmPath& driver) {
    require_same_grid(x.grid, driver.grid, "first_variation");
    const double dt = x.grid.step();
    const std::size_t n = x.grid.steps();
    std::vector<double> j(n + 1);
    j[0] = 1.0;
    double log_j = 0.0;
    double sig = coeffs.sigma(x.values[0]);
    for (std::size_t i = 0; i < n; ++i) {
        const double xi = x.values[i];
        const double sig_next = coeffs.sigma(x.values[i + 1]);
        const double sp = coeffs.sigma_prime(xi);
        double noise;
        if (sp == 0.0) {
            noise = 0.0;
        } else if (sig * sig_next > 0.0 && std::min(std::abs(sig), std::abs(sig_next)) > 1e-8) {
            noise = std::log(sig_next / sig) - sp / sig * coeffs.b(xi) * dt;
        } else {
            noise = sp * (driver.values[i + 1] - driver.values[i]);
        }
        log_j += coeffs.b_prime(xi) * dt + noise;
        if (!std::isfinite(log_j) || std::abs(log_j) > 700.0) {
            throw NumericalError("first variation exponent overflow", static_cast<std::ptrdiff_t>(i + 1));
        }
        j[i + 1] = std::exp(log_j);
        sig = sig_next;
    }
    return j;
}

DerivativeField derivative_field(const Coefficients& coeffs, const SolutionPath& x, const FbmPath& driver) {
    std::vector<double> col = first_variation(coeffs, x, driver);
    std::vector<double> row(col.size());
    for (std::size_t i = 0; i < row.size(); ++i) row[i] = coeffs.sigma(x.values[i]) / col[i];
    return DerivativeField::separable(x.grid, std::move(row), std::move(col));
}

DerivativeField derivative_field_exact(const ModelSpec& model, const SolutionPath& x) {
    const TimeGrid& grid = x.grid;
    const std::size_t n = grid.nodes();
    std::vector<double> row(n, 1.0), col(n, 1.0);
    if (std::holds_alternative<FbmModel>(model)) {
        // 1_{r <= s}
    } else if (const auto* fou = std::get_if<FouModel>(&model)) {
        for (std::size_t i = 0; i < n; ++i) {
            row[i] = fou->nu * std::exp(grid.node(i));
            col[i] = std::exp(-grid.node(i));
        }
    } else if (const auto* doss = std::get_if<DossModel>(&model)) {
        for (std::size_t i = 0; i < n; ++i) col[i] = doss->sigma(x.values[i]);
    } else {
        throw DomainError("no closed-form derivative field for a custom model");
    }
    return DerivativeField::separable(grid, std::move(row), std::move(col));
}

DerivativeField derivative_field_for(const ModelSpec& model, const SolutionPath& x, const FbmPath& driver) {
    if (std::holds_alternative<CustomModel>(model)) return derivative_field(coefficients_of(model), x, driver);
    return derivative_field_exact(model, x);
}

}  // namespace fractanaka
