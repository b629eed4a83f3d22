#pragma once

#include <functional>
#include <span>
#include <variant>
#include <vector>

#include "fractanaka/fbm.hpp"
#include "fractanaka/grid.hpp"

namespace fractanaka {

using ScalarFn = std::function<double(double)>;

/// dX = b(X) dt + sigma(X) dB^H, with user-supplied derivatives.
struct Coefficients {
    ScalarFn b;
    ScalarFn b_prime;
    ScalarFn sigma;
    ScalarFn sigma_prime;

    static Coefficients constant(double drift, double diffusion);
};

struct FbmModel {};

struct FouModel {
    double nu = 1.0;
};

/// dX = sigma(X) dB^H solved through Lambda(x) = int_0^x dy / sigma(y).
struct DossModel {
    ScalarFn sigma;
    ScalarFn sigma_prime;
    /// Closed-form Lambda; numerical quadrature of 1/sigma when empty.
    ScalarFn lambda;

    /// sigma = c (constant, nonzero).
    static DossModel constant(double c);
    /// sigma(x) = a + sin x, a > 1, with Lambda in closed form.
    static DossModel a_plus_sin(double a);

    double Lambda(double x) const;
};

struct CustomModel {
    Coefficients coeffs;
};

using ModelSpec = std::variant<FbmModel, FouModel, DossModel, CustomModel>;

Coefficients coefficients_of(const ModelSpec& model);

struct SolutionPath {
    TimeGrid grid;
    std::vector<double> values;
    double x0;

    SolutionPath(TimeGrid g, std::vector<double> v);
};

/// Left-point Euler-Young scheme. Throws NumericalError naming the step at
/// which the state leaves the finite range.
SolutionPath solve_euler(const Coefficients& coeffs, double x0, const FbmPath& driver);

/// Ornstein-Uhlenbeck b = -x, sigma = nu with exact exponential weights per
/// step (driver linear within each step).
SolutionPath solve_fou(double nu, double x0, const FbmPath& driver);

/// X_i = Lambda^{-1}(B_i + Lambda(x0)), root-found to 1e-12 in Lambda.
SolutionPath solve_doss(const DossModel& model, double x0, const FbmPath& driver);

/// Dispatch on the model: exact solvers for FBM, FOU and DOSS, Euler for CUSTOM.
SolutionPath solve_model(const ModelSpec& model, double x0, const FbmPath& driver);

struct HolderEstimate {
    double exponent;
    bool degenerate;  // constant path; exponent is +infinity
};

/// Slope of log(max increment at lag l) against log(l dt) over dyadic lags.
HolderEstimate holder_estimate(const TimeGrid& grid, std::span<const double> values);
HolderEstimate holder_estimate(const SolutionPath& path);
HolderEstimate holder_estimate(const FbmPath& path);

}  // namespace fractanaka
