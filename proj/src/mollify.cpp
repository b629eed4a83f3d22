#include "fractanaka/mollify.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "fractanaka/errors.hpp"

namespace fractanaka {

MollifierIndex::MollifierIndex(long long n) : n_(n) {
    if (n < 1) throw DomainError("mollifier index must be >= 1, got " + std::to_string(n));
}

double gaussian_kernel(double eps, double u) {
    return std::exp(-0.5 * u * u / eps) / std::sqrt(2.0 * std::numbers::pi * eps);
}

double sign(double u) noexcept { return u > 0.0 ? 1.0 : (u < 0.0 ? -1.0 : 0.0); }

double mollified_sign(MollifierIndex n, double u) {
    return std::erf(u * std::sqrt(0.5 * static_cast<double>(n.value())));
}

double mollified_delta2(MollifierIndex n, double u) { return 2.0 * gaussian_kernel(n.epsilon(), u); }

double mollified_abs(MollifierIndex n, double u) {
    const double nd = static_cast<double>(n.value());
    const double rho0 = std::sqrt(nd / (2.0 * std::numbers::pi));
    return u * mollified_sign(n, u) + (2.0 / nd) * rho0 * std::expm1(-0.5 * nd * u * u);
}

MollifierValue mollifier_eval(MollifierIndex n, double z, double x) {
    const double u = z - x;
    return {mollified_abs(n, u), mollified_sign(n, u), mollified_delta2(n, u)};
}

}  // namespace fractanaka
