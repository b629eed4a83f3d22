#include "fractanaka/sde.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <numbers>

#include "fractanaka/errors.hpp"

namespace fractanaka {

Coefficients Coefficients::constant(double drift, double diffusion) {
    return {[drift](double) { return drift; }, [](double) { return 0.0; },
            [diffusion](double) { return diffusion; }, [](double) { return 0.0; }};
}

DossModel DossModel::constant(double c) {
    if (c == 0.0 || !std::isfinite(c)) throw DomainError("Doss model needs a nonzero constant diffusion");
    return {[c](double) { return c; }, [](double) { return 0.0; }, [c](double x) { return x / c; }};
}

DossModel DossModel::a_plus_sin(double a) {
    if (!(a > 1.0)) throw DomainError("sigma = a + sin x is bounded away from 0 only for a > 1");
    const double c = std::sqrt(a * a - 1.0);
    const double period = 2.0 * std::numbers::pi / c;
    // G' = 1 / (a + sin y) on (-pi, pi).
    auto g = [a, c](double y) { return (2.0 / c) * std::atan((a * std::tan(0.5 * y) + 1.0) / c); };
    const double g0 = g(0.0);
    auto lambda = [=](double x) {
        const double k = std::floor((x + std::numbers::pi) / (2.0 * std::numbers::pi));
        const double y = x - 2.0 * std::numbers::pi * k;
        const double gy = y <= -std::numbers::pi ? -std::numbers::pi / c : g(y);
        return k * period + gy - g0;
    };
    return {[a](double x) { return a + std::sin(x); }, [](double x) { return std::cos(x); }, lambda};
}

double DossModel::Lambda(double x) const {
    if (lambda) return lambda(x);
    auto inv = [this](double y) { return 1.0 / sigma(y); };
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(inv, 0.0, x, 15, 1e-14);
}

Coefficients coefficients_of(const ModelSpec& model) {
    struct Visitor {
        Coefficients operator()(const FbmModel&) const { return Coefficients::constant(0.0, 1.0); }
        Coefficients operator()(const FouModel& m) const {
            const double nu = m.nu;
            return {[](double x) { return -x; }, [](double) { return -1.0; }, [nu](double) { return nu; },
                    [](double) { return 0.0; }};
        }
        Coefficients operator()(const DossModel& m) const {
            return {[](double) { return 0.0; }, [](double) { return 0.0; }, m.sigma, m.sigma_prime};
        }
        Coefficients operator()(const CustomModel& m) const { return m.coeffs; }
    };
    return std::visit(Visitor{}, model);
}

SolutionPath::SolutionPath(TimeGrid g, std::vector<double> v) : grid(g), values(std::move(v)) {
    if (values.size() != grid.nodes()) throw DomainError("solution path needs one value per node");
    x0 = values[0];
}

SolutionPath solve_euler(const Coefficients& coeffs, double x0, const FbmPath& driver) {
    const TimeGrid& grid = driver.grid;
    const double dt = grid.step();
    std::vector<double> x(grid.nodes());
    x[0] = x0;
    if (!std::isfinite(x0)) throw NumericalError("non-finite initial condition", 0);
    for (std::size_t i = 0; i < grid.steps(); ++i) {
        const double dB = driver.values[i + 1] - driver.values[i];
        x[i + 1] = x[i] + coeffs.b(x[i]) * dt + coeffs.sigma(x[i]) * dB;
        if (!std::isfinite(x[i + 1])) {
            throw NumericalError("Euler-Young state became non-finite", static_cast<std::ptrdiff_t>(i + 1));
        }
    }
    return SolutionPath(grid, std::move(x));
}

SolutionPath solve_fou(double nu, double x0, const FbmPath& driver) {
    const TimeGrid& grid = driver.grid;
    const double dt = grid.step();
    const double decay = std::exp(-dt);
    const double gain = nu * (-std::expm1(-dt)) / dt;
    std::vector<double> x(grid.nodes());
    x[0] = x0;
    for (std::size_t i = 0; i < grid.steps(); ++i) {
        x[i + 1] = decay * x[i] + gain * (driver.values[i + 1] - driver.values[i]);
    }
    return SolutionPath(grid, std::move(x));
}

namespace {

constexpr double kRootTolerance = 1e-12;

// Solves Lambda(x) = target for increasing Lambda with Lambda' = 1/sigma.
double invert_lambda(const DossModel& m, double target, double start, std::size_t step) {
    double f_start = m.Lambda(start) - target;
    if (std::abs(f_start) <= kRootTolerance) return start;
    // Geometric bracket expansion from the previous state.
    double lo = start, hi = start, flo = f_start, fhi = f_start;
    double width = std::max(1e-3, std::abs(f_start * m.sigma(start)));
    bool bracketed = false;
    for (int k = 0; k < 200 && !bracketed; ++k, width *= 2.0) {
        if (f_start < 0.0) {
            lo = hi;
            flo = fhi;
            hi = start + width;
            fhi = m.Lambda(hi) - target;
            bracketed = fhi >= 0.0;
        } else {
            hi = lo;
            fhi = flo;
            lo = start - width;
            flo = m.Lambda(lo) - target;
            bracketed = flo <= 0.0;
        }
        if (!std::isfinite(lo) || !std::isfinite(hi)) break;
    }
    if (!bracketed) {
        throw NumericalError("Doss root finder could not bracket Lambda^{-1}", static_cast<std::ptrdiff_t>(step));
    }
    double x = std::abs(flo) < std::abs(fhi) ? lo : hi;
    double fx = x == lo ? flo : fhi;
    for (int it = 0; it < 200; ++it) {
        if (std::abs(fx) <= kRootTolerance) return x;
        double next = x - fx * m.sigma(x);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        const double fn = m.Lambda(next) - target;
        if (fn < 0.0) {
            lo = next;
        } else {
            hi = next;
        }
        x = next;
        fx = fn;
        if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x))) break;
    }
    if (std::abs(fx) > kRootTolerance) {
        throw NumericalError("Doss root finder did not reach tolerance", static_cast<std::ptrdiff_t>(step));
    }
    return x;
}

}  // namespace

SolutionPath solve_doss(const DossModel& model, double x0, const FbmPath& driver) {
    const TimeGrid& grid = driver.grid;
    const double base = model.Lambda(x0);
    std::vector<double> x(grid.nodes());
    x[0] = x0;
    for (std::size_t i = 1; i < grid.nodes(); ++i) {
        x[i] = invert_lambda(model, driver.values[i] + base, x[i - 1], i);
    }
    return SolutionPath(grid, std::move(x));
}

SolutionPath solve_model(const ModelSpec& model, double x0, const FbmPath& driver) {
    struct Visitor {
        double x0;
        const FbmPath& driver;
        SolutionPath operator()(const FbmModel&) const {
            std::vector<double> v(driver.values);
            for (double& e : v) e += x0;
            return SolutionPath(driver.grid, std::move(v));
        }
        SolutionPath operator()(const FouModel& m) const { return solve_fou(m.nu, x0, driver); }
        SolutionPath operator()(const DossModel& m) const { return solve_doss(m, x0, driver); }
        SolutionPath operator()(const CustomModel& m) const { return solve_euler(m.coeffs, x0, driver); }
    };
    return std::visit(Visitor{x0, driver}, model);
}

HolderEstimate holder_estimate(const TimeGrid& grid, std::span<const double> values) {
    const std::size_t n = grid.steps();
    if (n < 2) throw DomainError("holder_estimate needs at least two steps");
    if (values.size() != grid.nodes()) throw DomainError("holder_estimate: length mismatch");
    std::vector<double> lx, ly;
    bool any_motion = false;
    // Max increment inside blocks of kBlock lags, averaged over blocks. A fixed
    // window count per block keeps the sqrt(log) factor of a global max from
    // leaking into the slope.
    constexpr std::size_t kBlock = 16;
    const std::size_t top = std::max<std::size_t>(2, n / kBlock);
    for (std::size_t lag = 1; lag <= top; lag *= 2) {
        const std::size_t span = std::min(n, kBlock * lag);
        double total = 0.0;
        std::size_t blocks = 0;
        for (std::size_t start = 0; start + span <= n; start += span, ++blocks) {
            double m = 0.0;
            for (std::size_t i = start; i + lag <= start + span; ++i) m = std::max(m, std::abs(values[i + lag] - values[i]));
            total += m;
        }
        const double m = total / static_cast<double>(blocks);
        if (m > 0.0) {
            any_motion = true;
            lx.push_back(std::log(static_cast<double>(lag) * grid.step()));
            ly.push_back(std::log(m));
        }
    }
    if (!any_motion) return {std::numeric_limits<double>::infinity(), true};
    if (lx.size() < 2) return {std::numeric_limits<double>::infinity(), true};
    double mx = 0.0, my = 0.0;
    for (std::size_t k = 0; k < lx.size(); ++k) {
        mx += lx[k];
        my += ly[k];
    }
    mx /= static_cast<double>(lx.size());
    my /= static_cast<double>(lx.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t k = 0; k < lx.size(); ++k) {
        sxy += (lx[k] - mx) * (ly[k] - my);
        sxx += (lx[k] - mx) * (lx[k] - mx);
    }
    return {sxy / sxx, false};
}

HolderEstimate holder_estimate(const SolutionPath& path) { return holder_estimate(path.grid, path.values); }
HolderEstimate holder_estimate(const FbmPath& path) { return holder_estimate(path.grid, path.values); }

}  // namespace fractanaka
