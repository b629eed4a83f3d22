#include "fractanaka/grid.hpp"

#include <cmath>
#include <string>

#include "fractanaka/errors.hpp"

namespace fractanaka {

HurstParam::HurstParam(double h) : h_(h) {
    if (!(h > 0.5 && h < 1.0)) {
        throw DomainError("Hurst parameter must lie in (1/2, 1), got " + std::to_string(h));
    }
}

HurstParam HurstParam::brownian_for_testing() { return HurstParam(0.5, true); }

TimeGrid::TimeGrid(double horizon, std::size_t steps) : horizon_(horizon), steps_(steps) {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
        throw DomainError("grid horizon must be positive and finite");
    }
    if (steps == 0) throw DomainError("grid needs at least one step");
}

std::vector<double> TimeGrid::node_values() const {
    std::vector<double> t(nodes());
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = node(i);
    return t;
}

std::size_t TimeGrid::index_of(double t) const {
    const double pos = t / step();
    const double idx = std::round(pos);
    if (idx < 0.0 || idx > static_cast<double>(steps_) || std::abs(pos - idx) > 1e-9 * std::max(1.0, pos)) {
        throw DomainError("time " + std::to_string(t) + " is not a grid node");
    }
    return static_cast<std::size_t>(idx);
}

TimeGrid TimeGrid::coarsened(std::size_t factor) const {
    if (factor == 0 || steps_ % factor != 0) {
        throw DomainError("coarsening factor must divide the number of steps");
    }
    return TimeGrid(horizon_, steps_ / factor);
}

TimeGrid TimeGrid::truncated(std::size_t steps) const {
    if (steps == 0 || steps > steps_) throw DomainError("truncation outside the grid");
    return TimeGrid(node(steps), steps);
}

GridFunction::GridFunction(TimeGrid g, std::vector<double> v) : grid(g), values(std::move(v)) {
    if (values.size() != grid.nodes()) {
        throw DomainError("grid function needs one value per node");
    }
}

void require_same_grid(const TimeGrid& a, const TimeGrid& b, const char* what) {
    if (!(a == b)) throw DomainError(std::string(what) + ": grids differ");
}

}  // namespace fractanaka
