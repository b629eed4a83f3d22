#pragma once

#include <cstddef>
#include <functional>

namespace fractanaka {

/// Number of OpenMP workers used by ensemble loops. Initialized from the
/// FRACTANAKA_WORKERS environment variable, else the OpenMP default.
/// Affects speed only; every result is independent of it.
int worker_count();
void set_worker_count(int workers);

/// Calls body(i) for i in [0, count) on worker_count() threads. If any call
/// throws, the exception of the lowest index is rethrown with "path i: "
/// prepended (NumericalError stays NumericalError, anything else becomes
/// DomainError), so the outcome does not depend on scheduling.
void for_each_path(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace fractanaka
