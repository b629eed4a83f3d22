#include "fractanaka/parallel.hpp"

#include <omp.h>

#include <atomic>
#include <charconv>
#include <cstdlib>
#include <cstring>
#include <optional>
#include <string>
#include <vector>

#include "fractanaka/errors.hpp"

namespace fractanaka {

namespace {
int from_environment() {
    const char* env = std::getenv("FRACTANAKA_WORKERS");
    if (env != nullptr) {
        int v = 0;
        auto [ptr, ec] = std::from_chars(env, env + std::strlen(env), v);
        if (ec == std::errc() && v > 0) return v;
    }
    return omp_get_max_threads();
}

std::atomic<int>& workers() {
    static std::atomic<int> w{from_environment()};
    return w;
}
}  // namespace

int worker_count() { return workers().load(); }

void set_worker_count(int w) { workers().store(w > 0 ? w : 1); }

void for_each_path(std::size_t count, const std::function<void(std::size_t)>& body) {
    struct Failure {
        bool numerical;
        std::string message;
    };
    std::vector<std::optional<Failure>> failures(count);
    const auto total = static_cast<std::ptrdiff_t>(count);
#pragma omp parallel for schedule(dynamic, 16) num_threads(worker_count())
    for (std::ptrdiff_t p = 0; p < total; ++p) {
        const auto idx = static_cast<std::size_t>(p);
        try {
            body(idx);
        } catch (const NumericalError& e) {
            failures[idx] = Failure{true, e.what()};
        } catch (const std::exception& e) {
            failures[idx] = Failure{false, e.what()};
        }
    }
    for (std::size_t p = 0; p < count; ++p) {
        if (!failures[p]) continue;
        const std::string msg = "path " + std::to_string(p) + ": " + failures[p]->message;
        if (failures[p]->numerical) throw NumericalError(msg);
        throw DomainError(msg);
    }
}

}  // namespace fractanaka
