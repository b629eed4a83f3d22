#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fractanaka {

/// Violated precondition or argument outside its domain.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Breakdown of a numerical procedure (non-finite state, failed bracket, ...).
class NumericalError : public std::runtime_error {
public:
    static constexpr std::ptrdiff_t kNoStep = -1;

    explicit NumericalError(const std::string& what, std::ptrdiff_t step = kNoStep)
        : std::runtime_error(step == kNoStep ? what : what + " (step " + std::to_string(step) + ")"),
          step_(step) {}

    std::ptrdiff_t step() const noexcept { return step_; }

private:
    std::ptrdiff_t step_;
};

}  // namespace fractanaka
