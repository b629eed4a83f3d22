#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace fractanaka {

/// Philox4x32-10 block function (Salmon et al., "Parallel random numbers: as
/// easy as 1, 2, 3"). Pure function of (counter, key).
struct Philox4x32 {
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter generate(Counter ctr, Key key) noexcept;
};

/// Standard normal draws addressed by (seed, stream, draw index). Stream is
/// the path index, so path p is the same whatever thread produces it.
class CounterNormalStream {
public:
    CounterNormalStream(std::uint64_t seed, std::uint64_t stream) noexcept;

    /// Draw number `index` of this stream.
    double normal(std::uint64_t index) const noexcept;
    /// out[k] = normal(first + k).
    void fill(std::span<double> out, std::uint64_t first = 0) const noexcept;

private:
    std::array<double, 2> pair(std::uint64_t block) const noexcept;

    Philox4x32::Key key_;
    std::uint64_t stream_;
};

}  // namespace fractanaka
