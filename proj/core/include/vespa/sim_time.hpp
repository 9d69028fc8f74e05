#pragma once

#include <compare>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace vespa
{

/// Thrown when a time computation leaves the 64-bit femtosecond range.
class SimTimeOverflow : public std::overflow_error
{
public:
    using std::overflow_error::overflow_error;
};

using FrequencyHz = std::uint64_t;

inline constexpr std::uint64_t kFemtosPerSecond = 1'000'000'000'000'000ULL;

/// Simulated time in femtoseconds since simulation start.
struct SimTime
{
    std::uint64_t fs = 0;

    constexpr auto operator<=>(const SimTime&) const = default;

    static constexpr SimTime zero() noexcept { return SimTime{0}; }
    static constexpr SimTime max() noexcept { return SimTime{std::numeric_limits<std::uint64_t>::max()}; }

    static constexpr SimTime from_ns(std::uint64_t ns) { return SimTime{ns * 1'000'000ULL}; }
    static constexpr SimTime from_us(std::uint64_t us) { return SimTime{us * 1'000'000'000ULL}; }
    static constexpr SimTime from_ms(std::uint64_t ms) { return SimTime{ms * 1'000'000'000'000ULL}; }

    double seconds() const noexcept { return static_cast<double>(fs) / static_cast<double>(kFemtosPerSecond); }
};

inline SimTime operator+(SimTime a, SimTime b)
{
    std::uint64_t out = 0;
    if (__builtin_add_overflow(a.fs, b.fs, &out))
    {
        throw SimTimeOverflow("simulated time overflow");
    }
    return SimTime{out};
}

inline SimTime operator-(SimTime a, SimTime b)
{
    if (b.fs > a.fs)
    {
        throw std::logic_error("negative simulated time difference");
    }
    return SimTime{a.fs - b.fs};
}

/// Time of rising edge `n` of a clock at `freq_hz` started at time zero:
/// round(n * 1e15 / freq_hz) femtoseconds with half-up rounding. Each call
/// derives the edge from the cycle index, so there is no accumulated drift.
SimTime cycle_edge_time(FrequencyHz freq_hz, std::uint64_t n);

/// Smallest cycle index n with cycle_edge_time(freq_hz, n) >= offset.
std::uint64_t first_edge_index_at_or_after(FrequencyHz freq_hz, SimTime offset);

std::string to_string(SimTime t);

} // namespace vespa
