#include "vespa/sim_time.hpp"

namespace vespa
{

namespace
{
__extension__ typedef unsigned __int128 u128;
}

SimTime cycle_edge_time(FrequencyHz freq_hz, std::uint64_t n)
{
    if (freq_hz == 0)
    {
        throw std::invalid_argument("cycle_edge_time: frequency must be positive");
    }
    // round-half-up(n * 1e15 / f) == floor((2 * n * 1e15 + f) / (2 * f))
    const u128 num = u128{2} * u128{n} * u128{kFemtosPerSecond} + u128{freq_hz};
    const u128 q = num / (u128{2} * u128{freq_hz});
    if (q > u128{std::numeric_limits<std::uint64_t>::max()})
    {
        throw SimTimeOverflow("cycle_edge_time: edge beyond 2^64 fs");
    }
    return SimTime{static_cast<std::uint64_t>(q)};
}

std::uint64_t first_edge_index_at_or_after(FrequencyHz freq_hz, SimTime offset)
{
    if (freq_hz == 0)
    {
        throw std::invalid_argument("first_edge_index_at_or_after: frequency must be positive");
    }
    // Estimate from the unrounded inverse, then correct for rounding.
    const u128 approx = u128{offset.fs} * u128{freq_hz} / u128{kFemtosPerSecond};
    std::uint64_t n = static_cast<std::uint64_t>(approx);
    n = n > 1 ? n - 1 : 0;
    while (cycle_edge_time(freq_hz, n) < offset)
    {
        ++n;
    }
    return n;
}

std::string to_string(SimTime t)
{
    return std::to_string(t.fs) + " fs";
}

} // namespace vespa
