#include "vespa/profiles.hpp"

#include <stdexcept>

namespace vespa
{

const ThroughputTarget* CalibrationTargets::find(std::string_view name) const
{
    for (const auto& e : entries)
    {
        if (e.name == name)
        {
            return &e;
        }
    }
    return nullptr;
}

const CalibrationTargets& chstone_targets()
{
    static const CalibrationTargets targets{{
        {"adpcm", 1.40, 2.76, 5.41},
        {"dfadd", 9.22, 16.88, 26.06},
        {"dfmul", 8.70, 15.07, 26.06},
        {"dfsin", 0.33, 0.65, 1.24},
        {"gsm", 4.61, 8.90, 16.67},
    }};
    return targets;
}

std::vector<std::string> chstone_names()
{
    std::vector<std::string> out;
    for (const auto& e : chstone_targets().entries)
    {
        out.push_back(e.name);
    }
    return out;
}

// Data volumes follow the kernels' natural record sizes: two IEEE doubles in,
// one out for the soft-float kernels; 16-bit PCM in and packed codes out for
// adpcm; one 160-sample frame in and one encoded frame out for gsm.
AcceleratorProfile profile_seed(std::string_view name)
{
    AcceleratorProfile p;
    p.name = std::string(name);
    if (name == "adpcm")
    {
        p.items_per_invocation = 256;
        p.bytes_read_per_item = 8;
        p.bytes_written_per_item = 2;
        p.burst_bytes = 256;
        p.boundedness = Boundedness::ComputeBound;
    }
    else if (name == "dfadd" || name == "dfmul")
    {
        p.items_per_invocation = 64;
        p.bytes_read_per_item = 16;
        p.bytes_written_per_item = 8;
        p.burst_bytes = 16;
        p.boundedness = Boundedness::MemoryBound;
    }
    else if (name == "dfsin")
    {
        p.items_per_invocation = 64;
        p.bytes_read_per_item = 8;
        p.bytes_written_per_item = 8;
        p.burst_bytes = 64;
        p.boundedness = Boundedness::ComputeBound;
    }
    else if (name == "gsm")
    {
        p.items_per_invocation = 16;
        p.bytes_read_per_item = 320;
        p.bytes_written_per_item = 33;
        p.burst_bytes = 320;
        p.boundedness = Boundedness::ComputeBound;
    }
    else
    {
        throw std::invalid_argument("unknown accelerator '" + std::string(name) + "'");
    }
    p.compute_cycles_per_item = 1;
    return p;
}

const std::vector<AcceleratorProfile>& reference_profiles()
{
    static const std::vector<AcceleratorProfile> profiles = [] {
        // compute_cycles_per_item values produced by `vespa-sim calibrate`.
        const std::pair<const char*, std::uint64_t> fitted[] = {
            {"adpcm", 278}, {"dfadd", 54}, {"dfmul", 59}, {"dfsin", 1199}, {"gsm", 3210},
        };
        std::vector<AcceleratorProfile> out;
        for (const auto& [name, cycles] : fitted)
        {
            AcceleratorProfile p = profile_seed(name);
            p.compute_cycles_per_item = cycles;
            out.push_back(p);
        }
        return out;
    }();
    return profiles;
}

const AcceleratorProfile& reference_profile(std::string_view name)
{
    for (const auto& p : reference_profiles())
    {
        if (p.name == name)
        {
            return p;
        }
    }
    throw std::invalid_argument("unknown accelerator '" + std::string(name) + "'");
}

} // namespace vespa
