#include "vespa/calibration.hpp"

#include "vespa/soc.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace vespa
{

BaselineRun measure_baseline(const AcceleratorProfile& profile, std::uint32_t k, const CalibrationTargets& targets,
                             std::uint64_t budget_bytes)
{
    SoCDescription d = reference_testbed();
    auto it = std::find_if(d.profiles.begin(), d.profiles.end(),
                           [&](const AcceleratorProfile& p) { return p.name == profile.name; });
    if (it == d.profiles.end())
    {
        d.profiles.push_back(profile);
    }
    else
    {
        *it = profile;
    }
    TileSpec& a1 = d.tile_at(testbed::kA1Pos);
    a1.accel = profile.name;
    a1.replication = k;
    a1.enabled_at_start = true;
    d.island(testbed::kA1).clock.freq_hz = targets.accel_hz;
    d.island(testbed::kNocMem).clock.freq_hz = targets.noc_hz;

    SocOptions opts;
    opts.accel_budget_bytes = budget_bytes;
    Soc soc(d, opts);
    soc.start_accelerators(SimTime::zero());
    if (!soc.run_to_completion(SimTime::from_ms(60'000)))
    {
        throw SimulationFault("baseline run of '" + profile.name + "' did not complete");
    }
    BaselineRun out;
    out.throughput_mbps = soc.mra(testbed::kA1Pos)->throughput_mbps();
    out.mean_rtt_ns = soc.tile(testbed::kA1Pos).counters().rtt_mean_fs() / 1e6;
    out.elapsed = soc.kernel().now();
    return out;
}

AcceleratorProfile calibrate_profile(std::string_view name, const CalibrationTargets& targets)
{
    AcceleratorProfile p = profile_seed(name);
    const ThroughputTarget* target = targets.find(name);
    if (target == nullptr)
    {
        throw std::invalid_argument("no throughput target for accelerator '" + std::string(name) + "'");
    }
    if (!(target->baseline_mbps > 0.0))
    {
        throw CalibrationError("throughput target for '" + std::string(name) + "' must be positive");
    }

    const double f = static_cast<double>(targets.accel_hz);
    const double bytes = static_cast<double>(p.bytes_read_per_item);

    p.compute_cycles_per_item = 1;
    const double probe = measure_baseline(p, 1, targets).throughput_mbps;
    const double t_probe = bytes / (probe * 1e6);
    const double t_target = bytes / (target->baseline_mbps * 1e6);
    const double estimate = 1.0 + (t_target - t_probe) * f;
    if (estimate < 1.0)
    {
        throw CalibrationError("target " + std::to_string(target->baseline_mbps) + " MB/s for '" + std::string(name) +
                               "' needs fewer than one compute cycle per item");
    }

    auto error_at = [&](std::uint64_t c) {
        AcceleratorProfile q = p;
        q.compute_cycles_per_item = c;
        return std::abs(measure_baseline(q, 1, targets).throughput_mbps - target->baseline_mbps);
    };

    std::uint64_t best = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(estimate)));
    double best_err = error_at(best);
    for (const int dir : {-1, +1})
    {
        std::uint64_t c = best;
        while (true)
        {
            if (dir < 0 && c == 1)
            {
                break;
            }
            c = dir < 0 ? c - 1 : c + 1;
            const double err = error_at(c);
            if (err >= best_err)
            {
                break;
            }
            best = c;
            best_err = err;
        }
    }
    p.compute_cycles_per_item = best;
    return p;
}

} // namespace vespa
