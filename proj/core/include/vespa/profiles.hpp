#pragma once

#include "vespa/config.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace vespa
{

/// Measured baseline throughput of one accelerator (MB/s of input data) at the
/// reference operating point.
struct ThroughputTarget
{
    std::string name;
    double baseline_mbps = 0.0;
    /// Measured K=2 and K=4 throughput, used only for reporting scaling error.
    double k2_mbps = 0.0;
    double k4_mbps = 0.0;
};

/// Reference operating point of the throughput measurements: isolated tile in
/// slot A1, accelerator island 50 MHz, NoC+MEM island 100 MHz, no traffic
/// generators.
struct CalibrationTargets
{
    std::vector<ThroughputTarget> entries;
    FrequencyHz accel_hz = 50'000'000;
    FrequencyHz noc_hz = 100'000'000;

    const ThroughputTarget* find(std::string_view name) const;
};

/// Throughput column of the CHStone accelerator table (adpcm, dfadd, dfmul, dfsin, gsm).
const CalibrationTargets& chstone_targets();

/// Profile shape chosen before fitting: data volumes and burst size. The fit
/// only solves compute_cycles_per_item.
AcceleratorProfile profile_seed(std::string_view name);

/// Calibrated profiles shipped with the library (frozen output of
/// calibrate_profile over chstone_targets()).
const std::vector<AcceleratorProfile>& reference_profiles();
const AcceleratorProfile& reference_profile(std::string_view name);

std::vector<std::string> chstone_names();

} // namespace vespa
