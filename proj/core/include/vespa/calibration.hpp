#pragma once

#include "vespa/config.hpp"
#include "vespa/profiles.hpp"

#include <stdexcept>
#include <string_view>

namespace vespa
{

class CalibrationError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Work size used for calibration runs and baseline measurements.
inline constexpr std::uint64_t kCalibrationBudgetBytes = 64 * 1024;

struct BaselineRun
{
    double throughput_mbps = 0.0;
    double mean_rtt_ns = 0.0;
    SimTime elapsed;
};

/// Runs `profile` with K replicas alone in slot A1 of the testbed at the
/// operating point of `targets`, over `budget_bytes` of input.
BaselineRun measure_baseline(const AcceleratorProfile& profile, std::uint32_t k, const CalibrationTargets& targets,
                             std::uint64_t budget_bytes = kCalibrationBudgetBytes);

/// Fits compute_cycles_per_item of the seed profile for `name`.
///
/// The chunk period of an isolated single-replica tile is affine in the
/// compute cycles: T(c) = T0 + c * items_per_chunk / f_accel. One probe run
/// at c = 1 gives T0, the target inverts to a first estimate, and a local
/// integer search on simulated throughput settles the result.
///
/// Throws std::invalid_argument for an unknown name and CalibrationError
/// when the target would need fewer than one cycle per item.
AcceleratorProfile calibrate_profile(std::string_view name, const CalibrationTargets& targets);

} // namespace vespa
