#pragma once

#include "vespa/clocking.hpp"
#include "vespa/sim_time.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

namespace vespa
{

enum class Statistic : std::uint8_t
{
    ExecTime = 0,
    PktsIn = 1,
    PktsOut = 2,
    Rtt = 3,
};

/// The four monitored statistics of one tile. exec_time is driven by the
/// tile itself (reset at invocation start, frozen at completion); the other
/// three only reset on an explicit command.
class TileCounters
{
public:
    std::uint64_t exec_time() const noexcept { return exec_time_; }
    std::uint64_t pkts_in() const noexcept { return pkts_in_; }
    std::uint64_t pkts_out() const noexcept { return pkts_out_; }
    std::uint64_t rtt_sum_fs() const noexcept { return rtt_sum_; }
    std::uint64_t rtt_count() const noexcept { return rtt_count_; }
    std::uint64_t rtt_last_fs() const noexcept { return rtt_last_; }
    bool exec_running() const noexcept { return exec_running_; }
    /// Mean RTT in fs (0 when no sample).
    double rtt_mean_fs() const noexcept;

    bool enabled(Statistic s) const noexcept { return enables_[static_cast<std::size_t>(s)]; }
    void set_enabled(Statistic s, bool on) noexcept { enables_[static_cast<std::size_t>(s)] = on; }
    std::uint32_t enable_mask() const noexcept;
    void set_enable_mask(std::uint32_t mask) noexcept;

    void count_in() noexcept;
    void count_out() noexcept;
    void record_rtt(SimTime request_issue, SimTime data_arrival);
    void exec_start() noexcept;
    /// Freezes the execution-time counter at `cycles` accelerator cycles.
    void exec_stop(std::uint64_t cycles) noexcept;
    void reset_manual() noexcept;

private:
    std::uint64_t exec_time_ = 0;
    std::uint64_t pkts_in_ = 0;
    std::uint64_t pkts_out_ = 0;
    std::uint64_t rtt_sum_ = 0;
    std::uint64_t rtt_count_ = 0;
    std::uint64_t rtt_last_ = 0;
    bool exec_running_ = false;
    std::array<bool, 4> enables_{true, true, true, true};
};

class UnmappedAddress : public std::out_of_range
{
public:
    using std::out_of_range::out_of_range;
};

/// Fixed register layout; see docs/register-map.md.
namespace regs
{
inline constexpr std::uint32_t kFreqBase = 0x0100;
inline constexpr std::uint32_t kStatusBase = 0x0200;
inline constexpr std::uint32_t kTileBase = 0x1000;
inline constexpr std::uint32_t kTileStride = 0x20;

inline constexpr std::uint32_t kExecTime = 0x00;
inline constexpr std::uint32_t kPktsIn = 0x04;
inline constexpr std::uint32_t kPktsOut = 0x08;
inline constexpr std::uint32_t kRttSumLo = 0x0C;
inline constexpr std::uint32_t kRttSumHi = 0x10;
inline constexpr std::uint32_t kRttCount = 0x14;
inline constexpr std::uint32_t kControl = 0x18;
inline constexpr std::uint32_t kRttLastNs = 0x1C;

inline constexpr std::uint32_t kControlEnableMask = 0xF;
inline constexpr std::uint32_t kControlReset = 1U << 4;
inline constexpr std::uint32_t kStatusBusy = 1U << 31;

constexpr std::uint32_t tile_register(std::size_t tile_index, std::uint32_t offset) noexcept
{
    return kTileBase + static_cast<std::uint32_t>(tile_index) * kTileStride + offset;
}
constexpr std::uint32_t freq_register(IslandId island) noexcept { return kFreqBase + island * 4; }
constexpr std::uint32_t status_register(IslandId island) noexcept { return kStatusBase + island * 4; }
} // namespace regs

struct RegisterWrite
{
    bool ok = true;
    /// Set for frequency-register writes.
    std::optional<WriteOutcome> frequency;
};

/// 32-bit memory-mapped view of the tile counters and the frequency
/// registers. Reading rtt_sum_lo latches the matching high word so that a
/// lo-then-hi read pair is consistent.
class RegisterMap
{
public:
    /// `tiles` is row-major; pointers must outlive the map.
    RegisterMap(std::vector<TileCounters*> tiles, ClockTree& clocks, std::function<SimTime()> now);

    std::uint32_t read(std::uint32_t addr);
    RegisterWrite write(std::uint32_t addr, std::uint32_t value);
    bool mapped(std::uint32_t addr) const noexcept;

    /// Every mapped address in ascending order.
    std::vector<std::uint32_t> addresses() const;

private:
    std::vector<TileCounters*> tiles_;
    ClockTree& clocks_;
    std::function<SimTime()> now_;
    std::vector<std::uint32_t> latched_hi_;
};

/// One point of a traffic time series.
struct RatePoint
{
    SimTime window_end;
    double mpkts = 0.0;
};

/// Packets per window converted to millions of packets per second.
RatePoint sample_traffic(std::uint64_t packets_in_window, SimTime window_end, SimTime window);

/// Periodic sampler of a monotone packet counter (e.g. packets ejected at
/// the memory tile). Samples at every multiple of the window up to `until`.
class TrafficSampler
{
public:
    TrafficSampler(Kernel& kernel, SimTime window, std::function<std::uint64_t()> counter);

    void start(SimTime from, SimTime until);
    const std::vector<RatePoint>& points() const noexcept { return points_; }
    SimTime window() const noexcept { return window_; }

private:
    void tick();

    Kernel& kernel_;
    SimTime window_;
    std::function<std::uint64_t()> counter_;
    std::uint64_t last_ = 0;
    SimTime next_;
    SimTime until_;
    std::vector<RatePoint> points_;
};

} // namespace vespa
