#pragma once

#include "vespa/engine.hpp"
#include "vespa/sim_time.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

namespace vespa
{

using IslandId = std::uint32_t;

enum class ActuatorMode : std::uint8_t
{
    DualOscillator,
    NaiveSingle,
};

enum class BusyPolicy : std::uint8_t
{
    Reject,
    Queue,
};

/// Legal DFS operating points: min + k * step for min <= f <= max.
struct FrequencyRange
{
    FrequencyHz min_hz = 0;
    FrequencyHz max_hz = 0;
    FrequencyHz step_hz = 0;

    bool contains(FrequencyHz f) const noexcept;
    std::vector<FrequencyHz> legal_values() const;

    bool operator==(const FrequencyRange&) const = default;
};

/// One stretch of a clock waveform: edges at anchor + cycle_edge_time(freq, k)
/// for k >= (anchor_is_edge ? 0 : 1), up to and including last_valid.
struct ClockSegment
{
    SimTime anchor;
    FrequencyHz freq = 0;
    bool anchor_is_edge = false;
    SimTime last_valid = SimTime::max();
};

/// Rising-edge timeline of an island clock. Pure value: retargeting only ever
/// rewrites the future relative to the request time.
class ClockWaveform
{
public:
    explicit ClockWaveform(FrequencyHz initial);

    /// n-th edge strictly after t for n >= 1; the first edge at or after t for n == 0.
    SimTime nth_edge_after(SimTime t, std::uint64_t n) const;
    SimTime edge_at_or_after(SimTime t) const { return nth_edge_after(t, 0); }
    std::optional<SimTime> last_edge_at_or_before(SimTime t) const;

    /// Number of edges in the half-open interval (a, b].
    std::uint64_t edges_in(SimTime a, SimTime b) const;
    /// All edges e with from <= e < to.
    std::vector<SimTime> edges_between(SimTime from, SimTime to) const;

    /// Frequency of the oscillator driving the output at t; 0 while gated.
    FrequencyHz frequency_at(SimTime t) const;

    /// Installs a frequency change requested at `request` that completes at
    /// `completion`. Dual mode keeps the old edges up to the first old edge at
    /// or after completion, then continues one new period later. Naive mode
    /// drops every edge after `request` until one new period after completion.
    void retarget(SimTime request, SimTime completion, FrequencyHz freq, ActuatorMode mode);

    const std::vector<ClockSegment>& segments() const noexcept { return segments_; }

private:
    std::size_t segment_for(SimTime t) const;

    std::vector<ClockSegment> segments_;
};

enum class ActuatorState : std::uint8_t
{
    Stable,
    ReconfiguringSlave,
    Swapping,
};

struct Oscillator
{
    FrequencyHz freq = 0;
    bool locked = true;
};

/// Two-oscillator DFS actuator. The master keeps driving the island while the
/// slave relocks; on completion the roles swap. NaiveSingle reprograms the
/// only oscillator in place, gating the island for the whole latency.
class DfsActuator
{
public:
    DfsActuator(FrequencyHz initial, SimTime reconfig_latency, ActuatorMode mode);

    /// Starts a reconfiguration and returns its completion time.
    SimTime begin(FrequencyHz target, SimTime now);
    /// Completes the running reconfiguration (Swapping -> Stable).
    void complete();

    ActuatorState state() const noexcept { return state_; }
    ActuatorMode mode() const noexcept { return mode_; }
    const Oscillator& master() const noexcept { return osc_[master_]; }
    const Oscillator& slave() const noexcept { return osc_[1 - master_]; }
    bool busy() const noexcept { return state_ != ActuatorState::Stable; }
    FrequencyHz requested() const noexcept { return requested_; }
    SimTime reconfig_latency() const noexcept { return latency_; }
    std::uint64_t completed_reconfigurations() const noexcept { return completed_; }

private:
    std::array<Oscillator, 2> osc_;
    int master_ = 0;
    ActuatorState state_ = ActuatorState::Stable;
    ActuatorMode mode_;
    SimTime latency_;
    FrequencyHz requested_;
    std::uint64_t completed_ = 0;
};

/// Output edges of an actuator-driven clock over [from, to).
std::vector<SimTime> actuator_edges(const ClockWaveform& wave, SimTime from, SimTime to);

/// Island clock bound to a kernel. Timed actions registered through
/// after_cycles follow frequency changes: when the waveform is retargeted the
/// pending waits are re-resolved against the new edges.
class ClockDomain
{
public:
    ClockDomain(Kernel& kernel, IslandId id, FrequencyHz initial);
    ClockDomain(const ClockDomain&) = delete;
    ClockDomain& operator=(const ClockDomain&) = delete;

    IslandId id() const noexcept { return id_; }
    const ClockWaveform& waveform() const noexcept { return wave_; }
    Kernel& kernel() noexcept { return kernel_; }

    SimTime edge_after(SimTime from, std::uint64_t n) const { return wave_.nth_edge_after(from, n); }
    FrequencyHz frequency_at(SimTime t) const { return wave_.frequency_at(t); }

    /// Runs `action` on the n-th edge strictly after `from` (n == 0: first edge at or after).
    void after_cycles(SimTime from, std::uint64_t n, std::function<void()> action);

    void retarget(SimTime request, SimTime completion, FrequencyHz freq, ActuatorMode mode);

    std::size_t pending_waits() const noexcept { return active_waits_; }

private:
    struct Wait
    {
        SimTime from;
        std::uint64_t n = 0;
        SimTime target;
        std::uint64_t generation = 0;
        bool active = false;
        std::function<void()> action;
    };

    void arm(std::uint32_t slot);
    void fire(std::uint32_t slot, std::uint64_t generation);

    Kernel& kernel_;
    IslandId id_;
    ClockWaveform wave_;
    std::vector<Wait> waits_;
    std::vector<std::uint32_t> free_;
    std::size_t active_waits_ = 0;
};

enum class RejectReason : std::uint8_t
{
    OutOfRange,
    OffStepGrid,
    Busy,
    FixedIsland,
    UnknownIsland,
};

std::string_view to_string(RejectReason r) noexcept;

struct WriteOutcome
{
    bool accepted = false;
    std::optional<RejectReason> reason;
    /// Set for accepted writes: when the new frequency takes effect.
    std::optional<SimTime> effective_at;
    bool queued = false;
};

struct IslandClockConfig
{
    IslandId id = 0;
    bool dfs = false;
    FrequencyHz initial_hz = 0;
    FrequencyRange range;
    SimTime reconfig_latency = SimTime::from_us(10);
    ActuatorMode mode = ActuatorMode::DualOscillator;
    BusyPolicy busy_policy = BusyPolicy::Reject;
};

/// Frequency register of one DFS island as seen by software.
struct FrequencyRegister
{
    FrequencyHz requested_hz = 0;
    bool busy = false;
};

/// All island clocks of an SoC: domains, DFS actuators, the frequency
/// register file and the resynchronizers on island boundaries.
class ClockTree
{
public:
    ClockTree(Kernel& kernel, const std::vector<IslandClockConfig>& islands, std::uint32_t resync_depth);

    ClockDomain& domain(IslandId id);
    const ClockDomain& domain(IslandId id) const;
    bool has_island(IslandId id) const noexcept { return islands_.count(id) != 0; }
    bool is_dfs(IslandId id) const;
    std::vector<IslandId> island_ids() const;
    std::vector<IslandId> dfs_island_ids() const;

    /// Frequency register write: validates and starts the actuator.
    WriteOutcome write_frequency(IslandId island, FrequencyHz freq, SimTime t);
    FrequencyRegister frequency_register(IslandId island) const;
    const DfsActuator* actuator(IslandId island) const;
    const FrequencyRange* legal_range(IslandId island) const;

    /// Time of the resync_depth-th destination edge strictly after arrival;
    /// identity for same-island transfers.
    SimTime crossing_delay(IslandId src, IslandId dst, SimTime arrival) const;
    /// Schedules `action` at crossing_delay(src, dst, arrival).
    void cross(IslandId src, IslandId dst, SimTime arrival, std::function<void()> action);

    std::uint32_t resync_depth() const noexcept { return resync_depth_; }

    /// Observer called on every effective frequency change (island, time, freq).
    void on_frequency_change(std::function<void(IslandId, SimTime, FrequencyHz)> cb) { observer_ = std::move(cb); }

private:
    struct Island
    {
        IslandClockConfig cfg;
        std::unique_ptr<ClockDomain> domain;
        std::optional<DfsActuator> actuator;
        std::optional<FrequencyHz> queued;
    };

    void start_reconfiguration(Island& isl, FrequencyHz freq, SimTime t);
    void finish_reconfiguration(IslandId id);

    Kernel& kernel_;
    std::map<IslandId, Island> islands_;
    std::uint32_t resync_depth_;
    std::function<void(IslandId, SimTime, FrequencyHz)> observer_;
};

} // namespace vespa
