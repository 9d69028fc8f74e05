#pragma once

#include "vespa/config.hpp"
#include "vespa/monitor.hpp"

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace vespa
{

inline constexpr std::uint64_t kDefaultBudgetBytes = 1'000'000;
inline constexpr SimTime kDefaultWindow = SimTime::from_ms(1);
/// Upper bound on simulated time for a budgeted run.
inline constexpr SimTime kDefaultRunLimit = SimTime::from_ms(60'000);
/// Simulated time of a run that has no enabled accelerator and no explicit duration.
inline constexpr SimTime kDefaultIdleDuration = SimTime::from_ms(10);

/// Parses "<integer>[fs|ps|ns|us|ms|s]"; a bare integer is femtoseconds.
SimTime parse_duration(const std::string& text);

// ---------------------------------------------------------------------------
// Single run

struct RunOptions
{
    std::uint64_t seed = 1;
    /// Stop time. Unset: run until every enabled accelerator has consumed its
    /// budget (bounded by kDefaultRunLimit). Zero: no simulation at all.
    std::optional<SimTime> duration;
    std::uint64_t budget_bytes = kDefaultBudgetBytes;
    /// Time bound used when `duration` is unset.
    SimTime limit = kDefaultRunLimit;
    SimTime window = kDefaultWindow;
    bool trace = true;
};

struct TileMetrics
{
    std::string name;
    Position position;
    TileKind kind = TileKind::Cpu;
    std::string accel;
    std::uint32_t replication = 0;
    IslandId island = 0;
    FrequencyHz freq_hz = 0;
    double throughput_mbps = 0.0;
    std::uint64_t invocations = 0;
    std::uint64_t bytes_read = 0;
    std::uint64_t bytes_written = 0;
    std::uint64_t exec_time_cycles = 0;
    std::uint64_t pkts_in = 0;
    std::uint64_t pkts_out = 0;
    std::uint64_t rtt_count = 0;
    double mean_rtt_ns = 0.0;
    double busy_fraction = 0.0;
};

struct TraceSample
{
    SimTime time;
    std::string probe;
    std::string stat;
    double value = 0.0;
};

struct RunResult
{
    std::vector<TileMetrics> tiles;
    std::vector<TraceSample> trace;
    SimTime end;
    /// False when a budgeted run hit its time limit first.
    bool completed = true;
    double mem_busy_fraction = 0.0;
    std::uint64_t mem_pkts_in = 0;

    const TileMetrics* tile(std::string_view name) const;
};

/// Throws ConfigError for an invalid description and SimulationFault on a
/// kernel or protocol fault.
RunResult run_simulation(const SoCDescription& desc, const RunOptions& options);

void write_metrics_csv(std::ostream& out, const RunResult& result);
void write_trace_csv(std::ostream& out, const std::vector<TraceSample>& trace);

// ---------------------------------------------------------------------------
// Design-space sweep

enum class Placement : std::uint8_t
{
    Default,
    Swap, ///< contents of slots A1 and A2 exchanged
};

std::string_view to_string(Placement p) noexcept;

struct SlotChoices
{
    std::vector<std::string> accels;
    std::vector<std::uint32_t> replication;
};

struct SweepSpace
{
    /// Keyed by slot name ("A1", "A2"). Slots not listed are disabled.
    std::map<std::string, SlotChoices> slots;
    std::map<IslandId, std::vector<FrequencyHz>> frequencies;
    std::vector<std::size_t> tg_counts{0};
    std::vector<Placement> placements{Placement::Default};
    std::uint32_t repetitions = 1;
    std::uint64_t seed = 1;
    std::uint64_t budget_bytes = kDefaultBudgetBytes;
    SimTime limit = kDefaultRunLimit;
};

/// Reads a sweep-space document (docs/sweep-format.md); island keys may be
/// ids or names of islands in `base`.
SweepSpace parse_sweep_space(const std::string& text, const SoCDescription& base);

struct SlotSetting
{
    std::string accel; ///< empty: slot disabled
    std::uint32_t replication = 1;
};

struct SweepPoint
{
    std::size_t index = 0;
    Placement placement = Placement::Default;
    SlotSetting a1;
    SlotSetting a2;
    std::map<IslandId, FrequencyHz> frequencies;
    std::size_t tg_count = 0;
    std::uint32_t repetition = 0;
    std::uint64_t seed = 1;
};

/// Size of the Cartesian product; computed without enumerating.
std::size_t sweep_size(const SweepSpace& space);
/// Points in enumeration order: placement, A1 accel, A1 K, A2 accel, A2 K,
/// island frequencies (ascending island id), TG count, repetition.
std::vector<SweepPoint> enumerate(const SweepSpace& space);
/// The description simulated for `point`.
SoCDescription materialize(const SoCDescription& base, const SweepPoint& point);

struct SlotResult
{
    SlotSetting setting;
    double throughput_mbps = 0.0;
    double mean_rtt_ns = 0.0;
    bool has_area = false;
    std::uint64_t lut = 0;
    std::uint64_t ff = 0;
    std::uint64_t bram = 0;
    std::uint64_t dsp = 0;
    bool fits = true;
};

struct SweepRow
{
    SweepPoint point;
    /// "ok", "timeout", or "error: <message>".
    std::string status = "ok";
    std::map<IslandId, FrequencyHz> island_hz;
    SlotResult a1;
    SlotResult a2;
    double mem_busy_fraction = 0.0;
    std::uint64_t mem_pkts_in = 0;
    SimTime sim_time;

    bool ok() const noexcept { return status == "ok"; }
};

/// Simulates one point. Failures are reported in the row, never thrown.
SweepRow run_point(const SoCDescription& base, const SweepSpace& space, const SweepPoint& point);
/// Runs every point on up to `jobs` threads; rows come back in enumeration order.
std::vector<SweepRow> run_sweep(const SoCDescription& base, const SweepSpace& space, unsigned jobs);

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

// ---------------------------------------------------------------------------
// Frequency-schedule profiling

enum class ScheduleOp : std::uint8_t
{
    SetFrequency,
    TgCount,
    TgTile,
    ResetCounters,
    Sample,
    ReadRegister,
};

std::string_view to_string(ScheduleOp op) noexcept;

struct ScheduleCommand
{
    SimTime time;
    ScheduleOp op = ScheduleOp::Sample;
    std::map<IslandId, FrequencyHz> frequencies; ///< SetFrequency
    std::size_t count = 0;                       ///< TgCount
    Position tile;                               ///< TgTile, Sample
    bool on = true;                              ///< TgTile
    std::uint32_t address = 0;                   ///< ReadRegister
};

struct Schedule
{
    SimTime duration;
    std::vector<ScheduleCommand> commands;
};

/// Reads a schedule document (docs/schedule-format.md). Command times must
/// be strictly increasing and below the duration.
Schedule parse_schedule(const std::string& text, const SoCDescription& desc);

struct FrequencyPoint
{
    SimTime time;
    IslandId island = 0;
    FrequencyHz freq_hz = 0;
};

struct CommandLogEntry
{
    SimTime time;
    std::string command;
    std::string result;
};

struct ProfileResult
{
    std::vector<FrequencyPoint> frequency;
    std::vector<RatePoint> mem_traffic;
    std::vector<TraceSample> samples;
    std::vector<CommandLogEntry> log;
    std::map<IslandId, std::string> island_names;
    SimTime end;
};

/// Runs `desc` with every enabled accelerator looping, applies the schedule
/// and samples the memory tile's incoming packet rate every `window`.
ProfileResult run_profile(const SoCDescription& desc, const Schedule& schedule, SimTime window,
                          std::uint64_t seed);

void write_frequency_csv(std::ostream& out, const ProfileResult& result);
void write_mem_traffic_csv(std::ostream& out, const ProfileResult& result);
void write_command_log(std::ostream& out, const ProfileResult& result);
/// Generic plot data: {"panels": [{"title", "x_label", "y_label", "series": [{"label", "x", "y"}]}]}.
void write_plot_json(std::ostream& out, const ProfileResult& result);

/// Mean of the traffic samples whose window lies entirely inside [from, to).
double mean_rate(const std::vector<RatePoint>& points, SimTime window, SimTime from, SimTime to);

} // namespace vespa
