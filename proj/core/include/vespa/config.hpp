#pragma once

#include "vespa/clocking.hpp"
#include "vespa/sim_time.hpp"

#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace vespa
{

/// Malformed or schema-violating configuration input.
class ConfigError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

struct Position
{
    int row = 0;
    int col = 0;

    auto operator<=>(const Position&) const = default;
};

std::string to_string(Position p);

enum class TileKind : std::uint8_t
{
    Cpu,
    Mem,
    Io,
    Accel,
    Tg,
};

std::string_view to_string(TileKind k) noexcept;

struct TileSpec
{
    Position position;
    TileKind kind = TileKind::Tg;
    /// Slot label (e.g. "A1"); optional.
    std::string name;
    /// Accelerator profile name for ACCEL/TG tiles.
    std::string accel;
    std::uint32_t replication = 1;
    /// TG: generating traffic at t=0. ACCEL: runs its work batch from t=0.
    bool enabled_at_start = false;
    /// Outstanding DMA read bursts the tile's rdData buffer can hold.
    std::uint32_t read_buffer_depth = 1;
    /// Bytes moved per tile cycle between a replica and the tile buffers.
    std::uint32_t stream_width_bytes = 8;

    bool operator==(const TileSpec&) const = default;
};

struct ClockSpec
{
    bool dfs = false;
    FrequencyHz freq_hz = 0; ///< fixed frequency, or initial frequency for DFS
    FrequencyRange range;    ///< DFS only
    SimTime reconfig_latency = SimTime::from_us(10);
    ActuatorMode mode = ActuatorMode::DualOscillator;
    BusyPolicy busy_policy = BusyPolicy::Reject;

    bool operator==(const ClockSpec&) const = default;
};

struct IslandSpec
{
    IslandId id = 0;
    std::string name;
    std::vector<Position> tiles;
    std::vector<Position> routers;
    ClockSpec clock;

    bool operator==(const IslandSpec&) const = default;
};

struct MemModel
{
    std::uint32_t bytes_per_cycle = 8;
    std::uint32_t latency_cycles = 10;

    bool operator==(const MemModel&) const = default;
};

struct NocParams
{
    std::uint32_t link_width_bytes = 8;
    std::uint32_t router_pipeline_cycles = 1;
    std::uint32_t fifo_depth = 4;
    std::uint32_t resync_depth = 2;
    std::uint64_t watchdog_cycles = 1'000'000;

    bool operator==(const NocParams&) const = default;
};

enum class Boundedness : std::uint8_t
{
    ComputeBound,
    MemoryBound,
};

std::string_view to_string(Boundedness b) noexcept;

struct AcceleratorProfile
{
    std::string name;
    std::uint64_t items_per_invocation = 1;
    std::uint32_t bytes_read_per_item = 1;
    std::uint32_t bytes_written_per_item = 1;
    std::uint64_t compute_cycles_per_item = 1;
    std::uint32_t burst_bytes = 1;
    Boundedness boundedness = Boundedness::ComputeBound;

    /// Items handled per read burst by one replica.
    std::uint64_t items_per_chunk() const noexcept;

    bool operator==(const AcceleratorProfile&) const = default;
};

struct SoCDescription
{
    int rows = 1;
    int cols = 1;
    std::vector<TileSpec> tiles; ///< row-major, rows * cols entries
    std::vector<IslandSpec> islands;
    MemModel mem_service;
    NocParams noc_params;
    std::vector<AcceleratorProfile> profiles;

    const TileSpec& tile_at(Position p) const;
    TileSpec& tile_at(Position p);
    std::size_t tile_index(Position p) const;
    bool in_grid(Position p) const noexcept;
    /// Island owning the tile / router at p.
    IslandId tile_island(Position p) const;
    IslandId router_island(Position p) const;
    const IslandSpec& island(IslandId id) const;
    IslandSpec& island(IslandId id);
    const AcceleratorProfile* find_profile(std::string_view name) const;
    std::optional<Position> find_named(std::string_view name) const;
    Position mem_position() const;

    bool operator==(const SoCDescription&) const = default;
};

inline constexpr int kSchemaVersion = 1;

/// Parses a configuration document (JSON, see docs/config-format.md).
SoCDescription load_description(std::string_view text);
SoCDescription load_description_file(const std::string& path);
/// Inverse of load_description.
std::string serialize(const SoCDescription& desc);

/// One entry per violated invariant; empty means valid.
std::vector<std::string> validate(const SoCDescription& desc);
/// Throws ConfigError listing every violation.
void require_valid(const SoCDescription& desc);

enum class IslandVariant : std::uint8_t
{
    /// CPU and IO on separate clocks (six islands).
    SixClocks,
    /// CPU and IO share one clock (five islands).
    FiveClocks,
};

/// Island ids used by reference_testbed().
namespace testbed
{
inline constexpr IslandId kNocMem = 0;
inline constexpr IslandId kA1 = 1;
inline constexpr IslandId kA2 = 2;
inline constexpr IslandId kTg = 3;
inline constexpr IslandId kCpu = 4;
inline constexpr IslandId kIo = 5;

inline constexpr Position kMem{0, 3};
inline constexpr Position kA1Pos{0, 2};
inline constexpr Position kA2Pos{3, 0};
inline constexpr Position kCpuPos{0, 0};
inline constexpr Position kIoPos{3, 3};

inline constexpr FrequencyHz kMHz = 1'000'000;
} // namespace testbed

/// 4x4 reference SoC: CPU, MEM, IO, eleven dfadd traffic generators and two
/// accelerator slots A1 (next to memory) and A2 (farthest corner).
/// Clocks start at the reference point: NoC+MEM 100 MHz, everything else 50 MHz.
/// A1 runs dfadd x1; A2 and all TGs start disabled.
SoCDescription reference_testbed(IslandVariant variant = IslandVariant::SixClocks);

/// Positions of the TG tiles in the order they are enabled by "n active TGs".
std::vector<Position> tg_positions(const SoCDescription& desc);

} // namespace vespa
