#pragma once

#include "vespa/clocking.hpp"
#include "vespa/config.hpp"
#include "vespa/engine.hpp"
#include "vespa/monitor.hpp"
#include "vespa/noc.hpp"
#include "vespa/tiles.hpp"

#include <memory>
#include <optional>
#include <vector>

namespace vespa
{

struct SocOptions
{
    std::uint64_t seed = 1;
    /// ACCEL tiles enabled at start repeat their invocation forever (traffic
    /// profiling) instead of running one batch.
    bool loop_accelerators = false;
    /// Items per invocation for enabled ACCEL tiles; 0 uses the profile's
    /// items_per_invocation.
    std::uint64_t accel_items = 0;
    /// When non-zero, overrides accel_items: each enabled ACCEL tile runs
    /// max(1, budget / bytes_read_per_item) items.
    std::uint64_t accel_budget_bytes = 0;
    /// Traffic generators start after a uniform random delay in
    /// [0, tg_start_jitter_cycles) of their own clock.
    std::uint64_t tg_start_jitter_cycles = 64;
};

/// A fully assembled SoC instance: kernel, clocks, mesh, tiles and the
/// register map. One instance is single-threaded; independent instances may
/// run on different threads.
class Soc : private Fabric
{
public:
    explicit Soc(const SoCDescription& desc, const SocOptions& options = {});
    ~Soc() override;
    Soc(const Soc&) = delete;
    Soc& operator=(const Soc&) = delete;

    Kernel& kernel() noexcept { return kernel_; }
    ClockTree& clocks() noexcept { return *clocks_; }
    Mesh& mesh() noexcept { return *mesh_; }
    RegisterMap& registers() noexcept { return *registers_; }
    const SoCDescription& description() const noexcept { return desc_; }

    Tile& tile(Position p);
    MraTile* mra(Position p);
    MemTile& memory();
    std::size_t tile_index(Position p) const { return desc_.tile_index(p); }

    /// Starts every ACCEL tile whose spec is enabled_at_start; each runs
    /// `items` items (0: SocOptions::accel_items or the profile default).
    void start_accelerators(SimTime t);
    void start_invocation(Position p, std::uint64_t items, SimTime t);

    /// Traffic-generator control. Throws std::invalid_argument for non-TG tiles.
    void tg_set_enabled(Position p, bool on, SimTime t);
    /// Enables the first `count` TGs (in row-major order) and disables the rest.
    void set_active_tgs(std::size_t count, SimTime t);
    std::vector<Position> traffic_generators() const;

    WriteOutcome write_frequency(IslandId island, FrequencyHz f, SimTime t);

    RunSummary run_until(SimTime t_end);
    /// Runs until every ACCEL tile started with a finite batch has completed,
    /// or `limit` is reached. Returns true if all completed.
    bool run_to_completion(SimTime limit);
    bool accelerators_done() const noexcept { return pending_batches_ == 0; }

    /// Packets ejected at the memory tile since t=0 (unaffected by counter resets).
    std::uint64_t memory_packets_in() const;

private:
    void send(Packet p, SimTime t) override;
    std::uint64_t next_packet_id() override { return next_packet_id_++; }
    std::uint32_t link_width() const override { return desc_.noc_params.link_width_bytes; }
    void deliver(const Packet& p, SimTime t);

    SoCDescription desc_;
    SocOptions options_;
    Kernel kernel_;
    std::unique_ptr<ClockTree> clocks_;
    std::unique_ptr<Mesh> mesh_;
    std::vector<std::unique_ptr<Tile>> tiles_;
    std::unique_ptr<RegisterMap> registers_;
    MemTile* memory_ = nullptr;
    std::uint64_t next_packet_id_ = 0;
    std::size_t pending_batches_ = 0;
    bool stop_when_done_ = false;
};

/// Clock configuration of each island of a description, in island order.
std::vector<IslandClockConfig> island_clock_configs(const SoCDescription& desc);

} // namespace vespa
