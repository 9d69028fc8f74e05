#pragma once

// Independent reference models shared by the unit tests and the acceptance
// binary. None of them calls into the simulator's timing code: edge times are
// recomputed here from first principles.

#include <vespa/clocking.hpp>
#include <vespa/config.hpp>
#include <vespa/engine.hpp>
#include <vespa/noc.hpp>

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <tuple>
#include <vector>

namespace oracle
{

inline constexpr std::uint64_t kFsPerSecond = 1'000'000'000'000'000ULL;

inline std::uint64_t period_fs(std::uint64_t hz) { return kFsPerSecond / hz; }

/// Largest spacing between two consecutive edges of a free-running clock once
/// its ideal edges are rounded to whole femtoseconds.
inline std::uint64_t max_rounded_period_fs(std::uint64_t hz) { return (kFsPerSecond + hz - 1) / hz; }
inline std::uint64_t min_rounded_period_fs(std::uint64_t hz) { return kFsPerSecond / hz; }

inline std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b) { return (a + b - 1) / b; }

/// Idle-network read round trip seen by an accelerator tile.
///
/// Requires the router clock period to divide the tile clock period and the
/// request to leave on a tile edge, so every tile edge is also a router edge.
/// Stages, all in router cycles unless noted:
///   resync into the router island        resync
///   request traversal (one header flit)  hops * (pipeline + 1) + 1
///   memory access latency                mem_latency
///   data bus occupancy                   max(1, ceil(bytes / mem_bytes_per_cycle))
///   response traversal                   hops * (pipeline + 1) + ceil(bytes / link) + 1
///   resync into the tile island          resync tile edges strictly after arrival
struct RttInputs
{
    std::uint64_t tile_hz = 50'000'000;
    std::uint64_t noc_hz = 100'000'000;
    std::uint32_t hops = 1;
    std::uint32_t pipeline = 1;
    std::uint32_t link_width = 8;
    std::uint32_t resync = 2;
    std::uint32_t mem_latency = 20;
    std::uint32_t mem_bytes_per_cycle = 1;
    std::uint32_t bytes = 16;
};

inline std::uint64_t zero_load_rtt_fs(const RttInputs& in)
{
    const std::uint64_t tn = period_fs(in.noc_hz);
    const std::uint64_t tt = period_fs(in.tile_hz);
    const std::uint64_t per_hop = in.pipeline + 1ULL;
    const std::uint64_t req = in.hops * per_hop + 1;
    const std::uint64_t occupancy = std::max<std::uint64_t>(1, ceil_div(in.bytes, in.mem_bytes_per_cycle));
    const std::uint64_t resp = in.hops * per_hop + ceil_div(in.bytes, in.link_width) + 1;
    const std::uint64_t arrival = (in.resync + req + in.mem_latency + occupancy + resp) * tn;
    // Tile edges are multiples of tt; the data is taken on the resync-th one strictly after arrival.
    return (arrival / tt + in.resync) * tt;
}

// ---------------------------------------------------------------------------

struct GapReport
{
    std::uint64_t max_gap = 0;
    std::uint64_t min_gap = UINT64_MAX;
    std::size_t gaps_at_least = 0; ///< gaps >= the threshold given to analyse()
    std::size_t edges = 0;
};

inline GapReport analyse(const std::vector<std::uint64_t>& edges, std::uint64_t threshold)
{
    GapReport r;
    r.edges = edges.size();
    for (std::size_t i = 1; i < edges.size(); ++i)
    {
        const std::uint64_t g = edges[i] - edges[i - 1];
        r.max_gap = std::max(r.max_gap, g);
        r.min_gap = std::min(r.min_gap, g);
        if (g >= threshold)
        {
            ++r.gaps_at_least;
        }
    }
    return r;
}

/// Records the rising edges an island clock delivers to a process that waits
/// one cycle at a time, across a frequency-register write at `request`.
inline std::vector<std::uint64_t> observed_edges(std::uint64_t old_hz, std::uint64_t new_hz, vespa::ActuatorMode mode,
                                                 vespa::SimTime request, vespa::SimTime latency, vespa::SimTime end)
{
    vespa::Kernel kernel;
    vespa::IslandClockConfig cfg;
    cfg.id = 0;
    cfg.dfs = true;
    cfg.initial_hz = old_hz;
    cfg.range = vespa::FrequencyRange{10'000'000, 100'000'000, 5'000'000};
    cfg.reconfig_latency = latency;
    cfg.mode = mode;
    vespa::ClockTree clocks(kernel, {cfg}, 2);
    vespa::ClockDomain& d = clocks.domain(0);

    std::vector<std::uint64_t> edges;
    std::function<void()> tick = [&] {
        edges.push_back(kernel.now().fs);
        if (kernel.now() < end)
        {
            d.after_cycles(kernel.now(), 1, tick);
        }
    };
    d.after_cycles(vespa::SimTime::zero(), 0, tick);
    kernel.schedule(request, 0, [&] { clocks.write_frequency(0, new_hz, kernel.now()); });
    kernel.run_until(end);
    return edges;
}

// ---------------------------------------------------------------------------

struct TrafficReport
{
    std::uint64_t injected = 0;
    std::uint64_t delivered = 0;
    std::uint64_t out_of_order = 0;
    std::uint64_t incomplete_flows = 0;
    std::uint64_t misdelivered = 0;
    std::uint64_t max_stall_cycles = 0;
    std::uint64_t watchdog_cycles = 0;
    bool fault = false;
    std::string fault_message;
};

/// Random uniform traffic on a rows x cols mesh. Packets are injected in
/// bursts so that FIFOs fill and credits run out. Optionally the routers are
/// split over two clock islands to exercise the resynchronizers.
inline TrafficReport random_traffic(int rows, int cols, std::uint64_t packets, std::uint64_t seed, bool two_islands)
{
    using namespace vespa;
    Kernel kernel;
    std::vector<IslandClockConfig> islands;
    IslandClockConfig a;
    a.id = 0;
    a.initial_hz = 100'000'000;
    islands.push_back(a);
    if (two_islands)
    {
        IslandClockConfig b;
        b.id = 1;
        b.initial_hz = 35'000'000;
        islands.push_back(b);
    }
    ClockTree clocks(kernel, islands, 2);
    std::vector<IslandId> router_islands;
    for (int r = 0; r < rows; ++r)
    {
        for (int c = 0; c < cols; ++c)
        {
            router_islands.push_back(two_islands && c >= cols / 2 ? 1 : 0);
        }
    }
    NocParams params;
    Mesh mesh(kernel, clocks, rows, cols, router_islands, params);

    TrafficReport rep;
    rep.watchdog_cycles = params.watchdog_cycles;
    using Key = std::tuple<int, int, int, int, int>;
    std::map<Key, std::vector<std::uint64_t>> sent;
    std::map<Key, std::size_t> next_expected;
    mesh.set_delivery([&](const Packet& p, SimTime) {
        ++rep.delivered;
        const Key k{p.src.row, p.src.col, p.dst.row, p.dst.col, static_cast<int>(p.cls)};
        auto& seq = sent[k];
        std::size_t& n = next_expected[k];
        if (n >= seq.size() || seq[n] != p.id)
        {
            ++rep.out_of_order;
        }
        ++n;
    });

    std::vector<Position> destination(packets);
    mesh.set_trace([&](const NocTraceEvent& ev) {
        if (ev.kind == NocTraceKind::Deliver && !(ev.router == destination[ev.packet]))
        {
            ++rep.misdelivered;
        }
    });

    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> row(0, rows - 1);
    std::uniform_int_distribution<int> col(0, cols - 1);
    std::uniform_int_distribution<int> cls(0, static_cast<int>(kPacketClassCount) - 1);
    std::uniform_int_distribution<std::uint32_t> payload(0, 64);
    std::uniform_int_distribution<std::uint64_t> gap_ns(0, 40);

    SimTime t = SimTime::zero();
    for (std::uint64_t i = 0; i < packets; ++i)
    {
        Packet p;
        p.id = i;
        p.src = Position{row(rng), col(rng)};
        do
        {
            p.dst = Position{row(rng), col(rng)};
        } while (p.dst == p.src);
        destination[i] = p.dst;
        p.cls = static_cast<PacketClass>(cls(rng));
        p.payload_bytes = payload(rng);
        p.size_flits = flits_for(p.payload_bytes, params.link_width_bytes);
        // Bursts of 64 packets injected at the same instant, then a pause.
        if (i % 64 == 0)
        {
            t = t + SimTime::from_ns(gap_ns(rng) * 50);
        }
        sent[Key{p.src.row, p.src.col, p.dst.row, p.dst.col, static_cast<int>(p.cls)}].push_back(p.id);
        kernel.schedule(t, 0, [&mesh, &kernel, p] { mesh.inject(p, kernel.now()); });
        ++rep.injected;
    }
    try
    {
        kernel.run_until(SimTime::from_ms(1000));
    }
    catch (const SimulationFault& e)
    {
        rep.fault = true;
        rep.fault_message = e.what();
    }
    rep.max_stall_cycles = mesh.stats().max_stall_cycles;
    for (const auto& [k, seq] : sent)
    {
        if (next_expected[k] != seq.size())
        {
            ++rep.incomplete_flows;
        }
    }
    return rep;
}

} // namespace oracle
