#pragma once

#include "vespa/clocking.hpp"
#include "vespa/config.hpp"
#include "vespa/engine.hpp"

#include <array>
#include <cstdint>
#include <deque>
#include <functional>
#include <string_view>
#include <vector>

namespace vespa
{

enum class PacketClass : std::uint8_t
{
    RdCtrl,
    WrCtrl,
    RdData,
    WrData,
    MemReq,
    MemResp,
};

inline constexpr std::size_t kPacketClassCount = 6;

std::string_view to_string(PacketClass c) noexcept;

/// Virtual network carrying a class: 0 for requests, 1 for responses.
std::uint32_t virtual_network(PacketClass c) noexcept;
inline constexpr std::uint32_t kVirtualNetworks = 2;

struct Packet
{
    std::uint64_t id = 0;
    PacketClass cls = PacketClass::MemReq;
    Position src;
    Position dst;
    std::uint32_t size_flits = 1;
    std::uint32_t payload_bytes = 0;
    SimTime t_injected;
    /// Originating replica or requester id, echoed in responses.
    std::uint32_t tag = 0;
    /// Bytes requested by a MemReq (the packet itself carries no payload).
    std::uint32_t request_bytes = 0;
};

/// ceil(payload / link width) plus one header flit.
std::uint32_t flits_for(std::uint32_t payload_bytes, std::uint32_t link_width_bytes);

enum class Port : std::uint8_t
{
    North,
    South,
    East,
    West,
    Local,
};

inline constexpr std::size_t kPortCount = 5;

std::string_view to_string(Port p) noexcept;

/// Dimension-order routing: fix the column first, then the row. Row 0 is north.
Port xy_next_hop(Position cur, Position dst, int rows, int cols);
std::uint32_t hop_count(Position src, Position dst) noexcept;

/// Zero-load latency in router cycles on a single-island mesh:
/// hops * (pipeline + 1) + size_flits.
std::uint64_t zero_load_cycles(std::uint32_t hops, std::uint32_t pipeline, std::uint32_t size_flits) noexcept;

enum class NocTraceKind : std::uint8_t
{
    Enter,  ///< head entered an input FIFO
    Depart, ///< head left toward a neighbour router
    Eject,  ///< head started leaving through the local port
    Deliver ///< tail reached the destination network interface
};

struct NocTraceEvent
{
    NocTraceKind kind;
    std::uint64_t packet;
    Position router;
    SimTime time;
};

struct NocStats
{
    std::uint64_t injected = 0;
    std::uint64_t delivered = 0;
    std::uint64_t hops = 0;
    /// Largest wait (router cycles) of a ready head packet before departure.
    std::uint64_t max_stall_cycles = 0;
    std::uint64_t max_fifo_occupancy = 0;
};

/// Packet-level virtual cut-through mesh. Each router keeps one FIFO of
/// `fifo_depth` packets per (input port, virtual network); space downstream
/// is reserved when a packet departs and released when its tail leaves.
class Mesh
{
public:
    using DeliveryFn = std::function<void(const Packet&, SimTime)>;

    /// `router_islands` lists each router's island in row-major order.
    Mesh(Kernel& kernel, ClockTree& clocks, int rows, int cols, std::vector<IslandId> router_islands,
         const NocParams& params);
    Mesh(const Mesh&) = delete;
    Mesh& operator=(const Mesh&) = delete;

    /// Called when the tail of a packet reaches its destination interface.
    void set_delivery(DeliveryFn fn) { deliver_ = std::move(fn); }
    void set_trace(std::function<void(const NocTraceEvent&)> fn) { trace_ = std::move(fn); }

    /// Hands `p` to the network interface of router p.src at time t (router
    /// time base). Interface queues are unbounded.
    void inject(Packet p, SimTime t);

    const NocStats& stats() const noexcept { return stats_; }
    std::uint64_t in_flight() const noexcept { return stats_.injected - stats_.delivered; }
    IslandId router_island(Position p) const;
    const NocParams& params() const noexcept { return params_; }
    int rows() const noexcept { return rows_; }
    int cols() const noexcept { return cols_; }

    /// Throws SimulationFault if any head packet has waited longer than the
    /// watchdog bound at time `now`.
    void check_watchdog(SimTime now) const;

private:
    struct Slot
    {
        Packet pkt;
        Port out = Port::Local;
        bool ready = false;
        SimTime ready_at;
        std::uint64_t ready_seq = 0;
    };

    struct InputQueue
    {
        std::deque<Slot> fifo;
    };

    struct Router
    {
        Position pos;
        IslandId island = 0;
        std::array<std::array<InputQueue, kVirtualNetworks>, kPortCount> in;
        std::array<bool, kPortCount> out_busy{};
        std::array<bool, kPortCount> arbitration_pending{};
        /// Free slots in the neighbour's FIFO behind each output, per vnet.
        std::array<std::array<std::uint32_t, kVirtualNetworks>, kPortCount> credits{};
        std::array<std::deque<Packet>, kVirtualNetworks> ni_queue;
    };

    std::size_t index(Position p) const noexcept
    {
        return static_cast<std::size_t>(p.row) * static_cast<std::size_t>(cols_) + static_cast<std::size_t>(p.col);
    }
    ClockDomain& domain(const Router& r) { return clocks_.domain(r.island); }
    bool has_neighbor(Position p, Port port) const noexcept;
    Position neighbor(Position p, Port port) const noexcept;

    void arrive(std::size_t router, Port in_port, Packet pkt, SimTime t);
    void pump_interface(std::size_t router, std::uint32_t vnet, SimTime t);
    void head_changed(std::size_t router, Port in_port, std::uint32_t vnet, SimTime t);
    void request_arbitration(std::size_t router, Port out, SimTime t);
    void arbitrate(std::size_t router, Port out, SimTime t);
    void release_input(std::size_t router, Port in_port, std::uint32_t vnet, SimTime t);
    void emit(NocTraceKind kind, const Packet& p, Position at, SimTime t) const;
    void mark_ready(std::size_t router, Port in_port, std::uint32_t vnet, std::uint64_t packet, SimTime t);
    /// Runs fn at t if t is a rising edge of the router's clock, else at the next edge.
    void at_edge(std::size_t router, SimTime t, std::function<void()> fn);

    Kernel& kernel_;
    ClockTree& clocks_;
    int rows_;
    int cols_;
    NocParams params_;
    std::vector<Router> routers_;
    std::uint64_t ready_counter_ = 0;
    NocStats stats_;
    DeliveryFn deliver_;
    std::function<void(const NocTraceEvent&)> trace_;
    bool watchdog_armed_ = false;

    void arm_watchdog(SimTime t);
};

} // namespace vespa
