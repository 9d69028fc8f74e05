#include "vespa/noc.hpp"

#include <algorithm>
#include <cstdlib>
#include <stdexcept>

namespace vespa
{

std::string_view to_string(PacketClass c) noexcept
{
    switch (c)
    {
    case PacketClass::RdCtrl:
        return "RdCtrl";
    case PacketClass::WrCtrl:
        return "WrCtrl";
    case PacketClass::RdData:
        return "RdData";
    case PacketClass::WrData:
        return "WrData";
    case PacketClass::MemReq:
        return "MemReq";
    case PacketClass::MemResp:
        return "MemResp";
    }
    return "?";
}

std::uint32_t virtual_network(PacketClass c) noexcept
{
    return (c == PacketClass::RdData || c == PacketClass::MemResp) ? 1 : 0;
}

std::uint32_t flits_for(std::uint32_t payload_bytes, std::uint32_t link_width_bytes)
{
    if (link_width_bytes == 0)
    {
        throw std::invalid_argument("link width must be positive");
    }
    return (payload_bytes + link_width_bytes - 1) / link_width_bytes + 1;
}

std::string_view to_string(Port p) noexcept
{
    switch (p)
    {
    case Port::North:
        return "N";
    case Port::South:
        return "S";
    case Port::East:
        return "E";
    case Port::West:
        return "W";
    case Port::Local:
        return "L";
    }
    return "?";
}

Port xy_next_hop(Position cur, Position dst, int rows, int cols)
{
    if (dst.row < 0 || dst.col < 0 || dst.row >= rows || dst.col >= cols)
    {
        throw std::out_of_range("destination " + to_string(dst) + " outside the mesh");
    }
    if (cur.col < dst.col)
    {
        return Port::East;
    }
    if (cur.col > dst.col)
    {
        return Port::West;
    }
    if (cur.row < dst.row)
    {
        return Port::South;
    }
    if (cur.row > dst.row)
    {
        return Port::North;
    }
    return Port::Local;
}

std::uint32_t hop_count(Position src, Position dst) noexcept
{
    return static_cast<std::uint32_t>(std::abs(src.row - dst.row) + std::abs(src.col - dst.col));
}

std::uint64_t zero_load_cycles(std::uint32_t hops, std::uint32_t pipeline, std::uint32_t size_flits) noexcept
{
    return static_cast<std::uint64_t>(hops) * (pipeline + 1ULL) + size_flits;
}

namespace
{
Port opposite(Port p) noexcept
{
    switch (p)
    {
    case Port::North:
        return Port::South;
    case Port::South:
        return Port::North;
    case Port::East:
        return Port::West;
    case Port::West:
        return Port::East;
    case Port::Local:
        return Port::Local;
    }
    return Port::Local;
}

std::size_t idx(Port p) noexcept
{
    return static_cast<std::size_t>(p);
}
} // namespace

Mesh::Mesh(Kernel& kernel, ClockTree& clocks, int rows, int cols, std::vector<IslandId> router_islands,
           const NocParams& params)
    : kernel_(kernel), clocks_(clocks), rows_(rows), cols_(cols), params_(params)
{
    if (rows <= 0 || cols <= 0)
    {
        throw std::invalid_argument("mesh dimensions must be positive");
    }
    if (router_islands.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols))
    {
        throw std::invalid_argument("one island id per router required");
    }
    if (params.fifo_depth == 0 || params.link_width_bytes == 0)
    {
        throw std::invalid_argument("FIFO depth and link width must be positive");
    }
    routers_.resize(router_islands.size());
    for (int r = 0; r < rows; ++r)
    {
        for (int c = 0; c < cols; ++c)
        {
            Router& rt = routers_[index(Position{r, c})];
            rt.pos = Position{r, c};
            rt.island = router_islands[index(rt.pos)];
            if (!clocks_.has_island(rt.island))
            {
                throw std::invalid_argument("router " + to_string(rt.pos) + " assigned to unknown island");
            }
            for (auto& per_port : rt.credits)
            {
                per_port.fill(params.fifo_depth);
            }
        }
    }
}

IslandId Mesh::router_island(Position p) const
{
    return routers_.at(index(p)).island;
}

bool Mesh::has_neighbor(Position p, Port port) const noexcept
{
    switch (port)
    {
    case Port::North:
        return p.row > 0;
    case Port::South:
        return p.row + 1 < rows_;
    case Port::East:
        return p.col + 1 < cols_;
    case Port::West:
        return p.col > 0;
    case Port::Local:
        return false;
    }
    return false;
}

Position Mesh::neighbor(Position p, Port port) const noexcept
{
    switch (port)
    {
    case Port::North:
        return Position{p.row - 1, p.col};
    case Port::South:
        return Position{p.row + 1, p.col};
    case Port::East:
        return Position{p.row, p.col + 1};
    case Port::West:
        return Position{p.row, p.col - 1};
    case Port::Local:
        return p;
    }
    return p;
}

void Mesh::emit(NocTraceKind kind, const Packet& p, Position at, SimTime t) const
{
    if (trace_)
    {
        trace_(NocTraceEvent{kind, p.id, at, t});
    }
}

void Mesh::at_edge(std::size_t router, SimTime t, std::function<void()> fn)
{
    ClockDomain& d = domain(routers_[router]);
    if (d.edge_after(t, 0) == t)
    {
        fn();
    }
    else
    {
        d.after_cycles(t, 0, std::move(fn));
    }
}

void Mesh::inject(Packet p, SimTime t)
{
    if (p.src.row < 0 || p.src.col < 0 || p.src.row >= rows_ || p.src.col >= cols_)
    {
        throw std::out_of_range("source " + to_string(p.src) + " outside the mesh");
    }
    (void)xy_next_hop(p.src, p.dst, rows_, cols_); // validates the destination
    if (p.size_flits == 0)
    {
        throw std::invalid_argument("packet must have at least one flit");
    }
    ++stats_.injected;
    arm_watchdog(t);
    const std::size_t r = index(p.src);
    const std::uint32_t vnet = virtual_network(p.cls);
    at_edge(r, t, [this, r, vnet, p = std::move(p)]() mutable {
        routers_[r].ni_queue[vnet].push_back(std::move(p));
        pump_interface(r, vnet, kernel_.now());
    });
}

void Mesh::pump_interface(std::size_t router, std::uint32_t vnet, SimTime t)
{
    Router& rt = routers_[router];
    auto& fifo = rt.in[idx(Port::Local)][vnet].fifo;
    while (!rt.ni_queue[vnet].empty() && fifo.size() < params_.fifo_depth)
    {
        Packet p = std::move(rt.ni_queue[vnet].front());
        rt.ni_queue[vnet].pop_front();
        arrive(router, Port::Local, std::move(p), t);
    }
}

void Mesh::arrive(std::size_t router, Port in_port, Packet pkt, SimTime t)
{
    Router& rt = routers_[router];
    const std::uint32_t vnet = virtual_network(pkt.cls);
    auto& fifo = rt.in[idx(in_port)][vnet].fifo;
    if (fifo.size() >= params_.fifo_depth)
    {
        throw SimulationFault("FIFO overflow at router " + to_string(rt.pos));
    }
    Slot slot;
    slot.out = xy_next_hop(rt.pos, pkt.dst, rows_, cols_);
    slot.pkt = std::move(pkt);
    const std::uint64_t id = slot.pkt.id;
    const bool needs_pipeline = slot.out != Port::Local && params_.router_pipeline_cycles > 0;
    emit(NocTraceKind::Enter, slot.pkt, rt.pos, t);
    fifo.push_back(std::move(slot));
    stats_.max_fifo_occupancy = std::max<std::uint64_t>(stats_.max_fifo_occupancy, fifo.size());
    if (needs_pipeline)
    {
        domain(rt).after_cycles(t, params_.router_pipeline_cycles,
                                [this, router, in_port, vnet, id] { mark_ready(router, in_port, vnet, id, kernel_.now()); });
    }
    else
    {
        mark_ready(router, in_port, vnet, id, t);
    }
}

void Mesh::mark_ready(std::size_t router, Port in_port, std::uint32_t vnet, std::uint64_t packet, SimTime t)
{
    auto& fifo = routers_[router].in[idx(in_port)][vnet].fifo;
    for (auto& s : fifo)
    {
        if (s.pkt.id == packet && !s.ready)
        {
            s.ready = true;
            s.ready_at = t;
            s.ready_seq = ready_counter_++;
            break;
        }
    }
    if (!fifo.empty() && fifo.front().pkt.id == packet)
    {
        head_changed(router, in_port, vnet, t);
    }
}

void Mesh::head_changed(std::size_t router, Port in_port, std::uint32_t vnet, SimTime t)
{
    const auto& fifo = routers_[router].in[idx(in_port)][vnet].fifo;
    if (fifo.empty() || !fifo.front().ready)
    {
        return;
    }
    // A head that became head after its pipeline finished starts waiting now.
    Slot& head = routers_[router].in[idx(in_port)][vnet].fifo.front();
    if (head.ready_at < t)
    {
        head.ready_at = t;
    }
    request_arbitration(router, head.out, t);
}

void Mesh::request_arbitration(std::size_t router, Port out, SimTime t)
{
    Router& rt = routers_[router];
    if (rt.out_busy[idx(out)] || rt.arbitration_pending[idx(out)])
    {
        return;
    }
    ClockDomain& d = domain(rt);
    if (d.edge_after(t, 0) == t)
    {
        arbitrate(router, out, t);
        return;
    }
    rt.arbitration_pending[idx(out)] = true;
    d.after_cycles(t, 0, [this, router, out] {
        routers_[router].arbitration_pending[idx(out)] = false;
        arbitrate(router, out, kernel_.now());
    });
}

void Mesh::arbitrate(std::size_t router, Port out, SimTime t)
{
    Router& rt = routers_[router];
    if (rt.out_busy[idx(out)])
    {
        return;
    }
    const Slot* best = nullptr;
    std::size_t best_port = 0;
    std::uint32_t best_vnet = 0;
    for (std::size_t p = 0; p < kPortCount; ++p)
    {
        for (std::uint32_t v = 0; v < kVirtualNetworks; ++v)
        {
            const auto& fifo = rt.in[p][v].fifo;
            if (fifo.empty())
            {
                continue;
            }
            const Slot& head = fifo.front();
            if (!head.ready || head.out != out)
            {
                continue;
            }
            if (out != Port::Local && rt.credits[idx(out)][v] == 0)
            {
                continue;
            }
            if (best == nullptr || std::tie(head.ready_at, head.ready_seq) < std::tie(best->ready_at, best->ready_seq))
            {
                best = &head;
                best_port = p;
                best_vnet = v;
            }
        }
    }
    if (best == nullptr)
    {
        return;
    }

    ClockDomain& d = domain(rt);
    const std::uint64_t stall = d.waveform().edges_in(best->ready_at, t);
    stats_.max_stall_cycles = std::max(stats_.max_stall_cycles, stall);
    if (stall > params_.watchdog_cycles)
    {
        throw SimulationFault("NoC watchdog: packet " + std::to_string(best->pkt.id) + " stalled " +
                              std::to_string(stall) + " cycles at router " + to_string(rt.pos));
    }

    const Packet pkt = best->pkt;
    const Port in_port = static_cast<Port>(best_port);
    const std::uint32_t vnet = best_vnet;
    rt.out_busy[idx(out)] = true;

    if (out == Port::Local)
    {
        emit(NocTraceKind::Eject, pkt, rt.pos, t);
        d.after_cycles(t, pkt.size_flits, [this, router, in_port, vnet, pkt] {
            const SimTime now = kernel_.now();
            ++stats_.delivered;
            emit(NocTraceKind::Deliver, pkt, routers_[router].pos, now);
            routers_[router].out_busy[idx(Port::Local)] = false;
            release_input(router, in_port, vnet, now);
            if (deliver_)
            {
                deliver_(pkt, now);
            }
            arbitrate(router, Port::Local, now);
        });
        return;
    }

    --rt.credits[idx(out)][vnet];
    ++stats_.hops;
    emit(NocTraceKind::Depart, pkt, rt.pos, t);
    const std::size_t next = index(neighbor(rt.pos, out));
    const Port next_in = opposite(out);
    const IslandId src_island = rt.island;
    d.after_cycles(t, 1, [this, next, next_in, pkt, src_island] {
        const IslandId dst_island = routers_[next].island;
        clocks_.cross(src_island, dst_island, kernel_.now(),
                      [this, next, next_in, pkt] { arrive(next, next_in, pkt, kernel_.now()); });
    });
    d.after_cycles(t, pkt.size_flits, [this, router, in_port, vnet, out] {
        const SimTime now = kernel_.now();
        routers_[router].out_busy[idx(out)] = false;
        release_input(router, in_port, vnet, now);
        arbitrate(router, out, now);
    });
}

void Mesh::release_input(std::size_t router, Port in_port, std::uint32_t vnet, SimTime t)
{
    Router& rt = routers_[router];
    auto& fifo = rt.in[idx(in_port)][vnet].fifo;
    fifo.pop_front();
    if (in_port == Port::Local)
    {
        pump_interface(router, vnet, t);
    }
    else
    {
        const std::size_t up = index(neighbor(rt.pos, in_port));
        const Port up_out = opposite(in_port);
        ++routers_[up].credits[idx(up_out)][vnet];
        request_arbitration(up, up_out, t);
    }
    head_changed(router, in_port, vnet, t);
}

void Mesh::check_watchdog(SimTime now) const
{
    for (const auto& rt : routers_)
    {
        const ClockWaveform& w = clocks_.domain(rt.island).waveform();
        for (const auto& per_port : rt.in)
        {
            for (const auto& q : per_port)
            {
                if (q.fifo.empty() || !q.fifo.front().ready || q.fifo.front().ready_at > now)
                {
                    continue;
                }
                const std::uint64_t waited = w.edges_in(q.fifo.front().ready_at, now);
                if (waited > params_.watchdog_cycles)
                {
                    throw SimulationFault("NoC watchdog: packet " + std::to_string(q.fifo.front().pkt.id) +
                                          " stalled " + std::to_string(waited) + " cycles at router " +
                                          to_string(rt.pos));
                }
            }
        }
    }
}

void Mesh::arm_watchdog(SimTime t)
{
    if (watchdog_armed_)
    {
        return;
    }
    watchdog_armed_ = true;
    const std::uint64_t period = std::max<std::uint64_t>(1, params_.watchdog_cycles / 2);
    domain(routers_.front()).after_cycles(t, period, [this] {
        watchdog_armed_ = false;
        const SimTime now = kernel_.now();
        check_watchdog(now);
        if (in_flight() > 0)
        {
            arm_watchdog(now);
        }
    });
}

} // namespace vespa
