#include "vespa/tiles.hpp"

#include <algorithm>
#include <numeric>

namespace vespa
{

Tile::Tile(const TileSpec& spec, ClockDomain& domain, Fabric& fabric) : spec_(spec), domain_(domain), fabric_(fabric)
{
}

void Tile::receive(const Packet& p, SimTime /*t*/)
{
    throw SimulationFault(std::string(to_string(spec_.kind)) + " tile " + to_string(spec_.position) +
                          " cannot accept " + std::string(to_string(p.cls)) + " packets");
}

void Tile::send(Packet p, SimTime t)
{
    p.src = spec_.position;
    p.id = fabric_.next_packet_id();
    p.t_injected = t;
    counters_.count_out();
    fabric_.send(std::move(p), t);
}

// ---------------------------------------------------------------------------
// Bridge

std::optional<std::uint32_t> bridge_grant(std::uint32_t k, const std::vector<std::uint32_t>& pending,
                                          std::uint32_t last)
{
    if (pending.empty() || k == 0)
    {
        return std::nullopt;
    }
    std::optional<std::uint32_t> best;
    std::uint32_t best_distance = k + 1;
    for (std::uint32_t id : pending)
    {
        if (id >= k)
        {
            throw std::out_of_range("replica id " + std::to_string(id) + " >= K");
        }
        // Distance strictly after `last` in cyclic order: 1..k.
        const std::uint32_t distance = (id + k - (last % k) - 1) % k + 1;
        if (distance < best_distance)
        {
            best_distance = distance;
            best = id;
        }
    }
    return best;
}

AxiBridge::AxiBridge(ClockDomain& domain, std::uint32_t replicas) : domain_(domain), k_(replicas)
{
    if (replicas == 0)
    {
        throw std::invalid_argument("replication factor must be >= 1");
    }
    for (auto& ch : channels_)
    {
        ch.last = replicas - 1;
        ch.pending.resize(replicas);
        ch.grants.assign(replicas, 0);
    }
}

void AxiBridge::request(BridgeChannel ch, std::uint32_t replica, std::uint64_t cycles, std::function<void()> on_done)
{
    Channel& c = channels_.at(static_cast<std::size_t>(ch));
    if (replica >= k_)
    {
        throw SimulationFault("bridge request from replica " + std::to_string(replica) + " >= K");
    }
    if (c.pending[replica])
    {
        throw SimulationFault("replica " + std::to_string(replica) + " already has a pending burst on this channel");
    }
    c.pending[replica] = Pending{std::max<std::uint64_t>(1, cycles), std::move(on_done)};
    schedule(static_cast<std::size_t>(ch), domain_.kernel().now());
}

std::uint64_t AxiBridge::grants(BridgeChannel ch, std::uint32_t replica) const
{
    return channels_.at(static_cast<std::size_t>(ch)).grants.at(replica);
}

void AxiBridge::schedule(std::size_t ch, SimTime t)
{
    Channel& c = channels_[ch];
    if (c.busy || c.scheduled)
    {
        return;
    }
    c.scheduled = true;
    domain_.after_cycles(t, 0, [this, ch] {
        channels_[ch].scheduled = false;
        arbitrate(ch, domain_.kernel().now());
    });
}

void AxiBridge::arbitrate(std::size_t ch, SimTime t)
{
    Channel& c = channels_[ch];
    if (c.busy)
    {
        return;
    }
    std::vector<std::uint32_t> ids;
    for (std::uint32_t i = 0; i < k_; ++i)
    {
        if (c.pending[i])
        {
            ids.push_back(i);
        }
    }
    const auto winner = bridge_grant(k_, ids, c.last);
    if (!winner)
    {
        return;
    }
    Pending job = std::move(*c.pending[*winner]);
    c.pending[*winner].reset();
    c.last = *winner;
    c.busy = true;
    ++c.grants[*winner];
    domain_.after_cycles(t, job.cycles, [this, ch, done = std::move(job.on_done)] {
        channels_[ch].busy = false;
        done();
        arbitrate(ch, domain_.kernel().now());
    });
}

// ---------------------------------------------------------------------------
// Replica state machine

std::string_view to_string(ReplicaState s) noexcept
{
    switch (s)
    {
    case ReplicaState::Idle:
        return "Idle";
    case ReplicaState::IssueRead:
        return "IssueRead";
    case ReplicaState::AwaitData:
        return "AwaitData";
    case ReplicaState::Compute:
        return "Compute";
    case ReplicaState::IssueWrite:
        return "IssueWrite";
    case ReplicaState::Draining:
        return "Draining";
    case ReplicaState::Done:
        return "Done";
    }
    return "?";
}

namespace
{
[[noreturn]] void protocol_violation(const ReplicaFsm& r, const char* what)
{
    throw SimulationFault(std::string("replica protocol violation: ") + what + " in state " +
                          std::string(to_string(r.state)));
}

ReplicaOutput next_chunk(ReplicaFsm& r, const AcceleratorProfile& p)
{
    r.chunk_items = std::min(r.items_remaining, p.items_per_chunk());
    r.items_remaining -= r.chunk_items;
    r.state = ReplicaState::IssueRead;
    return ReplicaOutput{r.state, PacketClass::RdCtrl, 0};
}
} // namespace

ReplicaOutput replica_step(ReplicaFsm& r, ReplicaEvent ev, const AcceleratorProfile& p)
{
    switch (ev)
    {
    case ReplicaEvent::Start:
        if (r.state != ReplicaState::Idle && r.state != ReplicaState::Done)
        {
            protocol_violation(r, "start");
        }
        r.acks_outstanding = 0;
        if (r.items_remaining == 0)
        {
            r.state = ReplicaState::Done;
            return ReplicaOutput{r.state, std::nullopt, 0};
        }
        return next_chunk(r, p);
    case ReplicaEvent::ReadIssued:
        if (r.state != ReplicaState::IssueRead)
        {
            protocol_violation(r, "read descriptor accepted");
        }
        r.state = ReplicaState::AwaitData;
        return ReplicaOutput{r.state, std::nullopt, 0};
    case ReplicaEvent::DataArrived: {
        if (r.state != ReplicaState::AwaitData)
        {
            protocol_violation(r, "read data arrived");
        }
        const std::uint64_t cycles = p.compute_cycles_per_item * r.chunk_items;
        if (cycles == 0)
        {
            r.state = ReplicaState::IssueWrite;
            return ReplicaOutput{r.state, PacketClass::WrCtrl, 0};
        }
        r.state = ReplicaState::Compute;
        return ReplicaOutput{r.state, std::nullopt, cycles};
    }
    case ReplicaEvent::ComputeDone:
        if (r.state != ReplicaState::Compute)
        {
            protocol_violation(r, "compute done");
        }
        r.state = ReplicaState::IssueWrite;
        return ReplicaOutput{r.state, PacketClass::WrCtrl, 0};
    case ReplicaEvent::WriteIssued:
        if (r.state != ReplicaState::IssueWrite)
        {
            protocol_violation(r, "write issued");
        }
        ++r.acks_outstanding;
        ++r.chunks_done;
        if (r.items_remaining > 0)
        {
            return next_chunk(r, p);
        }
        r.state = ReplicaState::Draining;
        return ReplicaOutput{r.state, std::nullopt, 0};
    case ReplicaEvent::WriteAck:
        if (r.acks_outstanding == 0)
        {
            protocol_violation(r, "unexpected write ack");
        }
        --r.acks_outstanding;
        if (r.state == ReplicaState::Draining && r.acks_outstanding == 0)
        {
            r.state = ReplicaState::Done;
        }
        return ReplicaOutput{r.state, std::nullopt, 0};
    case ReplicaEvent::Stop:
        r.items_remaining = 0;
        return ReplicaOutput{r.state, std::nullopt, 0};
    }
    return ReplicaOutput{r.state, std::nullopt, 0};
}

std::vector<std::uint64_t> split_items(std::uint64_t items, std::uint32_t k)
{
    if (k == 0)
    {
        throw std::invalid_argument("replication factor must be >= 1");
    }
    std::vector<std::uint64_t> out(k, items / k);
    for (std::uint64_t i = 0; i < items % k; ++i)
    {
        ++out[i];
    }
    return out;
}

// ---------------------------------------------------------------------------
// MraTile

MraTile::MraTile(const TileSpec& spec, const AcceleratorProfile& profile, ClockDomain& domain, Fabric& fabric,
                 Position memory)
    : Tile(spec, domain, fabric), profile_(profile), k_(spec.replication), memory_(memory), bridge_(domain, k_),
      replicas_(k_), read_issue_(k_)
{
    if (spec.read_buffer_depth == 0 || spec.stream_width_bytes == 0)
    {
        throw std::invalid_argument("tile buffers must be non-empty");
    }
}

std::uint64_t MraTile::stream_cycles(std::uint64_t bytes) const noexcept
{
    return std::max<std::uint64_t>(1, (bytes + spec_.stream_width_bytes - 1) / spec_.stream_width_bytes);
}

void MraTile::start_invocation(std::uint64_t items, SimTime t)
{
    if (running_)
    {
        throw std::logic_error("tile " + to_string(spec_.position) + " is already running an invocation");
    }
    running_ = true;
    domain_.after_cycles(t, 0, [this, items] { begin(items, domain_.kernel().now()); });
}

void MraTile::set_looping(bool on, std::uint64_t items_per_invocation)
{
    if (on && items_per_invocation == 0)
    {
        throw std::invalid_argument("looping invocations need at least one item");
    }
    looping_ = on;
    loop_items_ = items_per_invocation;
}

void MraTile::set_enabled(bool on, SimTime t)
{
    enabled_ = on;
    if (on)
    {
        if (looping_ && !running_)
        {
            start_invocation(loop_items_, t);
        }
        return;
    }
    for (auto& r : replicas_)
    {
        replica_step(r, ReplicaEvent::Stop, profile_);
    }
}

void MraTile::begin(std::uint64_t items, SimTime t)
{
    current_ = InvocationRecord{};
    current_.start = t;
    counters_.exec_start();
    if (items == 0 || !enabled_)
    {
        finish(t);
        return;
    }
    const auto shares = split_items(items, k_);
    for (std::uint32_t i = 0; i < k_; ++i)
    {
        replicas_[i].items_remaining = shares[i];
        replicas_[i].state = ReplicaState::Idle;
    }
    for (std::uint32_t i = 0; i < k_; ++i)
    {
        apply(i, ReplicaEvent::Start, t);
    }
}

void MraTile::apply(std::uint32_t i, ReplicaEvent ev, SimTime t)
{
    const ReplicaOutput out = replica_step(replicas_[i], ev, profile_);
    if (out.emit == PacketClass::RdCtrl)
    {
        const std::uint64_t bytes = replicas_[i].chunk_items * profile_.bytes_read_per_item;
        bridge_.request(BridgeChannel::RdCtrl, i, 1, [this, i, bytes] {
            const SimTime now = domain_.kernel().now();
            ++rdctrl_descriptors_;
            rdctrl_queue_.emplace_back(i, bytes);
            apply(i, ReplicaEvent::ReadIssued, now);
            pump_reads(now);
        });
    }
    else if (out.emit == PacketClass::WrCtrl)
    {
        const std::uint64_t bytes = replicas_[i].chunk_items * profile_.bytes_written_per_item;
        bridge_.request(BridgeChannel::WrCtrl, i, 1, [this, i, bytes] {
            ++wrctrl_descriptors_;
            bridge_.request(BridgeChannel::WrData, i, stream_cycles(bytes), [this, i, bytes] {
                const SimTime now = domain_.kernel().now();
                Packet p;
                p.cls = PacketClass::WrData;
                p.dst = memory_;
                p.payload_bytes = static_cast<std::uint32_t>(bytes);
                p.size_flits = flits_for(p.payload_bytes, fabric_.link_width());
                p.tag = i;
                bytes_written_ += bytes;
                current_.bytes_out += bytes;
                ++chunks_completed_;
                send(std::move(p), now);
                apply(i, ReplicaEvent::WriteIssued, now);
            });
        });
    }
    else if (out.state == ReplicaState::Compute && out.compute_cycles > 0)
    {
        domain_.after_cycles(t, out.compute_cycles,
                             [this, i] { apply(i, ReplicaEvent::ComputeDone, domain_.kernel().now()); });
    }

    if (running_ && std::all_of(replicas_.begin(), replicas_.end(),
                                [](const ReplicaFsm& r) { return r.state == ReplicaState::Done; }))
    {
        finish(t);
    }
}

void MraTile::pump_reads(SimTime t)
{
    while (!rdctrl_queue_.empty() && reads_outstanding_ < spec_.read_buffer_depth)
    {
        const auto [replica, bytes] = rdctrl_queue_.front();
        rdctrl_queue_.pop_front();
        ++reads_outstanding_;
        Packet p;
        p.cls = PacketClass::MemReq;
        p.dst = memory_;
        p.payload_bytes = 0;
        p.request_bytes = static_cast<std::uint32_t>(bytes);
        p.size_flits = flits_for(0, fabric_.link_width());
        p.tag = replica;
        read_issue_[replica] = t;
        send(std::move(p), t);
    }
}

void MraTile::receive(const Packet& p, SimTime t)
{
    counters_.count_in();
    if (p.tag >= k_)
    {
        throw SimulationFault("response for unknown replica " + std::to_string(p.tag));
    }
    const std::uint32_t i = p.tag;
    switch (p.cls)
    {
    case PacketClass::RdData: {
        if (replicas_[i].state != ReplicaState::AwaitData)
        {
            throw SimulationFault("read data for replica " + std::to_string(i) + " in state " +
                                  std::string(to_string(replicas_[i].state)));
        }
        counters_.record_rtt(read_issue_[i], t);
        bytes_read_ += p.payload_bytes;
        current_.bytes_in += p.payload_bytes;
        bridge_.request(BridgeChannel::RdData, i, stream_cycles(p.payload_bytes), [this, i] {
            const SimTime now = domain_.kernel().now();
            --reads_outstanding_;
            apply(i, ReplicaEvent::DataArrived, now);
            pump_reads(now);
        });
        break;
    }
    case PacketClass::MemResp:
        apply(i, ReplicaEvent::WriteAck, t);
        break;
    default:
        Tile::receive(p, t);
    }
}

void MraTile::finish(SimTime t)
{
    current_.end = t;
    current_.exec_cycles = domain_.waveform().edges_in(current_.start, t);
    current_.items = profile_.bytes_read_per_item == 0 ? 0 : current_.bytes_in / profile_.bytes_read_per_item;
    counters_.exec_stop(current_.exec_cycles);
    records_.push_back(current_);
    running_ = false;
    if (complete_cb_)
    {
        // The callback may replace itself.
        auto cb = complete_cb_;
        cb(records_.back());
    }
    if (looping_ && enabled_ && !running_)
    {
        start_invocation(loop_items_, t);
    }
}

double MraTile::throughput_mbps() const
{
    std::uint64_t bytes = 0;
    std::uint64_t fs = 0;
    for (const auto& r : records_)
    {
        bytes += r.items * profile_.bytes_read_per_item;
        fs += (r.end - r.start).fs;
    }
    if (fs == 0)
    {
        return 0.0;
    }
    return static_cast<double>(bytes) / (static_cast<double>(fs) / 1e15) / 1e6;
}

// ---------------------------------------------------------------------------
// MemTile

MemTile::MemTile(const TileSpec& spec, const MemModel& model, ClockDomain& domain, Fabric& fabric)
    : Tile(spec, domain, fabric), model_(model)
{
    if (model.bytes_per_cycle == 0)
    {
        throw std::invalid_argument("memory bandwidth must be positive");
    }
}

std::uint64_t MemTile::occupancy_cycles(std::uint64_t bytes) const noexcept
{
    return std::max<std::uint64_t>(1, (bytes + model_.bytes_per_cycle - 1) / model_.bytes_per_cycle);
}

double MemTile::busy_fraction(SimTime now) const
{
    const std::uint64_t cycles = domain_.waveform().edges_in(SimTime::zero(), now);
    return cycles == 0 ? 0.0 : std::min(1.0, static_cast<double>(busy_cycles_) / static_cast<double>(cycles));
}

void MemTile::receive(const Packet& p, SimTime t)
{
    if (p.cls != PacketClass::MemReq && p.cls != PacketClass::WrData)
    {
        Tile::receive(p, t);
    }
    counters_.count_in();
    ++received_;
    if (p.cls == PacketClass::WrData)
    {
        written_by_[p.src] += p.payload_bytes;
    }
    queue_.push_back(p);
    domain_.after_cycles(t, model_.latency_cycles, [this] {
        ++latency_elapsed_;
        try_start(domain_.kernel().now());
    });
}

void MemTile::try_start(SimTime t)
{
    if (bus_busy_ || latency_elapsed_ == 0)
    {
        return;
    }
    Packet req = std::move(queue_.front());
    queue_.pop_front();
    --latency_elapsed_;
    const std::uint64_t bytes = req.cls == PacketClass::MemReq ? req.request_bytes : req.payload_bytes;
    const std::uint64_t occ = occupancy_cycles(bytes);
    busy_cycles_ += occ;
    bus_busy_ = true;
    domain_.after_cycles(t, occ, [this, req = std::move(req)] {
        const SimTime now = domain_.kernel().now();
        bus_busy_ = false;
        ++served_;
        respond(req, now);
        try_start(now);
    });
}

void MemTile::respond(const Packet& req, SimTime t)
{
    Packet p;
    p.dst = req.src;
    p.tag = req.tag;
    if (req.cls == PacketClass::MemReq)
    {
        p.cls = PacketClass::RdData;
        p.payload_bytes = req.request_bytes;
    }
    else
    {
        p.cls = PacketClass::MemResp;
        p.payload_bytes = 0;
    }
    p.size_flits = flits_for(p.payload_bytes, fabric_.link_width());
    send(std::move(p), t);
}

} // namespace vespa
