#pragma once

#include "vespa/clocking.hpp"
#include "vespa/config.hpp"
#include "vespa/engine.hpp"
#include "vespa/monitor.hpp"
#include "vespa/noc.hpp"

#include <array>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <vector>

namespace vespa
{

/// What tiles see of the interconnect. `send` takes a time in the sending
/// tile's clock domain; the fabric applies the crossing into the router.
class Fabric
{
public:
    virtual ~Fabric() = default;
    virtual void send(Packet p, SimTime t) = 0;
    virtual std::uint64_t next_packet_id() = 0;
    virtual std::uint32_t link_width() const = 0;
};

class Tile
{
public:
    Tile(const TileSpec& spec, ClockDomain& domain, Fabric& fabric);
    virtual ~Tile() = default;
    Tile(const Tile&) = delete;
    Tile& operator=(const Tile&) = delete;

    /// Delivery of a packet at time t (tile clock domain).
    virtual void receive(const Packet& p, SimTime t);

    const TileSpec& spec() const noexcept { return spec_; }
    Position position() const noexcept { return spec_.position; }
    TileKind kind() const noexcept { return spec_.kind; }
    IslandId island() const noexcept { return domain_.id(); }
    TileCounters& counters() noexcept { return counters_; }
    const TileCounters& counters() const noexcept { return counters_; }

protected:
    /// Stamps, counts and sends a packet built by this tile.
    void send(Packet p, SimTime t);

    TileSpec spec_;
    ClockDomain& domain_;
    Fabric& fabric_;
    TileCounters counters_;
};

/// CPU and IO tiles: they own monitor registers and nothing else.
class StubTile : public Tile
{
public:
    using Tile::Tile;
};

// ---------------------------------------------------------------------------
// Bridge

enum class BridgeChannel : std::uint8_t
{
    RdCtrl,
    WrCtrl,
    RdData,
    WrData,
};

inline constexpr std::size_t kBridgeChannels = 4;

/// Round-robin choice: the first pending id strictly after `last` in cyclic
/// order over [0, k). `pending` may be unsorted.
std::optional<std::uint32_t> bridge_grant(std::uint32_t k, const std::vector<std::uint32_t>& pending,
                                          std::uint32_t last);

/// Multiplexes the four stream interfaces of K replicas onto the tile's four
/// buffers. One grant per channel holds for one burst of `cycles` tile cycles.
class AxiBridge
{
public:
    AxiBridge(ClockDomain& domain, std::uint32_t replicas);

    /// Queues a burst of `cycles` tile cycles for `replica` on `ch`;
    /// `on_done` runs when the burst has moved. One pending burst per
    /// (channel, replica).
    void request(BridgeChannel ch, std::uint32_t replica, std::uint64_t cycles, std::function<void()> on_done);

    std::uint64_t grants(BridgeChannel ch, std::uint32_t replica) const;
    std::uint32_t replicas() const noexcept { return k_; }

private:
    struct Pending
    {
        std::uint64_t cycles = 0;
        std::function<void()> on_done;
    };
    struct Channel
    {
        std::uint32_t last = 0;
        bool busy = false;
        bool scheduled = false;
        std::vector<std::optional<Pending>> pending;
        std::vector<std::uint64_t> grants;
    };

    void schedule(std::size_t ch, SimTime t);
    void arbitrate(std::size_t ch, SimTime t);

    ClockDomain& domain_;
    std::uint32_t k_;
    std::array<Channel, kBridgeChannels> channels_;
};

// ---------------------------------------------------------------------------
// Replica state machine

enum class ReplicaState : std::uint8_t
{
    Idle,
    IssueRead,
    AwaitData,
    Compute,
    IssueWrite,
    Draining,
    Done,
};

std::string_view to_string(ReplicaState s) noexcept;

enum class ReplicaEvent : std::uint8_t
{
    Start,       ///< work assigned (items_remaining set beforehand)
    ReadIssued,  ///< RdCtrl descriptor accepted by the bridge
    DataArrived, ///< read burst streamed into the replica
    ComputeDone,
    WriteIssued, ///< output burst handed to the tile as a WrData packet
    WriteAck,    ///< MemResp for one earlier write
    Stop,        ///< no further chunks after the current one
};

struct ReplicaFsm
{
    ReplicaState state = ReplicaState::Idle;
    std::uint64_t items_remaining = 0;
    std::uint64_t chunk_items = 0;
    std::uint64_t acks_outstanding = 0;
    std::uint64_t chunks_done = 0;
};

struct ReplicaOutput
{
    ReplicaState state = ReplicaState::Idle;
    /// Descriptor the replica wants to emit (RdCtrl or WrCtrl).
    std::optional<PacketClass> emit;
    /// Cycles of the compute phase just entered (0 when not entering Compute).
    std::uint64_t compute_cycles = 0;
};

/// Pure transition function of one replica. Illegal stimuli throw
/// SimulationFault.
ReplicaOutput replica_step(ReplicaFsm& r, ReplicaEvent ev, const AcceleratorProfile& profile);

/// Round-robin split of `items` over `k` replicas (first replicas get the remainder).
std::vector<std::uint64_t> split_items(std::uint64_t items, std::uint32_t k);

// ---------------------------------------------------------------------------
// Multi-replica accelerator tile (also used for traffic generators)

struct InvocationRecord
{
    SimTime start;
    SimTime end;
    std::uint64_t items = 0;
    std::uint64_t bytes_in = 0;
    std::uint64_t bytes_out = 0;
    std::uint64_t exec_cycles = 0;
};

class MraTile : public Tile
{
public:
    MraTile(const TileSpec& spec, const AcceleratorProfile& profile, ClockDomain& domain, Fabric& fabric,
            Position memory);

    /// Splits `items` round-robin across the replicas at the first tile edge
    /// at or after t. Requires the tile to be idle.
    void start_invocation(std::uint64_t items, SimTime t);

    /// Loop mode: start the next invocation as soon as one completes.
    void set_looping(bool on, std::uint64_t items_per_invocation);
    /// Traffic-generator switch. Disabling lets chunks in flight finish.
    void set_enabled(bool on, SimTime t);
    bool enabled() const noexcept { return enabled_; }

    void receive(const Packet& p, SimTime t) override;

    bool busy() const noexcept { return running_; }
    const std::vector<InvocationRecord>& invocations() const noexcept { return records_; }
    const AcceleratorProfile& profile() const noexcept { return profile_; }
    std::uint32_t replication() const noexcept { return k_; }
    const AxiBridge& bridge() const noexcept { return bridge_; }
    const ReplicaFsm& replica(std::uint32_t i) const { return replicas_.at(i); }

    std::uint64_t rdctrl_descriptors() const noexcept { return rdctrl_descriptors_; }
    std::uint64_t wrctrl_descriptors() const noexcept { return wrctrl_descriptors_; }
    std::uint64_t bytes_read() const noexcept { return bytes_read_; }
    std::uint64_t bytes_written() const noexcept { return bytes_written_; }
    std::uint64_t chunks_completed() const noexcept { return chunks_completed_; }

    /// Input bytes over execution wall time of the completed invocations, in MB/s.
    double throughput_mbps() const;

    void on_complete(std::function<void(const InvocationRecord&)> cb) { complete_cb_ = std::move(cb); }

private:
    void begin(std::uint64_t items, SimTime t);
    void apply(std::uint32_t replica, ReplicaEvent ev, SimTime t);
    void pump_reads(SimTime t);
    void finish(SimTime t);
    std::uint64_t stream_cycles(std::uint64_t bytes) const noexcept;

    AcceleratorProfile profile_;
    std::uint32_t k_;
    Position memory_;
    AxiBridge bridge_;
    std::vector<ReplicaFsm> replicas_;
    std::vector<SimTime> read_issue_;
    std::deque<std::pair<std::uint32_t, std::uint64_t>> rdctrl_queue_;
    std::uint32_t reads_outstanding_ = 0;

    bool running_ = false;
    bool looping_ = false;
    bool enabled_ = true;
    std::uint64_t loop_items_ = 0;
    InvocationRecord current_;
    std::vector<InvocationRecord> records_;
    std::function<void(const InvocationRecord&)> complete_cb_;

    std::uint64_t rdctrl_descriptors_ = 0;
    std::uint64_t wrctrl_descriptors_ = 0;
    std::uint64_t bytes_read_ = 0;
    std::uint64_t bytes_written_ = 0;
    std::uint64_t chunks_completed_ = 0;
};

// ---------------------------------------------------------------------------
// Memory tile

/// Pipelined memory controller: each request waits a fixed latency, then
/// holds the single data bus for ceil(bytes / bytes_per_cycle) cycles in
/// arrival order. Reads answer with RdData, writes with a MemResp ack.
class MemTile : public Tile
{
public:
    MemTile(const TileSpec& spec, const MemModel& model, ClockDomain& domain, Fabric& fabric);

    void receive(const Packet& p, SimTime t) override;

    /// Memory-clock cycles a request of `bytes` holds the data bus.
    std::uint64_t occupancy_cycles(std::uint64_t bytes) const noexcept;

    std::uint64_t busy_cycles() const noexcept { return busy_cycles_; }
    double busy_fraction(SimTime now) const;
    std::uint64_t packets_received() const noexcept { return received_; }
    std::uint64_t queue_length() const noexcept { return queue_.size(); }
    /// Bytes written by each requester position.
    const std::map<Position, std::uint64_t>& bytes_written_by() const noexcept { return written_by_; }
    std::uint64_t requests_served() const noexcept { return served_; }

private:
    void try_start(SimTime t);
    void respond(const Packet& req, SimTime t);

    MemModel model_;
    std::deque<Packet> queue_;
    /// Requests at the head of the queue whose fixed latency has elapsed.
    std::uint64_t latency_elapsed_ = 0;
    bool bus_busy_ = false;
    std::uint64_t busy_cycles_ = 0;
    std::uint64_t received_ = 0;
    std::uint64_t served_ = 0;
    std::map<Position, std::uint64_t> written_by_;
};

} // namespace vespa
