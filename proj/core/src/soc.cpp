#include "vespa/soc.hpp"

#include <algorithm>
#include <random>

namespace vespa
{

std::vector<IslandClockConfig> island_clock_configs(const SoCDescription& desc)
{
    std::vector<IslandClockConfig> out;
    for (const auto& isl : desc.islands)
    {
        IslandClockConfig c;
        c.id = isl.id;
        c.dfs = isl.clock.dfs;
        c.initial_hz = isl.clock.freq_hz;
        c.range = isl.clock.range;
        c.reconfig_latency = isl.clock.reconfig_latency;
        c.mode = isl.clock.mode;
        c.busy_policy = isl.clock.busy_policy;
        out.push_back(c);
    }
    return out;
}

Soc::Soc(const SoCDescription& desc, const SocOptions& options) : desc_(desc), options_(options)
{
    require_valid(desc_);
    clocks_ = std::make_unique<ClockTree>(kernel_, island_clock_configs(desc_), desc_.noc_params.resync_depth);

    std::vector<IslandId> router_islands;
    for (const auto& t : desc_.tiles)
    {
        router_islands.push_back(desc_.router_island(t.position));
    }
    mesh_ = std::make_unique<Mesh>(kernel_, *clocks_, desc_.rows, desc_.cols, std::move(router_islands),
                                   desc_.noc_params);
    mesh_->set_delivery([this](const Packet& p, SimTime t) { deliver(p, t); });

    const Position mem = desc_.mem_position();
    const RngStreams rng(options_.seed);
    Fabric& fabric = *this;
    for (const auto& spec : desc_.tiles)
    {
        ClockDomain& dom = clocks_->domain(desc_.tile_island(spec.position));
        switch (spec.kind)
        {
        case TileKind::Mem: {
            auto m = std::make_unique<MemTile>(spec, desc_.mem_service, dom, fabric);
            memory_ = m.get();
            tiles_.push_back(std::move(m));
            break;
        }
        case TileKind::Accel:
        case TileKind::Tg: {
            const AcceleratorProfile* prof = desc_.find_profile(spec.accel);
            auto m = std::make_unique<MraTile>(spec, *prof, dom, fabric, mem);
            if (spec.kind == TileKind::Tg)
            {
                m->set_looping(true, prof->items_per_invocation);
                m->set_enabled(false, SimTime::zero());
                if (spec.enabled_at_start)
                {
                    auto gen = rng.stream(static_cast<ComponentId>(desc_.tile_index(spec.position)));
                    const std::uint64_t jitter =
                        options_.tg_start_jitter_cycles == 0 ? 0 : gen() % options_.tg_start_jitter_cycles;
                    m->set_enabled(true, dom.edge_after(SimTime::zero(), jitter));
                }
            }
            tiles_.push_back(std::move(m));
            break;
        }
        case TileKind::Cpu:
        case TileKind::Io:
            tiles_.push_back(std::make_unique<StubTile>(spec, dom, fabric));
            break;
        }
    }

    std::vector<TileCounters*> counters;
    for (auto& t : tiles_)
    {
        counters.push_back(&t->counters());
    }
    registers_ = std::make_unique<RegisterMap>(std::move(counters), *clocks_, [this] { return kernel_.now(); });
}

Soc::~Soc() = default;

Tile& Soc::tile(Position p)
{
    return *tiles_.at(desc_.tile_index(p));
}

MraTile* Soc::mra(Position p)
{
    return dynamic_cast<MraTile*>(&tile(p));
}

MemTile& Soc::memory()
{
    return *memory_;
}

void Soc::start_invocation(Position p, std::uint64_t items, SimTime t)
{
    MraTile* m = mra(p);
    if (m == nullptr || m->kind() != TileKind::Accel)
    {
        throw std::invalid_argument("tile " + to_string(p) + " is not an accelerator tile");
    }
    ++pending_batches_;
    m->on_complete([this, m](const InvocationRecord&) {
        m->on_complete(nullptr);
        if (pending_batches_ > 0 && --pending_batches_ == 0 && stop_when_done_)
        {
            kernel_.stop();
        }
    });
    m->start_invocation(items, t);
}

void Soc::start_accelerators(SimTime t)
{
    for (const auto& spec : desc_.tiles)
    {
        if (spec.kind != TileKind::Accel || !spec.enabled_at_start)
        {
            continue;
        }
        MraTile* m = mra(spec.position);
        std::uint64_t items = options_.accel_items != 0 ? options_.accel_items : m->profile().items_per_invocation;
        if (options_.accel_budget_bytes != 0)
        {
            items = std::max<std::uint64_t>(1, options_.accel_budget_bytes / m->profile().bytes_read_per_item);
        }
        if (options_.loop_accelerators)
        {
            m->set_looping(true, items);
            m->start_invocation(items, t);
        }
        else
        {
            start_invocation(spec.position, items, t);
        }
    }
}

void Soc::tg_set_enabled(Position p, bool on, SimTime t)
{
    if (!desc_.in_grid(p) || desc_.tile_at(p).kind != TileKind::Tg)
    {
        throw std::invalid_argument("tile " + to_string(p) + " is not a traffic generator");
    }
    mra(p)->set_enabled(on, t);
}

std::vector<Position> Soc::traffic_generators() const
{
    return tg_positions(desc_);
}

void Soc::set_active_tgs(std::size_t count, SimTime t)
{
    const auto tgs = traffic_generators();
    for (std::size_t i = 0; i < tgs.size(); ++i)
    {
        MraTile* m = mra(tgs[i]);
        const bool on = i < count;
        if (m->enabled() != on)
        {
            m->set_enabled(on, t);
        }
    }
}

WriteOutcome Soc::write_frequency(IslandId island, FrequencyHz f, SimTime t)
{
    return clocks_->write_frequency(island, f, t);
}

RunSummary Soc::run_until(SimTime t_end)
{
    return kernel_.run_until(t_end);
}

bool Soc::run_to_completion(SimTime limit)
{
    if (pending_batches_ == 0)
    {
        return true;
    }
    stop_when_done_ = true;
    kernel_.run_until(limit);
    stop_when_done_ = false;
    return pending_batches_ == 0;
}

std::uint64_t Soc::memory_packets_in() const
{
    return memory_->packets_received();
}

void Soc::send(Packet p, SimTime t)
{
    const IslandId src = desc_.tile_island(p.src);
    const IslandId dst = mesh_->router_island(p.src);
    clocks_->cross(src, dst, t, [this, p = std::move(p)]() mutable { mesh_->inject(std::move(p), kernel_.now()); });
}

void Soc::deliver(const Packet& p, SimTime t)
{
    Tile& target = tile(p.dst);
    clocks_->cross(mesh_->router_island(p.dst), target.island(), t,
                   [this, &target, p] { target.receive(p, kernel_.now()); });
}

} // namespace vespa
