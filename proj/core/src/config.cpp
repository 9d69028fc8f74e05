#include "vespa/config.hpp"

#include "vespa/profiles.hpp"

#include "json_schema.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace vespa
{

using nlohmann::json;

std::string to_string(Position p)
{
    return "(" + std::to_string(p.row) + "," + std::to_string(p.col) + ")";
}

std::string_view to_string(TileKind k) noexcept
{
    switch (k)
    {
    case TileKind::Cpu:
        return "CPU";
    case TileKind::Mem:
        return "MEM";
    case TileKind::Io:
        return "IO";
    case TileKind::Accel:
        return "ACCEL";
    case TileKind::Tg:
        return "TG";
    }
    return "?";
}

std::string_view to_string(Boundedness b) noexcept
{
    return b == Boundedness::ComputeBound ? "compute_bound" : "memory_bound";
}

std::uint64_t AcceleratorProfile::items_per_chunk() const noexcept
{
    if (bytes_read_per_item == 0)
    {
        return 1;
    }
    return std::max<std::uint64_t>(1, burst_bytes / bytes_read_per_item);
}

// ---------------------------------------------------------------------------
// SoCDescription accessors

bool SoCDescription::in_grid(Position p) const noexcept
{
    return p.row >= 0 && p.col >= 0 && p.row < rows && p.col < cols;
}

std::size_t SoCDescription::tile_index(Position p) const
{
    if (!in_grid(p))
    {
        throw std::out_of_range("position " + to_string(p) + " outside grid");
    }
    return static_cast<std::size_t>(p.row) * static_cast<std::size_t>(cols) + static_cast<std::size_t>(p.col);
}

const TileSpec& SoCDescription::tile_at(Position p) const
{
    return tiles.at(tile_index(p));
}

TileSpec& SoCDescription::tile_at(Position p)
{
    return tiles.at(tile_index(p));
}

IslandId SoCDescription::tile_island(Position p) const
{
    for (const auto& isl : islands)
    {
        if (std::find(isl.tiles.begin(), isl.tiles.end(), p) != isl.tiles.end())
        {
            return isl.id;
        }
    }
    throw std::out_of_range("tile " + to_string(p) + " not in any island");
}

IslandId SoCDescription::router_island(Position p) const
{
    for (const auto& isl : islands)
    {
        if (std::find(isl.routers.begin(), isl.routers.end(), p) != isl.routers.end())
        {
            return isl.id;
        }
    }
    throw std::out_of_range("router " + to_string(p) + " not in any island");
}

const IslandSpec& SoCDescription::island(IslandId id) const
{
    for (const auto& isl : islands)
    {
        if (isl.id == id)
        {
            return isl;
        }
    }
    throw std::out_of_range("unknown island " + std::to_string(id));
}

IslandSpec& SoCDescription::island(IslandId id)
{
    return const_cast<IslandSpec&>(std::as_const(*this).island(id));
}

const AcceleratorProfile* SoCDescription::find_profile(std::string_view name) const
{
    for (const auto& p : profiles)
    {
        if (p.name == name)
        {
            return &p;
        }
    }
    return nullptr;
}

std::optional<Position> SoCDescription::find_named(std::string_view name) const
{
    for (const auto& t : tiles)
    {
        if (!t.name.empty() && t.name == name)
        {
            return t.position;
        }
    }
    return std::nullopt;
}

Position SoCDescription::mem_position() const
{
    for (const auto& t : tiles)
    {
        if (t.kind == TileKind::Mem)
        {
            return t.position;
        }
    }
    throw std::out_of_range("no MEM tile");
}

// ---------------------------------------------------------------------------
// Parsing

namespace
{

using namespace schema;

TileKind parse_kind(const std::string& s, const std::string& where)
{
    static const std::map<std::string, TileKind, std::less<>> kinds{
        {"CPU", TileKind::Cpu}, {"MEM", TileKind::Mem}, {"IO", TileKind::Io},
        {"ACCEL", TileKind::Accel}, {"TG", TileKind::Tg}};
    auto it = kinds.find(s);
    if (it == kinds.end())
    {
        schema_error(where, "unknown tile kind '" + s + "'");
    }
    return it->second;
}

TileSpec parse_tile(const json& j, const std::string& where)
{
    reject_unknown(j, where,
                   {"pos", "kind", "name", "accel", "replication", "enabled_at_start", "read_buffer_depth",
                    "stream_width_bytes"});
    TileSpec t;
    t.position = get_position(required(j, where, "pos"), where + ".pos");
    t.kind = parse_kind(get_string(required(j, where, "kind"), where + ".kind"), where + ".kind");
    if (auto it = j.find("name"); it != j.end())
    {
        t.name = get_string(*it, where + ".name");
    }
    if (auto it = j.find("accel"); it != j.end())
    {
        t.accel = get_string(*it, where + ".accel");
    }
    t.replication = opt_number<std::uint32_t>(j, where, "replication", 1);
    if (auto it = j.find("enabled_at_start"); it != j.end())
    {
        t.enabled_at_start = get_bool(*it, where + ".enabled_at_start");
    }
    t.read_buffer_depth = opt_number<std::uint32_t>(j, where, "read_buffer_depth", 1);
    t.stream_width_bytes = opt_number<std::uint32_t>(j, where, "stream_width_bytes", 8);
    return t;
}

ClockSpec parse_clock(const json& j, const std::string& where)
{
    const std::string type = get_string(required(j, where, "type"), where + ".type");
    ClockSpec c;
    if (type == "fixed")
    {
        reject_unknown(j, where, {"type", "freq_hz"});
        c.dfs = false;
        c.freq_hz = get_number<FrequencyHz>(required(j, where, "freq_hz"), where + ".freq_hz");
        return c;
    }
    if (type != "dfs")
    {
        schema_error(where + ".type", "expected 'fixed' or 'dfs'");
    }
    reject_unknown(j, where,
                   {"type", "initial_hz", "min_hz", "max_hz", "step_hz", "reconfig_latency_fs", "mode", "busy_policy"});
    c.dfs = true;
    c.freq_hz = get_number<FrequencyHz>(required(j, where, "initial_hz"), where + ".initial_hz");
    c.range.min_hz = get_number<FrequencyHz>(required(j, where, "min_hz"), where + ".min_hz");
    c.range.max_hz = get_number<FrequencyHz>(required(j, where, "max_hz"), where + ".max_hz");
    c.range.step_hz = get_number<FrequencyHz>(required(j, where, "step_hz"), where + ".step_hz");
    c.reconfig_latency =
        SimTime{opt_number<std::uint64_t>(j, where, "reconfig_latency_fs", SimTime::from_us(10).fs)};
    if (auto it = j.find("mode"); it != j.end())
    {
        const std::string m = get_string(*it, where + ".mode");
        if (m == "dual")
        {
            c.mode = ActuatorMode::DualOscillator;
        }
        else if (m == "naive")
        {
            c.mode = ActuatorMode::NaiveSingle;
        }
        else
        {
            schema_error(where + ".mode", "expected 'dual' or 'naive'");
        }
    }
    if (auto it = j.find("busy_policy"); it != j.end())
    {
        const std::string m = get_string(*it, where + ".busy_policy");
        if (m == "reject")
        {
            c.busy_policy = BusyPolicy::Reject;
        }
        else if (m == "queue")
        {
            c.busy_policy = BusyPolicy::Queue;
        }
        else
        {
            schema_error(where + ".busy_policy", "expected 'reject' or 'queue'");
        }
    }
    return c;
}

std::vector<Position> parse_positions(const json& j, const std::string& where, int rows, int cols)
{
    std::vector<Position> out;
    if (j.is_string() && j.get<std::string>() == "all")
    {
        for (int r = 0; r < rows; ++r)
        {
            for (int c = 0; c < cols; ++c)
            {
                out.push_back(Position{r, c});
            }
        }
        return out;
    }
    if (!j.is_array())
    {
        schema_error(where, "expected a list of [row, col] or \"all\"");
    }
    for (std::size_t i = 0; i < j.size(); ++i)
    {
        out.push_back(get_position(j[i], where + "[" + std::to_string(i) + "]"));
    }
    return out;
}

IslandSpec parse_island(const json& j, const std::string& where, int rows, int cols)
{
    reject_unknown(j, where, {"id", "name", "tiles", "routers", "clock"});
    IslandSpec isl;
    isl.id = get_number<IslandId>(required(j, where, "id"), where + ".id");
    if (auto it = j.find("name"); it != j.end())
    {
        isl.name = get_string(*it, where + ".name");
    }
    if (auto it = j.find("tiles"); it != j.end())
    {
        isl.tiles = parse_positions(*it, where + ".tiles", rows, cols);
    }
    if (auto it = j.find("routers"); it != j.end())
    {
        isl.routers = parse_positions(*it, where + ".routers", rows, cols);
    }
    isl.clock = parse_clock(required(j, where, "clock"), where + ".clock");
    return isl;
}

AcceleratorProfile parse_profile(const json& j, const std::string& where)
{
    reject_unknown(j, where,
                   {"name", "items_per_invocation", "bytes_read_per_item", "bytes_written_per_item",
                    "compute_cycles_per_item", "burst_bytes", "boundedness"});
    AcceleratorProfile p;
    p.name = get_string(required(j, where, "name"), where + ".name");
    p.items_per_invocation = get_number<std::uint64_t>(required(j, where, "items_per_invocation"),
                                                       where + ".items_per_invocation");
    p.bytes_read_per_item =
        get_number<std::uint32_t>(required(j, where, "bytes_read_per_item"), where + ".bytes_read_per_item");
    p.bytes_written_per_item = get_number<std::uint32_t>(required(j, where, "bytes_written_per_item"),
                                                         where + ".bytes_written_per_item");
    p.compute_cycles_per_item = get_number<std::uint64_t>(required(j, where, "compute_cycles_per_item"),
                                                          where + ".compute_cycles_per_item");
    p.burst_bytes = get_number<std::uint32_t>(required(j, where, "burst_bytes"), where + ".burst_bytes");
    if (auto it = j.find("boundedness"); it != j.end())
    {
        const std::string b = get_string(*it, where + ".boundedness");
        if (b == "compute_bound")
        {
            p.boundedness = Boundedness::ComputeBound;
        }
        else if (b == "memory_bound")
        {
            p.boundedness = Boundedness::MemoryBound;
        }
        else
        {
            schema_error(where + ".boundedness", "expected 'compute_bound' or 'memory_bound'");
        }
    }
    return p;
}

json position_json(Position p)
{
    return json::array({p.row, p.col});
}

} // namespace

SoCDescription load_description(std::string_view text)
{
    json doc;
    try
    {
        doc = json::parse(text.begin(), text.end());
    }
    catch (const json::parse_error& e)
    {
        throw ConfigError(std::string("parse error: ") + e.what());
    }
    reject_unknown(doc, "$", {"schema_version", "grid", "tiles", "islands", "noc", "memory", "profiles"});
    const int version = get_number<int>(required(doc, "$", "schema_version"), "$.schema_version");
    if (version != kSchemaVersion)
    {
        schema_error("$.schema_version", "unsupported version " + std::to_string(version));
    }

    SoCDescription d;
    const json& grid = required(doc, "$", "grid");
    reject_unknown(grid, "$.grid", {"rows", "cols"});
    d.rows = get_number<int>(required(grid, "$.grid", "rows"), "$.grid.rows");
    d.cols = get_number<int>(required(grid, "$.grid", "cols"), "$.grid.cols");
    if (d.rows <= 0 || d.cols <= 0)
    {
        schema_error("$.grid", "rows and cols must be positive");
    }

    const json& tiles = required(doc, "$", "tiles");
    if (!tiles.is_array())
    {
        schema_error("$.tiles", "expected a list");
    }
    std::vector<std::optional<TileSpec>> grid_tiles(static_cast<std::size_t>(d.rows * d.cols));
    for (std::size_t i = 0; i < tiles.size(); ++i)
    {
        const std::string where = "$.tiles[" + std::to_string(i) + "]";
        TileSpec t = parse_tile(tiles[i], where);
        if (!d.in_grid(t.position))
        {
            schema_error(where + ".pos", "tile " + to_string(t.position) + " outside grid");
        }
        auto& slot = grid_tiles[d.tile_index(t.position)];
        if (slot)
        {
            schema_error(where + ".pos", "duplicate tile " + to_string(t.position));
        }
        slot = std::move(t);
    }
    for (std::size_t i = 0; i < grid_tiles.size(); ++i)
    {
        if (!grid_tiles[i])
        {
            const Position p{static_cast<int>(i) / d.cols, static_cast<int>(i) % d.cols};
            schema_error("$.tiles", "tile " + to_string(p) + " missing");
        }
        d.tiles.push_back(std::move(*grid_tiles[i]));
    }

    const json& islands = required(doc, "$", "islands");
    if (!islands.is_array())
    {
        schema_error("$.islands", "expected a list");
    }
    for (std::size_t i = 0; i < islands.size(); ++i)
    {
        d.islands.push_back(parse_island(islands[i], "$.islands[" + std::to_string(i) + "]", d.rows, d.cols));
    }

    if (auto it = doc.find("noc"); it != doc.end())
    {
        reject_unknown(*it, "$.noc",
                       {"link_width_bytes", "router_pipeline_cycles", "fifo_depth", "resync_depth", "watchdog_cycles"});
        NocParams n;
        n.link_width_bytes = opt_number<std::uint32_t>(*it, "$.noc", "link_width_bytes", n.link_width_bytes);
        n.router_pipeline_cycles =
            opt_number<std::uint32_t>(*it, "$.noc", "router_pipeline_cycles", n.router_pipeline_cycles);
        n.fifo_depth = opt_number<std::uint32_t>(*it, "$.noc", "fifo_depth", n.fifo_depth);
        n.resync_depth = opt_number<std::uint32_t>(*it, "$.noc", "resync_depth", n.resync_depth);
        n.watchdog_cycles = opt_number<std::uint64_t>(*it, "$.noc", "watchdog_cycles", n.watchdog_cycles);
        d.noc_params = n;
    }
    if (auto it = doc.find("memory"); it != doc.end())
    {
        reject_unknown(*it, "$.memory", {"bytes_per_cycle", "latency_cycles"});
        d.mem_service.bytes_per_cycle =
            opt_number<std::uint32_t>(*it, "$.memory", "bytes_per_cycle", d.mem_service.bytes_per_cycle);
        d.mem_service.latency_cycles =
            opt_number<std::uint32_t>(*it, "$.memory", "latency_cycles", d.mem_service.latency_cycles);
    }
    if (auto it = doc.find("profiles"); it != doc.end())
    {
        if (!it->is_array())
        {
            schema_error("$.profiles", "expected a list");
        }
        for (std::size_t i = 0; i < it->size(); ++i)
        {
            d.profiles.push_back(parse_profile((*it)[i], "$.profiles[" + std::to_string(i) + "]"));
        }
    }

    const auto report = validate(d);
    if (!report.empty())
    {
        std::string msg = "invalid SoC description:";
        for (const auto& r : report)
        {
            msg += "\n  - " + r;
        }
        throw ConfigError(msg);
    }
    return d;
}

SoCDescription load_description_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
    {
        throw ConfigError("cannot open configuration file '" + path + "'");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return load_description(ss.str());
}

std::string serialize(const SoCDescription& d)
{
    json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["grid"] = {{"rows", d.rows}, {"cols", d.cols}};
    json tiles = json::array();
    for (const auto& t : d.tiles)
    {
        json jt;
        jt["pos"] = position_json(t.position);
        jt["kind"] = std::string(to_string(t.kind));
        if (!t.name.empty())
        {
            jt["name"] = t.name;
        }
        if (!t.accel.empty())
        {
            jt["accel"] = t.accel;
        }
        jt["replication"] = t.replication;
        jt["enabled_at_start"] = t.enabled_at_start;
        jt["read_buffer_depth"] = t.read_buffer_depth;
        jt["stream_width_bytes"] = t.stream_width_bytes;
        tiles.push_back(std::move(jt));
    }
    doc["tiles"] = std::move(tiles);

    json islands = json::array();
    for (const auto& isl : d.islands)
    {
        json ji;
        ji["id"] = isl.id;
        if (!isl.name.empty())
        {
            ji["name"] = isl.name;
        }
        ji["tiles"] = json::array();
        for (const auto& p : isl.tiles)
        {
            ji["tiles"].push_back(position_json(p));
        }
        ji["routers"] = json::array();
        for (const auto& p : isl.routers)
        {
            ji["routers"].push_back(position_json(p));
        }
        json jc;
        if (isl.clock.dfs)
        {
            jc["type"] = "dfs";
            jc["initial_hz"] = isl.clock.freq_hz;
            jc["min_hz"] = isl.clock.range.min_hz;
            jc["max_hz"] = isl.clock.range.max_hz;
            jc["step_hz"] = isl.clock.range.step_hz;
            jc["reconfig_latency_fs"] = isl.clock.reconfig_latency.fs;
            jc["mode"] = isl.clock.mode == ActuatorMode::DualOscillator ? "dual" : "naive";
            jc["busy_policy"] = isl.clock.busy_policy == BusyPolicy::Reject ? "reject" : "queue";
        }
        else
        {
            jc["type"] = "fixed";
            jc["freq_hz"] = isl.clock.freq_hz;
        }
        ji["clock"] = std::move(jc);
        islands.push_back(std::move(ji));
    }
    doc["islands"] = std::move(islands);

    doc["noc"] = {{"link_width_bytes", d.noc_params.link_width_bytes},
                  {"router_pipeline_cycles", d.noc_params.router_pipeline_cycles},
                  {"fifo_depth", d.noc_params.fifo_depth},
                  {"resync_depth", d.noc_params.resync_depth},
                  {"watchdog_cycles", d.noc_params.watchdog_cycles}};
    doc["memory"] = {{"bytes_per_cycle", d.mem_service.bytes_per_cycle},
                     {"latency_cycles", d.mem_service.latency_cycles}};
    json profiles = json::array();
    for (const auto& p : d.profiles)
    {
        profiles.push_back({{"name", p.name},
                            {"items_per_invocation", p.items_per_invocation},
                            {"bytes_read_per_item", p.bytes_read_per_item},
                            {"bytes_written_per_item", p.bytes_written_per_item},
                            {"compute_cycles_per_item", p.compute_cycles_per_item},
                            {"burst_bytes", p.burst_bytes},
                            {"boundedness", std::string(to_string(p.boundedness))}});
    }
    doc["profiles"] = std::move(profiles);
    return doc.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Validation

std::vector<std::string> validate(const SoCDescription& d)
{
    std::vector<std::string> out;
    if (d.rows <= 0 || d.cols <= 0)
    {
        out.push_back("grid dimensions must be positive");
        return out;
    }
    const std::size_t n_tiles = static_cast<std::size_t>(d.rows) * static_cast<std::size_t>(d.cols);
    if (d.tiles.size() != n_tiles)
    {
        out.push_back("expected " + std::to_string(n_tiles) + " tiles, found " + std::to_string(d.tiles.size()));
        return out;
    }
    for (std::size_t i = 0; i < n_tiles; ++i)
    {
        const Position expect{static_cast<int>(i) / d.cols, static_cast<int>(i) % d.cols};
        if (d.tiles[i].position != expect)
        {
            out.push_back("tiles not in row-major order at index " + std::to_string(i));
            return out;
        }
    }

    int mem = 0;
    int cpu = 0;
    int io = 0;
    std::set<std::string> names;
    for (const auto& t : d.tiles)
    {
        const std::string where = "tile " + to_string(t.position);
        mem += t.kind == TileKind::Mem;
        cpu += t.kind == TileKind::Cpu;
        io += t.kind == TileKind::Io;
        if (!t.name.empty() && !names.insert(t.name).second)
        {
            out.push_back(where + ": duplicate tile name '" + t.name + "'");
        }
        if (t.kind == TileKind::Accel || t.kind == TileKind::Tg)
        {
            if (t.accel.empty())
            {
                out.push_back(where + ": missing accelerator profile name");
            }
            else if (!d.find_profile(t.accel))
            {
                out.push_back(where + ": unknown accelerator profile '" + t.accel + "'");
            }
            if (t.replication < 1)
            {
                out.push_back(where + ": replication K must be >= 1");
            }
            if (t.read_buffer_depth < 1)
            {
                out.push_back(where + ": read_buffer_depth must be >= 1");
            }
            if (t.stream_width_bytes < 1)
            {
                out.push_back(where + ": stream_width_bytes must be >= 1");
            }
        }
    }
    if (mem != 1)
    {
        out.push_back("exactly one MEM tile required (found " + std::to_string(mem) + ")");
    }
    if (cpu > 1)
    {
        out.push_back("at most one CPU tile allowed (found " + std::to_string(cpu) + ")");
    }
    if (io > 1)
    {
        out.push_back("at most one IO tile allowed (found " + std::to_string(io) + ")");
    }

    std::vector<int> tile_cover(n_tiles, 0);
    std::vector<int> router_cover(n_tiles, 0);
    std::set<IslandId> ids;
    for (const auto& isl : d.islands)
    {
        const std::string where = "island " + std::to_string(isl.id);
        if (!ids.insert(isl.id).second)
        {
            out.push_back(where + ": duplicate island id");
        }
        if (isl.tiles.empty() && isl.routers.empty())
        {
            out.push_back(where + ": island is empty");
        }
        for (const auto& p : isl.tiles)
        {
            if (!d.in_grid(p))
            {
                out.push_back(where + ": tile " + to_string(p) + " outside grid");
                continue;
            }
            ++tile_cover[d.tile_index(p)];
        }
        for (const auto& p : isl.routers)
        {
            if (!d.in_grid(p))
            {
                out.push_back(where + ": router " + to_string(p) + " outside grid");
                continue;
            }
            ++router_cover[d.tile_index(p)];
        }
        const ClockSpec& c = isl.clock;
        if (c.freq_hz == 0)
        {
            out.push_back(where + ": frequency must be positive");
        }
        if (c.dfs)
        {
            const FrequencyRange& r = c.range;
            if (r.step_hz == 0)
            {
                out.push_back(where + ": DFS step must be positive");
            }
            else if (r.min_hz == 0 || r.min_hz > r.max_hz)
            {
                out.push_back(where + ": DFS range requires 0 < min <= max");
            }
            else
            {
                if ((r.max_hz - r.min_hz) % r.step_hz != 0)
                {
                    out.push_back(where + ": DFS range (max - min) not divisible by step");
                }
                if (c.freq_hz < r.min_hz || c.freq_hz > r.max_hz)
                {
                    out.push_back(where + ": initial frequency outside DFS range");
                }
                else if ((c.freq_hz - r.min_hz) % r.step_hz != 0)
                {
                    out.push_back(where + ": frequency not on step grid");
                }
            }
            if (c.reconfig_latency == SimTime::zero())
            {
                out.push_back(where + ": reconfiguration latency must be positive");
            }
        }
    }
    for (std::size_t i = 0; i < n_tiles; ++i)
    {
        const Position p{static_cast<int>(i) / d.cols, static_cast<int>(i) % d.cols};
        if (tile_cover[i] == 0)
        {
            out.push_back("tile " + to_string(p) + " not in any island");
        }
        else if (tile_cover[i] > 1)
        {
            out.push_back("tile " + to_string(p) + " in more than one island");
        }
        if (router_cover[i] == 0)
        {
            out.push_back("router " + to_string(p) + " not in any island");
        }
        else if (router_cover[i] > 1)
        {
            out.push_back("router " + to_string(p) + " in more than one island");
        }
    }

    const NocParams& n = d.noc_params;
    if (n.link_width_bytes == 0 || n.fifo_depth == 0 || n.watchdog_cycles == 0)
    {
        out.push_back("noc: link width, FIFO depth and watchdog must be positive");
    }
    if (n.resync_depth < 2)
    {
        out.push_back("noc: resynchronizer depth must be >= 2");
    }
    if (d.mem_service.bytes_per_cycle == 0)
    {
        out.push_back("memory: bytes_per_cycle must be positive");
    }

    std::set<std::string> profile_names;
    for (const auto& p : d.profiles)
    {
        const std::string where = "profile '" + p.name + "'";
        if (!profile_names.insert(p.name).second)
        {
            out.push_back(where + ": duplicate profile");
        }
        if (p.items_per_invocation == 0 || p.bytes_read_per_item == 0 || p.bytes_written_per_item == 0 ||
            p.compute_cycles_per_item == 0 || p.burst_bytes == 0)
        {
            out.push_back(where + ": all counts must be strictly positive");
        }
        else if (p.burst_bytes > p.items_per_invocation * p.bytes_read_per_item)
        {
            out.push_back(where + ": burst_bytes exceeds the invocation input");
        }
    }
    return out;
}

void require_valid(const SoCDescription& desc)
{
    const auto report = validate(desc);
    if (!report.empty())
    {
        std::string msg = "invalid SoC description:";
        for (const auto& r : report)
        {
            msg += "\n  - " + r;
        }
        throw ConfigError(msg);
    }
}

// ---------------------------------------------------------------------------
// Reference testbed

SoCDescription reference_testbed(IslandVariant variant)
{
    using namespace testbed;
    SoCDescription d;
    d.rows = 4;
    d.cols = 4;
    for (int r = 0; r < 4; ++r)
    {
        for (int c = 0; c < 4; ++c)
        {
            TileSpec t;
            t.position = Position{r, c};
            t.kind = TileKind::Tg;
            t.accel = "dfadd";
            d.tiles.push_back(t);
        }
    }
    auto set_kind = [&](Position p, TileKind k, std::string name) {
        TileSpec& t = d.tile_at(p);
        t.kind = k;
        t.name = std::move(name);
        t.accel.clear();
    };
    set_kind(kCpuPos, TileKind::Cpu, "CPU");
    set_kind(kMem, TileKind::Mem, "MEM");
    set_kind(kIoPos, TileKind::Io, "IO");
    set_kind(kA1Pos, TileKind::Accel, "A1");
    set_kind(kA2Pos, TileKind::Accel, "A2");
    d.tile_at(kA1Pos).accel = "dfadd";
    d.tile_at(kA1Pos).enabled_at_start = true;
    d.tile_at(kA2Pos).accel = "dfadd";

    int tg_index = 0;
    for (auto& t : d.tiles)
    {
        if (t.kind == TileKind::Tg)
        {
            t.name = "TG" + std::to_string(tg_index++);
        }
    }

    auto dfs = [](FrequencyHz max_hz, FrequencyHz initial) {
        ClockSpec c;
        c.dfs = true;
        c.freq_hz = initial;
        c.range = FrequencyRange{10 * kMHz, max_hz, 5 * kMHz};
        return c;
    };

    IslandSpec noc{kNocMem, "noc_mem", {kMem}, {}, dfs(100 * kMHz, 100 * kMHz)};
    for (int r = 0; r < 4; ++r)
    {
        for (int c = 0; c < 4; ++c)
        {
            noc.routers.push_back(Position{r, c});
        }
    }
    IslandSpec a1{kA1, "a1", {kA1Pos}, {}, dfs(50 * kMHz, 50 * kMHz)};
    IslandSpec a2{kA2, "a2", {kA2Pos}, {}, dfs(50 * kMHz, 50 * kMHz)};
    IslandSpec tg{kTg, "tg", {}, {}, dfs(50 * kMHz, 50 * kMHz)};
    for (const auto& t : d.tiles)
    {
        if (t.kind == TileKind::Tg)
        {
            tg.tiles.push_back(t.position);
        }
    }
    d.islands = {noc, a1, a2, tg};
    if (variant == IslandVariant::SixClocks)
    {
        d.islands.push_back(IslandSpec{kCpu, "cpu", {kCpuPos}, {}, dfs(50 * kMHz, 50 * kMHz)});
        d.islands.push_back(IslandSpec{kIo, "io", {kIoPos}, {}, dfs(50 * kMHz, 50 * kMHz)});
    }
    else
    {
        d.islands.push_back(IslandSpec{kCpu, "cpu_io", {kCpuPos, kIoPos}, {}, dfs(50 * kMHz, 50 * kMHz)});
    }

    d.mem_service = MemModel{1, 20};
    d.noc_params = NocParams{};
    d.profiles = reference_profiles();
    return d;
}

std::vector<Position> tg_positions(const SoCDescription& desc)
{
    std::vector<Position> out;
    for (const auto& t : desc.tiles)
    {
        if (t.kind == TileKind::Tg)
        {
            out.push_back(t.position);
        }
    }
    return out;
}

} // namespace vespa
