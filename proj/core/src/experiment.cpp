#include "vespa/experiment.hpp"

#include "json_schema.hpp"
#include "vespa/area.hpp"
#include "vespa/profiles.hpp"
#include "vespa/soc.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdio>
#include <functional>
#include <ostream>
#include <thread>

namespace vespa
{

using namespace schema;

namespace
{

std::string fixed(double v, int precision = 6)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, v);
    return buf;
}

std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos)
    {
        return s;
    }
    std::string out = "\"";
    for (char c : s)
    {
        if (c == '"')
        {
            out += '"';
        }
        out += c == '\n' ? ' ' : c;
    }
    return out + "\"";
}

std::string tile_label(const TileSpec& t)
{
    return t.name.empty() ? to_string(t.position) : t.name;
}

bool has_enabled_accelerator(const SoCDescription& d)
{
    return std::any_of(d.tiles.begin(), d.tiles.end(),
                       [](const TileSpec& t) { return t.kind == TileKind::Accel && t.enabled_at_start; });
}

json parse_document(const std::string& text, const char* what)
{
    try
    {
        return json::parse(text);
    }
    catch (const json::parse_error& e)
    {
        throw ConfigError(std::string(what) + " is not valid JSON: " + e.what());
    }
}

void check_schema_version(const json& doc)
{
    const auto& v = required(doc, "$", "schema_version");
    if (get_number<int>(v, "$.schema_version") != kSchemaVersion)
    {
        schema_error("$.schema_version", "unsupported version");
    }
}

IslandId resolve_island(const SoCDescription& d, const std::string& key, const std::string& where)
{
    for (const auto& isl : d.islands)
    {
        if (isl.name == key || std::to_string(isl.id) == key)
        {
            return isl.id;
        }
    }
    schema_error(where, "no island named '" + key + "'");
}

} // namespace

SimTime parse_duration(const std::string& text)
{
    std::size_t pos = 0;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos])))
    {
        ++pos;
    }
    if (pos == 0)
    {
        throw ConfigError("invalid duration '" + text + "'");
    }
    const std::uint64_t value = std::stoull(text.substr(0, pos));
    const std::string unit = text.substr(pos);
    static const std::pair<const char*, std::uint64_t> units[] = {
        {"", 1}, {"fs", 1}, {"ps", 1'000}, {"ns", 1'000'000}, {"us", 1'000'000'000},
        {"ms", 1'000'000'000'000ULL}, {"s", kFemtosPerSecond}};
    for (const auto& [name, scale] : units)
    {
        if (unit == name)
        {
            std::uint64_t fs = 0;
            if (__builtin_mul_overflow(value, scale, &fs))
            {
                throw ConfigError("duration '" + text + "' out of range");
            }
            return SimTime{fs};
        }
    }
    throw ConfigError("invalid duration unit in '" + text + "'");
}

// ---------------------------------------------------------------------------
// Single run

const TileMetrics* RunResult::tile(std::string_view name) const
{
    for (const auto& t : tiles)
    {
        if (t.name == name)
        {
            return &t;
        }
    }
    return nullptr;
}

RunResult run_simulation(const SoCDescription& desc, const RunOptions& options)
{
    require_valid(desc);
    if (options.window == SimTime::zero())
    {
        throw ConfigError("sampling window must be positive");
    }
    SocOptions so;
    so.seed = options.seed;
    so.accel_budget_bytes = options.budget_bytes;
    Soc soc(desc, so);
    RunResult r;

    const bool any_accel = has_enabled_accelerator(desc);
    const bool simulate = !options.duration || options.duration->fs > 0;
    if (simulate)
    {
        const SimTime limit = options.duration ? *options.duration : (any_accel ? options.limit : kDefaultIdleDuration);

        struct Probe
        {
            std::string name;
            MraTile* tile;
            std::uint64_t last_bytes = 0;
        };
        std::vector<Probe> probes;
        for (const auto& t : desc.tiles)
        {
            if (t.kind == TileKind::Accel && t.enabled_at_start)
            {
                probes.push_back(Probe{tile_label(t), soc.mra(t.position)});
            }
        }
        std::uint64_t last_mem = 0;
        SimTime next = options.window;
        std::function<void()> tick = [&] {
            const double secs = options.window.seconds();
            const std::uint64_t mem = soc.memory_packets_in();
            r.trace.push_back({next, "MEM", "pkts_in_mpkts", static_cast<double>(mem - last_mem) / secs / 1e6});
            last_mem = mem;
            for (auto& p : probes)
            {
                const std::uint64_t b = p.tile->bytes_read();
                r.trace.push_back({next, p.name, "read_mbps", static_cast<double>(b - p.last_bytes) / secs / 1e6});
                p.last_bytes = b;
            }
            next = next + options.window;
            if (next <= limit)
            {
                soc.kernel().schedule(next, 0, tick);
            }
        };
        if (options.trace && next <= limit)
        {
            soc.kernel().schedule(next, 0, tick);
        }

        soc.start_accelerators(SimTime::zero());
        if (any_accel)
        {
            r.completed = soc.run_to_completion(limit);
            r.end = r.completed ? soc.kernel().now() : limit;
        }
        else
        {
            soc.run_until(limit);
            r.end = limit;
        }
        if (options.duration && !any_accel)
        {
            r.completed = true;
        }
    }

    for (const auto& t : desc.tiles)
    {
        TileMetrics m;
        m.name = tile_label(t);
        m.position = t.position;
        m.kind = t.kind;
        Tile& tile = soc.tile(t.position);
        m.island = tile.island();
        m.freq_hz = soc.clocks().domain(m.island).frequency_at(r.end);
        if (MraTile* mra = soc.mra(t.position))
        {
            m.accel = t.accel;
            m.replication = mra->replication();
            m.throughput_mbps = mra->throughput_mbps();
            m.invocations = mra->invocations().size();
            m.bytes_read = mra->bytes_read();
            m.bytes_written = mra->bytes_written();
        }
        const TileCounters& c = tile.counters();
        m.exec_time_cycles = c.exec_time();
        m.pkts_in = c.pkts_in();
        m.pkts_out = c.pkts_out();
        m.rtt_count = c.rtt_count();
        m.mean_rtt_ns = c.rtt_mean_fs() / 1e6;
        if (t.kind == TileKind::Mem)
        {
            m.busy_fraction = soc.memory().busy_fraction(r.end);
            r.mem_busy_fraction = m.busy_fraction;
        }
        r.tiles.push_back(std::move(m));
    }
    r.mem_pkts_in = soc.memory_packets_in();
    return r;
}

void write_metrics_csv(std::ostream& out, const RunResult& result)
{
    out << "tile,row,col,kind,accel,replication,island,freq_hz,throughput_mbps,invocations,bytes_read,"
           "bytes_written,exec_time_cycles,pkts_in,pkts_out,rtt_count,mean_rtt_ns,busy_fraction\n";
    for (const auto& m : result.tiles)
    {
        out << csv_field(m.name) << ',' << m.position.row << ',' << m.position.col << ',' << to_string(m.kind) << ','
            << csv_field(m.accel) << ',' << m.replication << ',' << m.island << ',' << m.freq_hz << ','
            << fixed(m.throughput_mbps) << ',' << m.invocations << ',' << m.bytes_read << ',' << m.bytes_written
            << ',' << m.exec_time_cycles << ',' << m.pkts_in << ',' << m.pkts_out << ',' << m.rtt_count << ','
            << fixed(m.mean_rtt_ns, 3) << ',' << fixed(m.busy_fraction) << '\n';
    }
}

void write_trace_csv(std::ostream& out, const std::vector<TraceSample>& trace)
{
    out << "time_fs,probe,stat,value\n";
    for (const auto& s : trace)
    {
        out << s.time.fs << ',' << csv_field(s.probe) << ',' << s.stat << ',' << fixed(s.value) << '\n';
    }
}

// ---------------------------------------------------------------------------
// Sweep

std::string_view to_string(Placement p) noexcept
{
    return p == Placement::Swap ? "swap" : "default";
}

SweepSpace parse_sweep_space(const std::string& text, const SoCDescription& base)
{
    const json doc = parse_document(text, "sweep space");
    reject_unknown(doc, "$",
                   {"schema_version", "slots", "frequencies", "tg_counts", "placements", "repetitions", "seed",
                    "budget_bytes", "limit_fs"});
    check_schema_version(doc);
    SweepSpace s;

    auto list = [](const json& v, const std::string& where) -> const json& {
        if (!v.is_array())
        {
            schema_error(where, "expected a list");
        }
        return v;
    };

    if (auto it = doc.find("slots"); it != doc.end())
    {
        if (!it->is_object())
        {
            schema_error("$.slots", "expected an object");
        }
        for (const auto& [name, slot] : it->items())
        {
            const std::string where = "$.slots." + name;
            if (name != "A1" && name != "A2")
            {
                schema_error(where, "slot must be A1 or A2");
            }
            reject_unknown(slot, where, {"accel", "replication"});
            SlotChoices c;
            const auto& accels = list(required(slot, where, "accel"), where + ".accel");
            for (std::size_t i = 0; i < accels.size(); ++i)
            {
                c.accels.push_back(get_string(accels[i], where + ".accel[" + std::to_string(i) + "]"));
            }
            if (auto k = slot.find("replication"); k != slot.end())
            {
                const auto& ks = list(*k, where + ".replication");
                for (std::size_t i = 0; i < ks.size(); ++i)
                {
                    const auto v = get_number<std::uint32_t>(ks[i], where + ".replication[" + std::to_string(i) + "]");
                    if (v == 0)
                    {
                        schema_error(where + ".replication[" + std::to_string(i) + "]", "must be at least 1");
                    }
                    c.replication.push_back(v);
                }
            }
            else
            {
                c.replication = {1};
            }
            s.slots[name] = std::move(c);
        }
    }
    if (auto it = doc.find("frequencies"); it != doc.end())
    {
        if (!it->is_object())
        {
            schema_error("$.frequencies", "expected an object");
        }
        for (const auto& [key, values] : it->items())
        {
            const std::string where = "$.frequencies." + key;
            const IslandId id = resolve_island(base, key, where);
            auto& dst = s.frequencies[id];
            const auto& vs = list(values, where);
            for (std::size_t i = 0; i < vs.size(); ++i)
            {
                dst.push_back(get_number<FrequencyHz>(vs[i], where + "[" + std::to_string(i) + "]"));
            }
        }
    }
    if (auto it = doc.find("tg_counts"); it != doc.end())
    {
        s.tg_counts.clear();
        const auto& vs = list(*it, "$.tg_counts");
        for (std::size_t i = 0; i < vs.size(); ++i)
        {
            s.tg_counts.push_back(get_number<std::size_t>(vs[i], "$.tg_counts[" + std::to_string(i) + "]"));
        }
    }
    if (auto it = doc.find("placements"); it != doc.end())
    {
        s.placements.clear();
        const auto& vs = list(*it, "$.placements");
        for (std::size_t i = 0; i < vs.size(); ++i)
        {
            const std::string where = "$.placements[" + std::to_string(i) + "]";
            const std::string v = get_string(vs[i], where);
            if (v == "default")
            {
                s.placements.push_back(Placement::Default);
            }
            else if (v == "swap")
            {
                s.placements.push_back(Placement::Swap);
            }
            else
            {
                schema_error(where, "expected \"default\" or \"swap\"");
            }
        }
    }
    s.repetitions = opt_number<std::uint32_t>(doc, "$", "repetitions", s.repetitions);
    s.seed = opt_number<std::uint64_t>(doc, "$", "seed", s.seed);
    s.budget_bytes = opt_number<std::uint64_t>(doc, "$", "budget_bytes", s.budget_bytes);
    s.limit = SimTime{opt_number<std::uint64_t>(doc, "$", "limit_fs", s.limit.fs)};
    if (s.budget_bytes == 0)
    {
        schema_error("$.budget_bytes", "must be positive");
    }
    return s;
}

namespace
{
std::vector<SlotSetting> slot_settings(const SweepSpace& space, const std::string& name)
{
    auto it = space.slots.find(name);
    if (it == space.slots.end())
    {
        return {SlotSetting{}};
    }
    std::vector<SlotSetting> out;
    for (const auto& a : it->second.accels)
    {
        for (std::uint32_t k : it->second.replication)
        {
            out.push_back(SlotSetting{a, k});
        }
    }
    return out;
}
} // namespace

std::size_t sweep_size(const SweepSpace& space)
{
    std::size_t n = space.placements.size() * slot_settings(space, "A1").size() *
                    slot_settings(space, "A2").size() * space.tg_counts.size() * space.repetitions;
    for (const auto& [id, values] : space.frequencies)
    {
        n *= values.size();
    }
    return n;
}

std::vector<SweepPoint> enumerate(const SweepSpace& space)
{
    std::vector<std::map<IslandId, FrequencyHz>> freq_points{{}};
    for (const auto& [id, values] : space.frequencies)
    {
        std::vector<std::map<IslandId, FrequencyHz>> next;
        for (const auto& partial : freq_points)
        {
            for (FrequencyHz f : values)
            {
                auto m = partial;
                m[id] = f;
                next.push_back(std::move(m));
            }
        }
        freq_points = std::move(next);
    }

    std::vector<SweepPoint> out;
    const auto a1 = slot_settings(space, "A1");
    const auto a2 = slot_settings(space, "A2");
    for (Placement pl : space.placements)
    {
        for (const auto& s1 : a1)
        {
            for (const auto& s2 : a2)
            {
                for (const auto& fp : freq_points)
                {
                    for (std::size_t tg : space.tg_counts)
                    {
                        for (std::uint32_t rep = 0; rep < space.repetitions; ++rep)
                        {
                            SweepPoint p;
                            p.index = out.size();
                            p.placement = pl;
                            p.a1 = s1;
                            p.a2 = s2;
                            p.frequencies = fp;
                            p.tg_count = tg;
                            p.repetition = rep;
                            p.seed = space.seed + rep;
                            out.push_back(std::move(p));
                        }
                    }
                }
            }
        }
    }
    return out;
}

SoCDescription materialize(const SoCDescription& base, const SweepPoint& point)
{
    SoCDescription d = base;
    const auto p1 = d.find_named("A1");
    const auto p2 = d.find_named("A2");
    if (!p1 || !p2)
    {
        throw ConfigError("sweep base configuration must name tiles A1 and A2");
    }
    SlotSetting s1 = point.a1;
    SlotSetting s2 = point.a2;
    if (point.placement == Placement::Swap)
    {
        std::swap(s1, s2);
    }
    auto apply = [&](Position pos, const SlotSetting& s) {
        TileSpec& t = d.tile_at(pos);
        if (t.kind != TileKind::Accel)
        {
            throw ConfigError("slot tile " + to_string(pos) + " is not an ACCEL tile");
        }
        t.enabled_at_start = !s.accel.empty();
        if (s.accel.empty())
        {
            return;
        }
        t.accel = s.accel;
        t.replication = s.replication;
        if (d.find_profile(s.accel) == nullptr)
        {
            try
            {
                d.profiles.push_back(reference_profile(s.accel));
            }
            catch (const std::invalid_argument&)
            {
                throw ConfigError("unknown accelerator '" + s.accel + "'");
            }
        }
    };
    apply(*p1, s1);
    apply(*p2, s2);
    for (const auto& [id, f] : point.frequencies)
    {
        d.island(id).clock.freq_hz = f;
    }
    const auto tgs = tg_positions(d);
    if (point.tg_count > tgs.size())
    {
        throw ConfigError("tg_count " + std::to_string(point.tg_count) + " exceeds the " + std::to_string(tgs.size()) +
                          " traffic generators");
    }
    for (std::size_t i = 0; i < tgs.size(); ++i)
    {
        d.tile_at(tgs[i]).enabled_at_start = i < point.tg_count;
    }
    return d;
}

namespace
{
SlotResult slot_result(const SoCDescription& d, const RunResult& r, std::string_view name)
{
    SlotResult s;
    const TileSpec& t = d.tile_at(*d.find_named(name));
    if (!t.enabled_at_start)
    {
        return s;
    }
    s.setting = SlotSetting{t.accel, t.replication};
    if (const TileMetrics* m = r.tile(name))
    {
        s.throughput_mbps = m->throughput_mbps;
        s.mean_rtt_ns = m->mean_rtt_ns;
    }
    if (builtin_area_table().find(t.accel) != nullptr)
    {
        const AreaEstimate e = estimate(t.accel, t.replication);
        s.has_area = true;
        s.lut = e.resources.lut;
        s.ff = e.resources.ff;
        s.bram = e.resources.bram;
        s.dsp = e.resources.dsp;
        s.fits = e.fits_device;
    }
    return s;
}
} // namespace

SweepRow run_point(const SoCDescription& base, const SweepSpace& space, const SweepPoint& point)
{
    SweepRow row;
    row.point = point;
    try
    {
        const SoCDescription d = materialize(base, point);
        for (const auto& isl : d.islands)
        {
            row.island_hz[isl.id] = isl.clock.freq_hz;
        }
        RunOptions o;
        o.seed = point.seed;
        o.budget_bytes = space.budget_bytes;
        o.limit = space.limit;
        o.trace = false;
        const RunResult r = run_simulation(d, o);
        row.a1 = slot_result(d, r, "A1");
        row.a2 = slot_result(d, r, "A2");
        row.mem_busy_fraction = r.mem_busy_fraction;
        row.mem_pkts_in = r.mem_pkts_in;
        row.sim_time = r.end;
        if (!r.completed)
        {
            row.status = "timeout";
        }
    }
    catch (const ConfigError& e)
    {
        row.status = std::string("error: config: ") + e.what();
    }
    catch (const SimulationFault& e)
    {
        row.status = std::string("error: fault: ") + e.what();
    }
    catch (const std::exception& e)
    {
        row.status = std::string("error: ") + e.what();
    }
    return row;
}

std::vector<SweepRow> run_sweep(const SoCDescription& base, const SweepSpace& space, unsigned jobs)
{
    const std::vector<SweepPoint> points = enumerate(space);
    std::vector<SweepRow> rows(points.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < points.size(); i = next++)
        {
            rows[i] = run_point(base, space, points[i]);
        }
    };
    const unsigned n = std::max(1U, std::min<unsigned>(jobs, static_cast<unsigned>(points.size())));
    if (n <= 1)
    {
        worker();
        return rows;
    }
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < n; ++i)
    {
        pool.emplace_back(worker);
    }
    for (auto& t : pool)
    {
        t.join();
    }
    return rows;
}

namespace
{
void write_slot_header(std::ostream& out, const char* slot)
{
    for (const char* col :
         {"_accel", "_k", "_throughput_mbps", "_mean_rtt_ns", "_lut", "_ff", "_bram", "_dsp", "_fits"})
    {
        out << ',' << slot << col;
    }
}

void write_slot(std::ostream& out, const SlotResult& s)
{
    if (s.setting.accel.empty())
    {
        out << ",,,,,,,,,";
        return;
    }
    out << ',' << csv_field(s.setting.accel) << ',' << s.setting.replication << ',' << fixed(s.throughput_mbps) << ','
        << fixed(s.mean_rtt_ns, 3);
    if (s.has_area)
    {
        out << ',' << s.lut << ',' << s.ff << ',' << s.bram << ',' << s.dsp << ',' << (s.fits ? 1 : 0);
    }
    else
    {
        out << ",,,,,";
    }
}
} // namespace

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows)
{
    out << "point,repetition,seed,status,placement,tg_count,freq_hz";
    write_slot_header(out, "A1");
    write_slot_header(out, "A2");
    out << ",mem_busy_fraction,mem_pkts_in,sim_time_fs\n";
    for (const auto& r : rows)
    {
        std::string freqs;
        for (const auto& [id, f] : r.island_hz)
        {
            freqs += (freqs.empty() ? "" : ";") + std::to_string(id) + ":" + std::to_string(f);
        }
        out << r.point.index << ',' << r.point.repetition << ',' << r.point.seed << ',' << csv_field(r.status) << ','
            << to_string(r.point.placement) << ',' << r.point.tg_count << ',' << freqs;
        write_slot(out, r.a1);
        write_slot(out, r.a2);
        out << ',' << fixed(r.mem_busy_fraction) << ',' << r.mem_pkts_in << ',' << r.sim_time.fs << '\n';
    }
}

// ---------------------------------------------------------------------------
// Profile

std::string_view to_string(ScheduleOp op) noexcept
{
    switch (op)
    {
    case ScheduleOp::SetFrequency:
        return "set_freq";
    case ScheduleOp::TgCount:
        return "tg_count";
    case ScheduleOp::TgTile:
        return "tg_tile";
    case ScheduleOp::ResetCounters:
        return "reset_counters";
    case ScheduleOp::Sample:
        return "sample";
    case ScheduleOp::ReadRegister:
        return "read_register";
    }
    return "?";
}

Schedule parse_schedule(const std::string& text, const SoCDescription& desc)
{
    const json doc = parse_document(text, "schedule");
    reject_unknown(doc, "$", {"schema_version", "duration_fs", "commands"});
    check_schema_version(doc);
    Schedule s;
    s.duration = SimTime{get_number<std::uint64_t>(required(doc, "$", "duration_fs"), "$.duration_fs")};
    const auto it = doc.find("commands");
    if (it == doc.end())
    {
        return s;
    }
    if (!it->is_array())
    {
        schema_error("$.commands", "expected a list");
    }
    for (std::size_t i = 0; i < it->size(); ++i)
    {
        const std::string where = "$.commands[" + std::to_string(i) + "]";
        const json& c = (*it)[i];
        if (!c.is_object())
        {
            schema_error(where, "expected an object");
        }
        ScheduleCommand cmd;
        cmd.time = SimTime{get_number<std::uint64_t>(required(c, where, "time_fs"), where + ".time_fs")};
        const std::string op = get_string(required(c, where, "op"), where + ".op");
        if (op == "set_freq")
        {
            reject_unknown(c, where, {"time_fs", "op", "islands"});
            cmd.op = ScheduleOp::SetFrequency;
            const json& isl = required(c, where, "islands");
            if (!isl.is_object() || isl.empty())
            {
                schema_error(where + ".islands", "expected a non-empty object");
            }
            for (const auto& [key, v] : isl.items())
            {
                const IslandId id = resolve_island(desc, key, where + ".islands." + key);
                cmd.frequencies[id] = get_number<FrequencyHz>(v, where + ".islands." + key);
            }
        }
        else if (op == "tg_count")
        {
            reject_unknown(c, where, {"time_fs", "op", "count"});
            cmd.op = ScheduleOp::TgCount;
            cmd.count = get_number<std::size_t>(required(c, where, "count"), where + ".count");
        }
        else if (op == "tg_tile")
        {
            reject_unknown(c, where, {"time_fs", "op", "tile", "on"});
            cmd.op = ScheduleOp::TgTile;
            cmd.tile = get_position(required(c, where, "tile"), where + ".tile");
            cmd.on = get_bool(required(c, where, "on"), where + ".on");
        }
        else if (op == "reset_counters")
        {
            reject_unknown(c, where, {"time_fs", "op"});
            cmd.op = ScheduleOp::ResetCounters;
        }
        else if (op == "sample")
        {
            reject_unknown(c, where, {"time_fs", "op", "tile"});
            cmd.op = ScheduleOp::Sample;
            cmd.tile = get_position(required(c, where, "tile"), where + ".tile");
            if (!desc.in_grid(cmd.tile))
            {
                schema_error(where + ".tile", "outside the grid");
            }
        }
        else if (op == "read_register")
        {
            reject_unknown(c, where, {"time_fs", "op", "address"});
            cmd.op = ScheduleOp::ReadRegister;
            cmd.address = get_number<std::uint32_t>(required(c, where, "address"), where + ".address");
        }
        else
        {
            schema_error(where + ".op", "unknown command '" + op + "'");
        }
        if (!s.commands.empty() && cmd.time <= s.commands.back().time)
        {
            schema_error(where + ".time_fs", "command times must be strictly increasing");
        }
        if (cmd.time >= s.duration)
        {
            schema_error(where + ".time_fs", "command at or after the schedule duration");
        }
        s.commands.push_back(std::move(cmd));
    }
    return s;
}

ProfileResult run_profile(const SoCDescription& desc, const Schedule& schedule, SimTime window, std::uint64_t seed)
{
    require_valid(desc);
    SocOptions so;
    so.seed = seed;
    so.loop_accelerators = true;
    Soc soc(desc, so);
    ProfileResult r;
    r.end = schedule.duration;

    for (const auto& isl : desc.islands)
    {
        r.island_names[isl.id] = isl.name.empty() ? std::to_string(isl.id) : isl.name;
        r.frequency.push_back({SimTime::zero(), isl.id, soc.clocks().domain(isl.id).frequency_at(SimTime::zero())});
    }
    soc.clocks().on_frequency_change(
        [&r](IslandId id, SimTime t, FrequencyHz f) { r.frequency.push_back({t, id, f}); });

    TrafficSampler sampler(soc.kernel(), window, [&soc] { return soc.memory_packets_in(); });
    sampler.start(SimTime::zero(), schedule.duration);

    auto execute = [&](const ScheduleCommand& c) {
        const SimTime now = soc.kernel().now();
        auto log = [&](std::string command, std::string result) {
            r.log.push_back({now, std::move(command), std::move(result)});
        };
        switch (c.op)
        {
        case ScheduleOp::SetFrequency:
            for (const auto& [id, f] : c.frequencies)
            {
                const std::string what = "set_freq " + r.island_names.at(id) + " " + std::to_string(f);
                const WriteOutcome w = soc.write_frequency(id, f, now);
                if (!w.accepted)
                {
                    log(what, "rejected: " + std::string(to_string(*w.reason)));
                }
                else if (w.queued)
                {
                    log(what, "queued");
                }
                else
                {
                    log(what, "accepted, effective at " + std::to_string(w.effective_at->fs));
                }
            }
            break;
        case ScheduleOp::TgCount: {
            const std::string what = "tg_count " + std::to_string(c.count);
            if (c.count > soc.traffic_generators().size())
            {
                log(what, "rejected: only " + std::to_string(soc.traffic_generators().size()) + " generators");
            }
            else
            {
                soc.set_active_tgs(c.count, now);
                log(what, "ok");
            }
            break;
        }
        case ScheduleOp::TgTile: {
            const std::string what = "tg_tile " + to_string(c.tile) + (c.on ? " on" : " off");
            try
            {
                soc.tg_set_enabled(c.tile, c.on, now);
                log(what, "ok");
            }
            catch (const std::invalid_argument& e)
            {
                log(what, std::string("rejected: ") + e.what());
            }
            break;
        }
        case ScheduleOp::ResetCounters:
            for (std::size_t i = 0; i < desc.tiles.size(); ++i)
            {
                const std::uint32_t addr = regs::tile_register(i, regs::kControl);
                soc.registers().write(addr, soc.registers().read(addr) | regs::kControlReset);
            }
            log("reset_counters", "ok");
            break;
        case ScheduleOp::Sample: {
            const TileCounters& k = soc.tile(c.tile).counters();
            const std::string probe = tile_label(desc.tile_at(c.tile));
            r.samples.push_back({now, probe, "pkts_in", static_cast<double>(k.pkts_in())});
            r.samples.push_back({now, probe, "pkts_out", static_cast<double>(k.pkts_out())});
            r.samples.push_back({now, probe, "rtt_count", static_cast<double>(k.rtt_count())});
            r.samples.push_back({now, probe, "mean_rtt_ns", k.rtt_mean_fs() / 1e6});
            r.samples.push_back({now, probe, "exec_time_cycles", static_cast<double>(k.exec_time())});
            log("sample " + probe, "ok");
            break;
        }
        case ScheduleOp::ReadRegister: {
            const std::string what = "read_register " + std::to_string(c.address);
            try
            {
                log(what, "value " + std::to_string(soc.registers().read(c.address)));
            }
            catch (const UnmappedAddress&)
            {
                log(what, "rejected: unmapped address");
            }
            break;
        }
        }
    };
    for (const auto& c : schedule.commands)
    {
        soc.kernel().schedule(c.time, 0, [&execute, &c] { execute(c); });
    }

    soc.start_accelerators(SimTime::zero());
    soc.run_until(schedule.duration);

    for (const auto& isl : desc.islands)
    {
        r.frequency.push_back({schedule.duration, isl.id, soc.clocks().domain(isl.id).frequency_at(schedule.duration)});
    }
    std::stable_sort(r.frequency.begin(), r.frequency.end(),
                     [](const FrequencyPoint& a, const FrequencyPoint& b) { return a.time < b.time; });
    r.mem_traffic = sampler.points();
    return r;
}

void write_frequency_csv(std::ostream& out, const ProfileResult& result)
{
    out << "time_fs,island,freq_hz\n";
    for (const auto& p : result.frequency)
    {
        out << p.time.fs << ',' << csv_field(result.island_names.at(p.island)) << ',' << p.freq_hz << '\n';
    }
}

void write_mem_traffic_csv(std::ostream& out, const ProfileResult& result)
{
    out << "time_fs,mem_pkts_in_mpkts\n";
    for (const auto& p : result.mem_traffic)
    {
        out << p.window_end.fs << ',' << fixed(p.mpkts) << '\n';
    }
}

void write_command_log(std::ostream& out, const ProfileResult& result)
{
    for (const auto& e : result.log)
    {
        out << e.time.fs << ' ' << e.command << ": " << e.result << '\n';
    }
}

void write_plot_json(std::ostream& out, const ProfileResult& result)
{
    json freq_series = json::array();
    for (const auto& [id, name] : result.island_names)
    {
        json x = json::array();
        json y = json::array();
        for (const auto& p : result.frequency)
        {
            if (p.island == id)
            {
                x.push_back(p.time.seconds() * 1e3);
                y.push_back(static_cast<double>(p.freq_hz) / 1e6);
            }
        }
        freq_series.push_back({{"label", name}, {"step", true}, {"x", x}, {"y", y}});
    }
    json tx = json::array();
    json ty = json::array();
    for (const auto& p : result.mem_traffic)
    {
        tx.push_back(p.window_end.seconds() * 1e3);
        ty.push_back(p.mpkts);
    }
    json doc;
    doc["panels"] = json::array({
        {{"title", "Island clock frequencies"}, {"x_label", "time [ms]"}, {"y_label", "frequency [MHz]"},
         {"series", freq_series}},
        {{"title", "Memory incoming traffic"}, {"x_label", "time [ms]"}, {"y_label", "incoming packets [Mpkt/s]"},
         {"series", json::array({{{"label", "MEM"}, {"step", false}, {"x", tx}, {"y", ty}}})}},
    });
    out << doc.dump(2) << '\n';
}

double mean_rate(const std::vector<RatePoint>& points, SimTime window, SimTime from, SimTime to)
{
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& p : points)
    {
        if (p.window_end.fs >= window.fs && p.window_end - window >= from && p.window_end <= to)
        {
            sum += p.mpkts;
            ++n;
        }
    }
    return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

} // namespace vespa
