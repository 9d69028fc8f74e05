#include <doctest.h>

#include <vespa/experiment.hpp>
#include <vespa/profiles.hpp>

#include <fstream>
#include <sstream>

using namespace vespa;

namespace
{
std::string read_file(const std::string& path)
{
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

template <class F>
std::string capture(F&& write)
{
    std::ostringstream ss;
    write(ss);
    return ss.str();
}

std::size_t lines(const std::string& s)
{
    return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

std::string first_line(const std::string& s)
{
    return s.substr(0, s.find('\n'));
}

constexpr FrequencyHz MHz = 1'000'000;
} // namespace

TEST_CASE("durations accept SI suffixes")
{
    CHECK(parse_duration("15") == SimTime{15});
    CHECK(parse_duration("15fs") == SimTime{15});
    CHECK(parse_duration("3ps") == SimTime{3'000});
    CHECK(parse_duration("2ns") == SimTime::from_ns(2));
    CHECK(parse_duration("7us") == SimTime::from_us(7));
    CHECK(parse_duration("5ms") == SimTime::from_ms(5));
    CHECK(parse_duration("1s") == SimTime{kFemtosPerSecond});
    CHECK_THROWS_AS(parse_duration(""), ConfigError);
    CHECK_THROWS_AS(parse_duration("ms"), ConfigError);
    CHECK_THROWS_AS(parse_duration("5 ms"), ConfigError);
    CHECK_THROWS_AS(parse_duration("5min"), ConfigError);
    CHECK_THROWS_AS(parse_duration("99999999s"), ConfigError);
}

TEST_CASE("single run reports per-tile metrics")
{
    RunOptions o;
    o.budget_bytes = 64 * 1024;
    const RunResult r = run_simulation(reference_testbed(), o);
    CHECK(r.completed);
    REQUIRE(r.tiles.size() == 16);
    const TileMetrics* a1 = r.tile("A1");
    REQUIRE(a1 != nullptr);
    CHECK(a1->accel == "dfadd");
    CHECK(a1->bytes_read == 64 * 1024);
    CHECK(a1->throughput_mbps == doctest::Approx(9.22).epsilon(0.02));
    CHECK(a1->invocations == 1);
    CHECK(a1->rtt_count == a1->bytes_read / 16);
    CHECK(r.tile("MEM")->pkts_in == r.mem_pkts_in);
    CHECK(r.mem_busy_fraction > 0.0);
    CHECK(r.mem_busy_fraction < 1.0);
    CHECK(r.tile("nope") == nullptr);

    const std::string metrics = capture([&](std::ostream& os) { write_metrics_csv(os, r); });
    CHECK(lines(metrics) == 17);
    CHECK(first_line(metrics) ==
          "tile,row,col,kind,accel,replication,island,freq_hz,throughput_mbps,invocations,bytes_read,"
          "bytes_written,exec_time_cycles,pkts_in,pkts_out,rtt_count,mean_rtt_ns,busy_fraction");
    const std::string trace = capture([&](std::ostream& os) { write_trace_csv(os, r.trace); });
    CHECK(first_line(trace) == "time_fs,probe,stat,value");
}

TEST_CASE("a zero-length run has zero counters and an empty trace")
{
    RunOptions o;
    o.duration = SimTime::zero();
    const RunResult r = run_simulation(reference_testbed(), o);
    CHECK(r.trace.empty());
    for (const auto& t : r.tiles)
    {
        CHECK(t.pkts_in == 0);
        CHECK(t.pkts_out == 0);
        CHECK(t.bytes_read == 0);
        CHECK(t.exec_time_cycles == 0);
    }
    CHECK(lines(capture([&](std::ostream& os) { write_trace_csv(os, r.trace); })) == 1);
}

TEST_CASE("a budget that cannot finish in time is reported")
{
    SoCDescription d = reference_testbed();
    d.tile_at(testbed::kA1Pos).accel = "dfsin";
    RunOptions o;
    o.limit = SimTime::from_us(100);
    const RunResult r = run_simulation(d, o);
    CHECK_FALSE(r.completed);
    CHECK(r.end == SimTime::from_us(100));
}

TEST_CASE("fixed-duration run samples every window")
{
    SoCDescription d = reference_testbed();
    d.tile_at(testbed::kA1Pos).enabled_at_start = false;
    for (auto p : tg_positions(d))
    {
        d.tile_at(p).enabled_at_start = true;
    }
    RunOptions o;
    o.duration = SimTime::from_us(500);
    o.window = SimTime::from_us(100);
    const RunResult r = run_simulation(d, o);
    REQUIRE(r.trace.size() == 5);
    for (const auto& s : r.trace)
    {
        CHECK(s.probe == "MEM");
        CHECK(s.value > 0.0);
    }
    o.window = SimTime::zero();
    CHECK_THROWS_AS(run_simulation(d, o), ConfigError);
}

TEST_CASE("sweep size is the Cartesian product")
{
    SweepSpace s;
    s.slots["A1"] = SlotChoices{{"dfadd", "gsm", "adpcm"}, {1, 2}};
    s.slots["A2"] = SlotChoices{{"dfmul"}, {1, 4}};
    s.frequencies[testbed::kA1] = {10 * MHz, 30 * MHz, 50 * MHz};
    s.frequencies[testbed::kNocMem] = {10 * MHz, 100 * MHz};
    s.tg_counts = {0, 5, 11};
    s.placements = {Placement::Default, Placement::Swap};
    s.repetitions = 2;
    const std::size_t n = 6 * 2 * 3 * 2 * 3 * 2 * 2;
    CHECK(sweep_size(s) == n);
    const auto pts = enumerate(s);
    REQUIRE(pts.size() == n);
    for (std::size_t i = 0; i < n; ++i)
    {
        CHECK(pts[i].index == i);
    }
    // Repetition varies fastest, placement slowest.
    CHECK(pts[0].repetition == 0);
    CHECK(pts[1].repetition == 1);
    CHECK(pts[1].seed == s.seed + 1);
    CHECK(pts[2].tg_count == 5);
    CHECK(pts.front().placement == Placement::Default);
    CHECK(pts.back().placement == Placement::Swap);
    CHECK(pts.back().a1.accel == "adpcm");

    SweepSpace empty = s;
    empty.slots["A1"].accels.clear();
    CHECK(sweep_size(empty) == 0);
    CHECK(enumerate(empty).empty());
    empty = s;
    empty.tg_counts.clear();
    CHECK(sweep_size(empty) == 0);
}

TEST_CASE("an empty sweep writes only the header")
{
    const SoCDescription base = reference_testbed();
    const SweepSpace s =
        parse_sweep_space(R"({"schema_version":1,"slots":{"A1":{"accel":[],"replication":[1]}}})", base);
    CHECK(sweep_size(s) == 0);
    const auto rows = run_sweep(base, s, 4);
    CHECK(rows.empty());
    const std::string csv = capture([&](std::ostream& os) { write_sweep_csv(os, rows); });
    CHECK(lines(csv) == 1);
    CHECK(csv.rfind("point,repetition,seed,status,placement,tg_count,freq_hz,A1_accel", 0) == 0);
}

TEST_CASE("sweep-space parsing")
{
    const SoCDescription base = reference_testbed();
    const SweepSpace s = parse_sweep_space(R"({"schema_version":1,
        "slots":{"A1":{"accel":["dfadd"]}},
        "frequencies":{"a1":[10000000],"0":[20000000]},
        "tg_counts":[0,1],"placements":["swap"],"repetitions":3,"seed":9,
        "budget_bytes":4096,"limit_fs":1000})",
                                           base);
    CHECK(s.slots.at("A1").replication == std::vector<std::uint32_t>{1});
    CHECK(s.frequencies.at(testbed::kA1) == std::vector<FrequencyHz>{10 * MHz});
    CHECK(s.frequencies.at(testbed::kNocMem) == std::vector<FrequencyHz>{20 * MHz});
    CHECK(s.placements == std::vector<Placement>{Placement::Swap});
    CHECK(s.repetitions == 3);
    CHECK(s.seed == 9);
    CHECK(s.budget_bytes == 4096);
    CHECK(s.limit == SimTime{1000});

    CHECK_THROWS_AS(parse_sweep_space("{", base), ConfigError);
    CHECK_THROWS_AS(parse_sweep_space(R"({"schema_version":1,"bogus":1})", base), ConfigError);
    CHECK_THROWS_AS(parse_sweep_space(R"({"schema_version":1,"slots":{"A3":{"accel":[]}}})", base), ConfigError);
    CHECK_THROWS_AS(parse_sweep_space(R"({"schema_version":1,"frequencies":{"mars":[1]}})", base), ConfigError);
    CHECK_THROWS_AS(parse_sweep_space(R"({"schema_version":1,"placements":["left"]})", base), ConfigError);
    CHECK_THROWS_AS(parse_sweep_space(R"({"schema_version":1,"budget_bytes":0})", base), ConfigError);
    CHECK_THROWS_AS(
        parse_sweep_space(R"({"schema_version":1,"slots":{"A1":{"accel":["x"],"replication":[0]}}})", base),
        ConfigError);
}

TEST_CASE("materialize applies slots, swaps, clocks and TG count")
{
    const SoCDescription base = reference_testbed();
    SweepPoint p;
    p.a1 = SlotSetting{"gsm", 2};
    p.a2 = SlotSetting{"adpcm", 4};
    p.frequencies[testbed::kTg] = 20 * MHz;
    p.tg_count = 3;
    SoCDescription d = materialize(base, p);
    CHECK(d.tile_at(testbed::kA1Pos).accel == "gsm");
    CHECK(d.tile_at(testbed::kA1Pos).replication == 2);
    CHECK(d.tile_at(testbed::kA2Pos).accel == "adpcm");
    CHECK(d.tile_at(testbed::kA2Pos).enabled_at_start);
    CHECK(d.island(testbed::kTg).clock.freq_hz == 20 * MHz);
    const auto tgs = tg_positions(d);
    CHECK(d.tile_at(tgs[2]).enabled_at_start);
    CHECK_FALSE(d.tile_at(tgs[3]).enabled_at_start);
    CHECK(validate(d).empty());

    p.placement = Placement::Swap;
    d = materialize(base, p);
    CHECK(d.tile_at(testbed::kA1Pos).accel == "adpcm");
    CHECK(d.tile_at(testbed::kA2Pos).accel == "gsm");

    p.a2 = SlotSetting{};
    p.placement = Placement::Default;
    d = materialize(base, p);
    CHECK_FALSE(d.tile_at(testbed::kA2Pos).enabled_at_start);

    p.tg_count = 12;
    CHECK_THROWS_AS(materialize(base, p), ConfigError);
    p.tg_count = 0;
    p.a1.accel = "sha";
    CHECK_THROWS_AS(materialize(base, p), ConfigError);
}

TEST_CASE("failed points are marked and the sweep continues")
{
    const SoCDescription base = reference_testbed();
    SweepSpace s;
    s.slots["A1"] = SlotChoices{{"dfadd", "sha"}, {1}};
    s.frequencies[testbed::kA1] = {50 * MHz, 60 * MHz};
    s.budget_bytes = 1024;
    const auto rows = run_sweep(base, s, 2);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].ok());
    CHECK(rows[1].status.rfind("error: config:", 0) == 0); // 60 MHz is above the island range
    CHECK(rows[2].status.rfind("error: config:", 0) == 0);
    CHECK(rows[3].status.rfind("error: config:", 0) == 0);

    SweepSpace slow;
    slow.slots["A1"] = SlotChoices{{"dfsin"}, {1}};
    slow.limit = SimTime::from_us(10);
    const auto t = run_sweep(base, slow, 1);
    REQUIRE(t.size() == 1);
    CHECK(t[0].status == "timeout");
}

TEST_CASE("sweep rows carry area estimates and replay through a single run")
{
    const SoCDescription base = reference_testbed();
    SweepSpace s;
    s.slots["A1"] = SlotChoices{{"dfmul"}, {1, 4}};
    s.slots["A2"] = SlotChoices{{"adpcm"}, {2}};
    s.tg_counts = {2};
    s.budget_bytes = 8192;
    const auto rows = run_sweep(base, s, 1);
    REQUIRE(rows.size() == 2);
    CHECK(rows[1].a1.has_area);
    CHECK(rows[1].a1.lut == 17382);
    CHECK(rows[1].a1.dsp == 100);
    CHECK(rows[1].a2.bram == 48);
    CHECK(rows[0].a1.throughput_mbps > 0.0);

    for (const auto& row : rows)
    {
        RunOptions o;
        o.seed = row.point.seed;
        o.budget_bytes = s.budget_bytes;
        o.trace = false;
        const RunResult r = run_simulation(materialize(base, row.point), o);
        CHECK(r.tile("A1")->throughput_mbps == row.a1.throughput_mbps);
        CHECK(r.tile("A2")->throughput_mbps == row.a2.throughput_mbps);
        CHECK(r.end == row.sim_time);
    }
}

TEST_CASE("sweep output does not depend on the worker count")
{
    const SoCDescription base = reference_testbed();
    const SweepSpace s = parse_sweep_space(read_file(VESPA_DATA_DIR "/sweeps/dse_example.json"), base);
    const auto serial = capture([&](std::ostream& os) { write_sweep_csv(os, run_sweep(base, s, 1)); });
    const auto parallel = capture([&](std::ostream& os) { write_sweep_csv(os, run_sweep(base, s, 5)); });
    CHECK(serial == parallel);
    CHECK(lines(serial) == sweep_size(s) + 1);
}

TEST_CASE("schedule parsing")
{
    const SoCDescription d = reference_testbed();
    const Schedule s = parse_schedule(R"({"schema_version":1,"duration_fs":1000,"commands":[
        {"time_fs":1,"op":"set_freq","islands":{"a1":20000000,"tg":30000000}},
        {"time_fs":2,"op":"tg_count","count":4},
        {"time_fs":3,"op":"tg_tile","tile":[1,1],"on":false},
        {"time_fs":4,"op":"reset_counters"},
        {"time_fs":5,"op":"sample","tile":[0,2]},
        {"time_fs":6,"op":"read_register","address":4096}]})",
                                      d);
    REQUIRE(s.commands.size() == 6);
    CHECK(s.duration == SimTime{1000});
    CHECK(s.commands[0].frequencies.at(testbed::kTg) == 30 * MHz);
    CHECK(s.commands[1].count == 4);
    CHECK(s.commands[2].tile == Position{1, 1});
    CHECK_FALSE(s.commands[2].on);
    CHECK(s.commands[5].address == 4096);

    CHECK(parse_schedule(R"({"schema_version":1,"duration_fs":10})", d).commands.empty());
    auto bad = [&](const char* text) { CHECK_THROWS_AS(parse_schedule(text, d), ConfigError); };
    bad(R"({"schema_version":1})");
    bad(R"({"schema_version":1,"duration_fs":10,"commands":[{"time_fs":1,"op":"jump"}]})");
    bad(R"({"schema_version":1,"duration_fs":10,"commands":[{"time_fs":3,"op":"reset_counters"},
                                                            {"time_fs":3,"op":"reset_counters"}]})");
    bad(R"({"schema_version":1,"duration_fs":10,"commands":[{"time_fs":10,"op":"reset_counters"}]})");
    bad(R"({"schema_version":1,"duration_fs":10,"commands":[{"time_fs":1,"op":"set_freq","islands":{}}]})");
    bad(R"({"schema_version":1,"duration_fs":10,"commands":[{"time_fs":1,"op":"sample","tile":[7,7]}]})");
    bad(R"({"schema_version":1,"duration_fs":10,"commands":[{"time_fs":1,"op":"tg_count"}]})");
}

TEST_CASE("profile logs rejected commands and keeps running")
{
    SoCDescription d = reference_testbed();
    const Schedule s = parse_schedule(R"({"schema_version":1,"duration_fs":200000000000,"commands":[
        {"time_fs":10000000000,"op":"set_freq","islands":{"a1":20000000}},
        {"time_fs":12000000000,"op":"set_freq","islands":{"a1":30000000}},
        {"time_fs":14000000000,"op":"set_freq","islands":{"a2":33000000}},
        {"time_fs":16000000000,"op":"tg_count","count":20},
        {"time_fs":18000000000,"op":"tg_tile","tile":[0,2],"on":true},
        {"time_fs":20000000000,"op":"read_register","address":2},
        {"time_fs":30000000000,"op":"tg_count","count":11},
        {"time_fs":40000000000,"op":"sample","tile":[0,3]},
        {"time_fs":50000000000,"op":"reset_counters"},
        {"time_fs":60000000000,"op":"sample","tile":[0,3]}]})",
                                      d);
    const ProfileResult r = run_profile(d, s, SimTime::from_us(10), 1);
    REQUIRE(r.log.size() == 10);
    CHECK(r.log[0].result.rfind("accepted", 0) == 0);
    CHECK(r.log[1].result == "rejected: busy");
    CHECK(r.log[2].result == "rejected: off_step_grid");
    CHECK(r.log[3].result.rfind("rejected", 0) == 0);
    CHECK(r.log[4].result.rfind("rejected", 0) == 0);
    CHECK(r.log[5].result == "rejected: unmapped address");
    CHECK(r.log[6].result == "ok");
    CHECK(r.mem_traffic.size() == 20);
    REQUIRE(r.samples.size() == 10);
    CHECK(r.samples[0].probe == "MEM");
    CHECK(r.samples[0].stat == "pkts_in");
    CHECK(r.samples[0].value > 0.0);
    CHECK(r.samples[5].value < r.samples[0].value);

    const std::string freq = capture([&](std::ostream& os) { write_frequency_csv(os, r); });
    CHECK(first_line(freq) == "time_fs,island,freq_hz");
    CHECK(freq.find("20000000000,a1,20000000") != std::string::npos);
    const std::string plot = capture([&](std::ostream& os) { write_plot_json(os, r); });
    CHECK(plot.find("\"panels\"") != std::string::npos);
}

TEST_CASE("an empty schedule gives a flat profile")
{
    SoCDescription d = reference_testbed();
    for (auto p : tg_positions(d))
    {
        d.tile_at(p).enabled_at_start = true;
    }
    const Schedule s = parse_schedule(R"({"schema_version":1,"duration_fs":2000000000000})", d);
    const ProfileResult r = run_profile(d, s, SimTime::from_us(100), 1);
    CHECK(r.log.empty());
    // Start and end point per island, no change in between.
    CHECK(r.frequency.size() == 2 * d.islands.size());
    for (std::size_t i = 0; i < d.islands.size(); ++i)
    {
        CHECK(r.frequency[i].freq_hz == r.frequency[i + d.islands.size()].freq_hz);
    }
    REQUIRE(r.mem_traffic.size() == 20);
    const double steady = mean_rate(r.mem_traffic, SimTime::from_us(100), SimTime::from_us(200), SimTime::from_ms(2));
    for (std::size_t i = 2; i < r.mem_traffic.size(); ++i)
    {
        CHECK(r.mem_traffic[i].mpkts == doctest::Approx(steady).epsilon(0.05));
    }
}

TEST_CASE("mean_rate only counts whole windows inside the interval")
{
    const SimTime w = SimTime::from_us(1);
    const std::vector<RatePoint> pts{{SimTime::from_us(1), 1.0}, {SimTime::from_us(2), 2.0},
                                     {SimTime::from_us(3), 3.0}, {SimTime::from_us(4), 4.0}};
    CHECK(mean_rate(pts, w, SimTime::zero(), SimTime::from_us(4)) == doctest::Approx(2.5));
    CHECK(mean_rate(pts, w, SimTime::from_us(1), SimTime::from_us(3)) == doctest::Approx(2.5));
    CHECK(mean_rate(pts, w, SimTime::from_ns(1500), SimTime::from_us(3)) == doctest::Approx(3.0));
    CHECK(mean_rate(pts, w, SimTime::from_us(5), SimTime::from_us(6)) == 0.0);
}
