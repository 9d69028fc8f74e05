#include <doctest.h>

#include <vespa/config.hpp>
#include <vespa/noc.hpp>

#include <algorithm>
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

bool any_contains(const std::vector<std::string>& msgs, const std::string& needle)
{
    return std::any_of(msgs.begin(), msgs.end(),
                       [&](const std::string& m) { return m.find(needle) != std::string::npos; });
}

std::string replace_once(std::string s, const std::string& from, const std::string& to)
{
    const auto pos = s.find(from);
    REQUIRE(pos != std::string::npos);
    return s.replace(pos, from.size(), to);
}
} // namespace

TEST_CASE("reference testbed layout")
{
    const SoCDescription d = reference_testbed();
    CHECK(validate(d).empty());
    CHECK(d.rows == 4);
    CHECK(d.cols == 4);
    CHECK(d.islands.size() == 6);
    CHECK(d.mem_position() == testbed::kMem);
    CHECK(tg_positions(d).size() == 11);
    CHECK(d.tile_at(testbed::kA1Pos).kind == TileKind::Accel);
    CHECK(d.tile_at(testbed::kA2Pos).kind == TileKind::Accel);
    CHECK(hop_count(testbed::kA1Pos, testbed::kMem) == 1);
    CHECK(hop_count(testbed::kA2Pos, testbed::kMem) == 6);
    CHECK(*d.find_named("A1") == testbed::kA1Pos);
    CHECK(*d.find_named("A2") == testbed::kA2Pos);
    CHECK_FALSE(d.find_named("A3").has_value());

    // Every router and the memory tile share one clock.
    for (int r = 0; r < 4; ++r)
    {
        for (int c = 0; c < 4; ++c)
        {
            CHECK(d.router_island(Position{r, c}) == testbed::kNocMem);
        }
    }
    CHECK(d.tile_island(testbed::kMem) == testbed::kNocMem);
    const IslandSpec& noc = d.island(testbed::kNocMem);
    CHECK(noc.clock.dfs);
    CHECK(noc.clock.freq_hz == 100 * testbed::kMHz);
    CHECK(noc.clock.range.legal_values().size() == 19);
    CHECK(d.island(testbed::kA1).clock.freq_hz == 50 * testbed::kMHz);
    CHECK(d.island(testbed::kA1).clock.range.max_hz == 50 * testbed::kMHz);
}

TEST_CASE("five-clock variant shares the CPU and IO island")
{
    const SoCDescription d = reference_testbed(IslandVariant::FiveClocks);
    CHECK(validate(d).empty());
    CHECK(d.islands.size() == 5);
    CHECK(d.tile_island(testbed::kCpuPos) == d.tile_island(testbed::kIoPos));
}

TEST_CASE("serialize and load round-trip")
{
    for (auto variant : {IslandVariant::SixClocks, IslandVariant::FiveClocks})
    {
        const SoCDescription d = reference_testbed(variant);
        const std::string text = serialize(d);
        const SoCDescription back = load_description(text);
        CHECK(back == d);
        CHECK(serialize(back) == text);
    }
}

TEST_CASE("shipped testbed files match the built-in description")
{
    CHECK(load_description_file(VESPA_DATA_DIR "/testbed.json") == reference_testbed());
    CHECK(load_description_file(VESPA_DATA_DIR "/testbed_five_clocks.json") ==
          reference_testbed(IslandVariant::FiveClocks));
    CHECK_NOTHROW(load_description_file(VESPA_DATA_DIR "/dfs_profile/soc.json"));
}

TEST_CASE("schema violations name their location")
{
    const std::string good = read_file(VESPA_DATA_DIR "/testbed.json");
    REQUIRE_NOTHROW(load_description(good));

    CHECK_THROWS_AS(load_description("{"), ConfigError);
    CHECK_THROWS_AS(load_description("[]"), ConfigError);
    CHECK_THROWS_WITH_AS(load_description(replace_once(good, "\"schema_version\": 1", "\"schema_version\": 2")),
                         doctest::Contains("schema_version"), ConfigError);
    CHECK_THROWS_WITH_AS(load_description(replace_once(good, "\"grid\"", "\"grd\"")),
                         doctest::Contains("unknown key"), ConfigError);
    CHECK_THROWS_WITH_AS(load_description(replace_once(good, "\"kind\": \"MEM\"", "\"kind\": \"RAM\"")),
                         doctest::Contains("tile kind"), ConfigError);
    CHECK_THROWS_WITH_AS(load_description(replace_once(good, "\"mode\": \"dual\"", "\"mode\": \"triple\"")),
                         doctest::Contains("mode"), ConfigError);
    CHECK_THROWS_WITH_AS(load_description(replace_once(good, "\"latency_cycles\": 20", "\"latency_cycles\": -1")),
                         doctest::Contains("latency_cycles"), ConfigError);
}

TEST_CASE("validate reports every broken invariant")
{
    SoCDescription d = reference_testbed();
    d.tile_at(testbed::kCpuPos).kind = TileKind::Mem;
    d.tile_at(testbed::kA1Pos).replication = 0;
    d.tile_at(testbed::kA2Pos).accel = "nope";
    d.island(testbed::kA1).clock.freq_hz = 33 * testbed::kMHz;
    d.noc_params.resync_depth = 1;
    d.mem_service.bytes_per_cycle = 0;
    const auto msgs = validate(d);
    CHECK(any_contains(msgs, "exactly one MEM tile"));
    CHECK(any_contains(msgs, "replication"));
    CHECK(any_contains(msgs, "unknown accelerator profile 'nope'"));
    CHECK(any_contains(msgs, "step grid"));
    CHECK(any_contains(msgs, "resynchronizer"));
    CHECK(any_contains(msgs, "bytes_per_cycle"));
    CHECK_THROWS_AS(require_valid(d), ConfigError);
}

TEST_CASE("islands must cover every tile and router exactly once")
{
    SoCDescription d = reference_testbed();
    d.island(testbed::kTg).tiles.pop_back();
    d.island(testbed::kA1).routers.push_back(Position{0, 0});
    const auto msgs = validate(d);
    CHECK(any_contains(msgs, "not in any island"));
    CHECK(any_contains(msgs, "more than one island"));
}

TEST_CASE("profile invariants")
{
    SoCDescription d = reference_testbed();
    d.profiles.front().compute_cycles_per_item = 0;
    d.profiles.back().burst_bytes = 1'000'000;
    const auto msgs = validate(d);
    CHECK(any_contains(msgs, "strictly positive"));
    CHECK(any_contains(msgs, "burst_bytes"));

    AcceleratorProfile p;
    p.bytes_read_per_item = 8;
    p.burst_bytes = 256;
    CHECK(p.items_per_chunk() == 32);
    p.burst_bytes = 4;
    CHECK(p.items_per_chunk() == 1);
}
