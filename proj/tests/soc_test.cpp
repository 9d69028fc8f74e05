#include <doctest.h>

#include "oracles.hpp"

#include <vespa/profiles.hpp>
#include <vespa/soc.hpp>

using namespace vespa;

namespace
{
constexpr FrequencyHz MHz = 1'000'000;

/// Runs one read chunk of `accel` from `slot` on an otherwise idle testbed and
/// returns the tile's counters.
TileCounters single_chunk(Position slot, IslandId island, const std::string& accel, FrequencyHz tile_hz)
{
    SoCDescription d = reference_testbed();
    for (auto& t : d.tiles)
    {
        t.enabled_at_start = false;
    }
    d.tile_at(slot).accel = accel;
    d.island(island).clock.freq_hz = tile_hz;
    Soc soc(d);
    const AcceleratorProfile& p = *d.find_profile(accel);
    soc.start_invocation(slot, p.items_per_chunk(), SimTime{0});
    REQUIRE(soc.run_to_completion(SimTime::from_ms(10)));
    return soc.tile(slot).counters();
}
} // namespace

TEST_CASE("idle-network RTT equals the closed-form zero-load value")
{
    struct Slot
    {
        Position pos;
        IslandId island;
    };
    const SoCDescription ref = reference_testbed();
    for (Slot slot : {Slot{testbed::kA1Pos, testbed::kA1}, Slot{testbed::kA2Pos, testbed::kA2}})
    {
        for (const char* accel : {"dfadd", "adpcm", "gsm"})
        {
            for (FrequencyHz hz : {50 * MHz, 25 * MHz, 10 * MHz})
            {
                const TileCounters c = single_chunk(slot.pos, slot.island, accel, hz);
                const AcceleratorProfile& p = *ref.find_profile(accel);
                oracle::RttInputs in;
                in.tile_hz = hz;
                in.hops = hop_count(slot.pos, testbed::kMem);
                in.bytes = static_cast<std::uint32_t>(p.items_per_chunk() * p.bytes_read_per_item);
                CAPTURE(to_string(slot.pos));
                CAPTURE(accel);
                CAPTURE(hz);
                CHECK(c.rtt_count() == 1);
                CHECK(c.rtt_sum_fs() == oracle::zero_load_rtt_fs(in));
            }
        }
    }
}

TEST_CASE("RTT oracle against hand-computed values")
{
    // A1, 16-byte read, tiles 50 MHz, NoC 100 MHz:
    // 2 + 3 + 20 + 16 + 5 = 46 router cycles = 460 ns, then 2 tile edges after -> 500 ns.
    oracle::RttInputs in;
    CHECK(oracle::zero_load_rtt_fs(in) == SimTime::from_ns(500).fs);
    // Same on a 6-hop path: 2 + 13 + 20 + 16 + 15 = 66 cycles = 660 ns -> 700 ns.
    in.hops = 6;
    CHECK(oracle::zero_load_rtt_fs(in) == SimTime::from_ns(700).fs);
}

TEST_CASE("traffic generators load the memory tile")
{
    SoCDescription d = reference_testbed();
    d.tile_at(testbed::kA1Pos).enabled_at_start = false;
    Soc soc(d);
    soc.run_until(SimTime::from_us(100));
    CHECK(soc.memory_packets_in() == 0);
    soc.set_active_tgs(3, soc.kernel().now());
    soc.run_until(SimTime::from_us(300));
    const std::uint64_t with3 = soc.memory_packets_in();
    CHECK(with3 > 0);
    const auto tgs = soc.traffic_generators();
    REQUIRE(tgs.size() == 11);
    CHECK(soc.mra(tgs[0])->enabled());
    CHECK(soc.mra(tgs[2])->enabled());
    CHECK_FALSE(soc.mra(tgs[3])->enabled());
    CHECK_THROWS_AS(soc.tg_set_enabled(testbed::kA1Pos, true, soc.kernel().now()), std::invalid_argument);
    CHECK_THROWS_AS(soc.start_invocation(tgs[0], 1, soc.kernel().now()), std::invalid_argument);

    // Turning every generator off drains the network.
    soc.set_active_tgs(0, soc.kernel().now());
    soc.run_until(SimTime::from_us(600));
    const std::uint64_t drained = soc.memory_packets_in();
    soc.run_until(SimTime::from_us(900));
    CHECK(soc.memory_packets_in() == drained);
    CHECK(soc.mesh().in_flight() == 0);
}

TEST_CASE("budgeted accelerator batches complete and report throughput")
{
    SoCDescription d = reference_testbed();
    d.tile_at(testbed::kA1Pos).replication = 2;
    SocOptions o;
    o.accel_budget_bytes = 4096;
    Soc soc(d, o);
    soc.start_accelerators(SimTime{0});
    CHECK_FALSE(soc.accelerators_done());
    CHECK(soc.run_to_completion(SimTime::from_ms(100)));
    const MraTile* a1 = soc.mra(testbed::kA1Pos);
    REQUIRE(a1->invocations().size() == 1);
    CHECK(a1->bytes_read() == 4096);
    CHECK(a1->invocations()[0].items == 4096 / 16);
    CHECK(a1->bridge().grants(BridgeChannel::RdCtrl, 0) == a1->bridge().grants(BridgeChannel::RdCtrl, 1));
    CHECK(a1->throughput_mbps() > 0.0);
    CHECK(soc.memory().bytes_written_by().at(testbed::kA1Pos) == 4096 / 2);
}

TEST_CASE("run_to_completion honours its limit")
{
    SoCDescription d = reference_testbed();
    d.tile_at(testbed::kA1Pos).accel = "dfsin";
    SocOptions o;
    o.accel_budget_bytes = 1'000'000;
    Soc soc(d, o);
    soc.start_accelerators(SimTime{0});
    CHECK_FALSE(soc.run_to_completion(SimTime::from_us(50)));
    CHECK(soc.kernel().now() <= SimTime::from_us(50));
}

TEST_CASE("slowing the accelerator island slows a compute-bound tile")
{
    auto run = [](FrequencyHz hz) {
        SoCDescription d = reference_testbed();
        d.tile_at(testbed::kA1Pos).accel = "adpcm";
        d.island(testbed::kA1).clock.freq_hz = hz;
        SocOptions o;
        o.accel_budget_bytes = 2048;
        Soc soc(d, o);
        soc.start_accelerators(SimTime{0});
        REQUIRE(soc.run_to_completion(SimTime::from_ms(100)));
        return soc.mra(testbed::kA1Pos)->throughput_mbps();
    };
    const double fast = run(50 * MHz);
    const double slow = run(25 * MHz);
    CHECK(slow / fast == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("a DFS write during a run changes the island clock")
{
    SoCDescription d = reference_testbed();
    d.tile_at(testbed::kA1Pos).accel = "adpcm";
    SocOptions o;
    o.loop_accelerators = true;
    Soc soc(d, o);
    soc.start_accelerators(SimTime{0});
    soc.run_until(SimTime::from_us(100));
    const WriteOutcome w = soc.write_frequency(testbed::kA1, 20 * MHz, soc.kernel().now());
    CHECK(w.accepted);
    soc.run_until(SimTime::from_us(200));
    CHECK(soc.clocks().domain(testbed::kA1).frequency_at(soc.kernel().now()) == 20 * MHz);
    CHECK(soc.registers().read(regs::freq_register(testbed::kA1)) == 20);
    CHECK_FALSE(soc.write_frequency(testbed::kA1, 75 * MHz, soc.kernel().now()).accepted);
}

TEST_CASE("same seed, same trajectory")
{
    auto run = [](std::uint64_t seed) {
        SoCDescription d = reference_testbed();
        for (auto pos : tg_positions(d))
        {
            d.tile_at(pos).enabled_at_start = true;
        }
        SocOptions o;
        o.seed = seed;
        Soc soc(d, o);
        soc.run_until(SimTime::from_us(200));
        return std::make_pair(soc.memory_packets_in(), soc.kernel().events_processed());
    };
    CHECK(run(5) == run(5));
    CHECK(run(5) != run(6));
}

TEST_CASE("invalid descriptions are refused")
{
    SoCDescription d = reference_testbed();
    d.rows = 0;
    CHECK_THROWS_AS(Soc{d}, ConfigError);
}
