#include <doctest.h>

#include <vespa/monitor.hpp>

using namespace vespa;

namespace
{
struct Regs
{
    Regs() : clocks(kernel, islands(), 2), map({&t0, &t1}, clocks, [this] { return kernel.now(); }) {}

    static std::vector<IslandClockConfig> islands()
    {
        IslandClockConfig fixed;
        fixed.id = 0;
        fixed.initial_hz = 100'000'000;
        IslandClockConfig dfs;
        dfs.id = 1;
        dfs.dfs = true;
        dfs.initial_hz = 50'000'000;
        dfs.range = FrequencyRange{10'000'000, 50'000'000, 5'000'000};
        return {fixed, dfs};
    }

    Kernel kernel;
    ClockTree clocks;
    TileCounters t0;
    TileCounters t1;
    RegisterMap map;
};
} // namespace

TEST_CASE("counters accumulate and honour their enables")
{
    TileCounters c;
    c.count_in();
    c.count_in();
    c.count_out();
    c.record_rtt(SimTime::from_ns(100), SimTime::from_ns(350));
    c.record_rtt(SimTime::from_ns(400), SimTime::from_ns(450));
    CHECK(c.pkts_in() == 2);
    CHECK(c.pkts_out() == 1);
    CHECK(c.rtt_count() == 2);
    CHECK(c.rtt_sum_fs() == SimTime::from_ns(300).fs);
    CHECK(c.rtt_last_fs() == SimTime::from_ns(50).fs);
    CHECK(c.rtt_mean_fs() == doctest::Approx(150e6));
    CHECK_THROWS_AS(c.record_rtt(SimTime::from_ns(10), SimTime::from_ns(5)), std::logic_error);

    c.set_enabled(Statistic::PktsIn, false);
    c.count_in();
    CHECK(c.pkts_in() == 2);
    CHECK(c.enable_mask() == 0b1101);

    c.exec_start();
    CHECK(c.exec_running());
    c.exec_stop(1234);
    CHECK(c.exec_time() == 1234);
    c.reset_manual();
    CHECK(c.pkts_out() == 0);
    CHECK(c.rtt_count() == 0);
    CHECK(c.rtt_mean_fs() == 0.0);
    CHECK(c.exec_time() == 1234); // exec_time is owned by the tile
}

TEST_CASE("register addresses")
{
    Regs r;
    const auto all = r.map.addresses();
    // One frequency and one status register for the DFS island plus 8 words per tile.
    CHECK(all.size() == 2 + 2 * 8);
    CHECK(std::is_sorted(all.begin(), all.end()));
    CHECK(r.map.mapped(regs::freq_register(1)));
    CHECK_FALSE(r.map.mapped(regs::freq_register(0))); // fixed island
    CHECK_FALSE(r.map.mapped(regs::tile_register(2, 0)));
    CHECK_FALSE(r.map.mapped(regs::tile_register(0, 2)));
    CHECK_THROWS_AS(r.map.read(0x4), UnmappedAddress);
    CHECK_THROWS_AS(r.map.write(0x4, 0), UnmappedAddress);
}

TEST_CASE("tile counters read through the register map")
{
    Regs r;
    r.t1.count_in();
    r.t1.count_out();
    r.t1.count_out();
    r.t1.record_rtt(SimTime{0}, SimTime::from_ns(700));
    CHECK(r.map.read(regs::tile_register(1, regs::kPktsIn)) == 1);
    CHECK(r.map.read(regs::tile_register(1, regs::kPktsOut)) == 2);
    CHECK(r.map.read(regs::tile_register(1, regs::kRttCount)) == 1);
    CHECK(r.map.read(regs::tile_register(1, regs::kRttLastNs)) == 700);
    CHECK(r.map.read(regs::tile_register(0, regs::kPktsIn)) == 0);
    CHECK(r.map.read(regs::tile_register(1, regs::kControl)) == regs::kControlEnableMask);
}

TEST_CASE("the high RTT word is latched by the low read")
{
    Regs r;
    // 5e9 fs does not fit in 32 bits.
    r.t0.record_rtt(SimTime{0}, SimTime{5'000'000'000ULL});
    const std::uint32_t lo = r.map.read(regs::tile_register(0, regs::kRttSumLo));
    r.t0.record_rtt(SimTime{0}, SimTime{5'000'000'000ULL}); // changes both words
    const std::uint32_t hi = r.map.read(regs::tile_register(0, regs::kRttSumHi));
    CHECK(((static_cast<std::uint64_t>(hi) << 32) | lo) == 5'000'000'000ULL);
}

TEST_CASE("control register resets and masks counters")
{
    Regs r;
    r.t0.count_in();
    r.t0.record_rtt(SimTime{0}, SimTime{10});
    CHECK(r.map.write(regs::tile_register(0, regs::kControl), regs::kControlReset | 0xF).ok);
    CHECK(r.t0.pkts_in() == 0);
    CHECK(r.t0.rtt_count() == 0);
    CHECK(r.map.write(regs::tile_register(0, regs::kControl), 0x1).ok);
    r.t0.count_in();
    r.t0.count_out();
    CHECK(r.t0.pkts_in() == 0);
    CHECK(r.t0.pkts_out() == 0);
    CHECK_FALSE(r.map.write(regs::tile_register(0, regs::kPktsIn), 5).ok);
}

TEST_CASE("frequency registers drive the DFS actuator")
{
    Regs r;
    CHECK(r.map.read(regs::freq_register(1)) == 50);
    const RegisterWrite w = r.map.write(regs::freq_register(1), 20);
    CHECK(w.ok);
    REQUIRE(w.frequency.has_value());
    CHECK(w.frequency->accepted);
    CHECK(r.map.read(regs::status_register(1)) == (20U | regs::kStatusBusy));
    const RegisterWrite bad = r.map.write(regs::freq_register(1), 70);
    CHECK_FALSE(bad.ok);
    r.kernel.run_until(SimTime::from_us(20));
    CHECK(r.map.read(regs::freq_register(1)) == 20);
    CHECK(r.map.read(regs::status_register(1)) == 20);
    CHECK_FALSE(r.map.write(regs::status_register(1), 1).ok);
}

TEST_CASE("traffic sampler converts packet counts to Mpkt/s")
{
    CHECK(sample_traffic(1000, SimTime::from_ms(1), SimTime::from_ms(1)).mpkts == doctest::Approx(1.0));
    CHECK_THROWS_AS(sample_traffic(1, SimTime{0}, SimTime{0}), std::invalid_argument);

    Kernel k;
    std::uint64_t counter = 0;
    // One packet every 100 ns: 10 Mpkt/s.
    std::function<void()> tick = [&] {
        ++counter;
        k.schedule(k.now() + SimTime::from_ns(100), 0, tick);
    };
    k.schedule(SimTime::from_ns(50), 0, tick);
    TrafficSampler s(k, SimTime::from_us(10), [&] { return counter; });
    s.start(SimTime{0}, SimTime::from_us(50));
    k.run_until(SimTime::from_us(60));
    REQUIRE(s.points().size() == 5);
    for (const auto& p : s.points())
    {
        CHECK(p.mpkts == doctest::Approx(10.0));
    }
    CHECK(s.points().back().window_end == SimTime::from_us(50));
}
