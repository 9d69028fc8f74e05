#include <doctest.h>

#include <vespa/engine.hpp>
#include <vespa/sim_time.hpp>

#include <set>
#include <vector>

using namespace vespa;

TEST_CASE("edge times are rounded half-up from the cycle index")
{
    CHECK(cycle_edge_time(100'000'000, 0).fs == 0);
    CHECK(cycle_edge_time(100'000'000, 1).fs == 10'000'000);
    // 1e15 / 30e6 = 33333333.33...
    CHECK(cycle_edge_time(30'000'000, 1).fs == 33'333'333);
    // 2e15 / 30e6 = 66666666.67 rounds up
    CHECK(cycle_edge_time(30'000'000, 2).fs == 66'666'667);
    // 1e15 / 40e6 = 25e6 exactly
    CHECK(cycle_edge_time(40'000'000, 3).fs == 75'000'000);
    // No drift after many cycles: 30 MHz * 3e7 cycles is exactly one second.
    CHECK(cycle_edge_time(30'000'000, 30'000'000).fs == kFemtosPerSecond);
}

TEST_CASE("first edge index at or after an offset")
{
    CHECK(first_edge_index_at_or_after(100'000'000, SimTime{0}) == 0);
    CHECK(first_edge_index_at_or_after(100'000'000, SimTime{1}) == 1);
    CHECK(first_edge_index_at_or_after(100'000'000, SimTime{10'000'000}) == 1);
    CHECK(first_edge_index_at_or_after(100'000'000, SimTime{10'000'001}) == 2);
    for (std::uint64_t n = 0; n < 200; ++n)
    {
        const SimTime e = cycle_edge_time(30'000'000, n);
        CHECK(first_edge_index_at_or_after(30'000'000, e) == n);
        CHECK(first_edge_index_at_or_after(30'000'000, SimTime{e.fs + 1}) == n + 1);
    }
}

TEST_CASE("simulated time arithmetic refuses to wrap")
{
    CHECK_THROWS_AS(SimTime::max() + SimTime{1}, SimTimeOverflow);
    CHECK_THROWS_AS(SimTime{1} - SimTime{2}, std::logic_error);
    CHECK((SimTime::from_us(3) - SimTime::from_ns(1000)).fs == SimTime::from_us(2).fs);
    CHECK(to_string(SimTime{42}) == "42 fs");
}

TEST_CASE("kernel orders events by time then insertion")
{
    Kernel k;
    std::vector<int> order;
    k.schedule(SimTime{20}, 0, [&] { order.push_back(3); });
    k.schedule(SimTime{10}, 0, [&] { order.push_back(1); });
    k.schedule(SimTime{10}, 0, [&] { order.push_back(2); });
    k.schedule(SimTime{30}, 0, [&] { order.push_back(4); });
    const RunSummary s = k.run_until(SimTime{25});
    CHECK(order == std::vector<int>{1, 2, 3});
    CHECK(s.events == 3);
    CHECK(s.final_time == SimTime{20});
    CHECK(k.next_event_time() == SimTime{30});
    k.run_until(SimTime{100});
    CHECK(order.back() == 4);
    CHECK(k.idle());
}

TEST_CASE("kernel rejects scheduling into the past")
{
    Kernel k;
    k.schedule(SimTime{100}, 7, [] {});
    k.run_until(SimTime{100});
    CHECK_THROWS_AS(k.schedule(SimTime{99}, 7, [] {}), SimulationFault);
    CHECK_NOTHROW(k.schedule(SimTime{100}, 7, [] {}));
}

TEST_CASE("zero-delay livelock is detected")
{
    Kernel k;
    k.set_zero_delay_bound(1000);
    std::function<void()> loop = [&] { k.schedule(k.now(), 1, loop); };
    k.schedule(SimTime{5}, 1, loop);
    CHECK_THROWS_AS(k.run_until(SimTime{10}), SimulationFault);
}

TEST_CASE("stop ends the current run after the running event")
{
    Kernel k;
    int ran = 0;
    k.schedule(SimTime{1}, 0, [&] {
        ++ran;
        k.stop();
    });
    k.schedule(SimTime{2}, 0, [&] { ++ran; });
    const RunSummary s = k.run_until(SimTime{10});
    CHECK(s.stopped);
    CHECK(ran == 1);
    k.run_until(SimTime{10});
    CHECK(ran == 2);
}

TEST_CASE("random streams depend only on seed and component")
{
    RngStreams a(7);
    RngStreams b(7);
    RngStreams c(8);
    auto s1 = a.stream(3);
    auto s2 = b.stream(3);
    auto s3 = a.stream(4);
    auto s4 = c.stream(3);
    const auto v1 = s1();
    CHECK(v1 == s2());
    CHECK(v1 != s3());
    CHECK(v1 != s4());
    std::set<std::uint64_t> distinct;
    for (std::uint64_t i = 0; i < 1000; ++i)
    {
        distinct.insert(splitmix64(i));
    }
    CHECK(distinct.size() == 1000);
}
