#pragma once

#include "vespa/sim_time.hpp"

#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace vespa
{

/// Hard fault inside the simulation (kernel misuse, protocol violation,
/// livelock, watchdog expiry). Always indicates a bug or an invalid model.
class SimulationFault : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

using ComponentId = std::uint32_t;

struct Event
{
    SimTime time;
    std::uint64_t sequence = 0;
    ComponentId target = 0;
    std::function<void()> action;
};

struct RunSummary
{
    std::uint64_t events = 0;
    SimTime final_time;
    bool stopped = false;
};

/// Min-heap of events ordered by (time, sequence).
class EventQueue
{
public:
    void push(Event ev);
    Event pop();
    const Event& top() const { return heap_.front(); }
    bool empty() const noexcept { return heap_.empty(); }
    std::size_t size() const noexcept { return heap_.size(); }

private:
    std::vector<Event> heap_;
};

/// Single-threaded discrete-event kernel. A Kernel together with everything
/// scheduled on it is an isolated value; independent simulations may live on
/// different threads but one kernel must never be shared.
class Kernel
{
public:
    static constexpr std::uint64_t kDefaultZeroDelayBound = 10'000'000;

    Kernel() = default;
    Kernel(const Kernel&) = delete;
    Kernel& operator=(const Kernel&) = delete;

    /// Enqueue `action` at absolute time `t`. Scheduling into the past throws.
    std::uint64_t schedule(SimTime t, ComponentId target, std::function<void()> action);

    /// Process every event with time <= t_end.
    RunSummary run_until(SimTime t_end);

    /// Makes the current run_until return after the running event.
    void stop() noexcept { stop_requested_ = true; }

    SimTime now() const noexcept { return now_; }
    std::uint64_t events_processed() const noexcept { return processed_; }
    bool idle() const noexcept { return queue_.empty(); }
    SimTime next_event_time() const;

    void set_zero_delay_bound(std::uint64_t bound) noexcept { zero_delay_bound_ = bound; }

private:
    EventQueue queue_;
    SimTime now_;
    std::uint64_t next_sequence_ = 0;
    std::uint64_t processed_ = 0;
    std::uint64_t zero_delay_bound_ = kDefaultZeroDelayBound;
    bool stop_requested_ = false;
};

/// Per-component random streams derived from one 64-bit seed. The stream of a
/// component depends only on (seed, component id).
class RngStreams
{
public:
    explicit RngStreams(std::uint64_t seed) : seed_(seed) {}

    std::mt19937_64 stream(ComponentId id) const;
    std::uint64_t seed() const noexcept { return seed_; }

private:
    std::uint64_t seed_;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

} // namespace vespa
