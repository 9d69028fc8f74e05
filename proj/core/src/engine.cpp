#include "vespa/engine.hpp"

#include <algorithm>

namespace vespa
{

namespace
{
struct LaterFirst
{
    bool operator()(const Event& a, const Event& b) const noexcept
    {
        if (a.time != b.time)
        {
            return a.time > b.time;
        }
        return a.sequence > b.sequence;
    }
};
} // namespace

void EventQueue::push(Event ev)
{
    heap_.push_back(std::move(ev));
    std::push_heap(heap_.begin(), heap_.end(), LaterFirst{});
}

Event EventQueue::pop()
{
    std::pop_heap(heap_.begin(), heap_.end(), LaterFirst{});
    Event ev = std::move(heap_.back());
    heap_.pop_back();
    return ev;
}

std::uint64_t Kernel::schedule(SimTime t, ComponentId target, std::function<void()> action)
{
    if (t < now_)
    {
        throw SimulationFault("schedule into the past: event at " + to_string(t) + " while now is " + to_string(now_) +
                              " (component " + std::to_string(target) + ")");
    }
    const std::uint64_t seq = next_sequence_++;
    queue_.push(Event{t, seq, target, std::move(action)});
    return seq;
}

SimTime Kernel::next_event_time() const
{
    return queue_.empty() ? SimTime::max() : queue_.top().time;
}

RunSummary Kernel::run_until(SimTime t_end)
{
    RunSummary summary;
    stop_requested_ = false;
    std::uint64_t same_instant = 0;
    while (!queue_.empty() && queue_.top().time <= t_end)
    {
        Event ev = queue_.pop();
        if (ev.time == now_)
        {
            if (++same_instant > zero_delay_bound_)
            {
                throw SimulationFault("livelock: more than " + std::to_string(zero_delay_bound_) +
                                      " events at " + to_string(now_) + " (last target component " +
                                      std::to_string(ev.target) + ")");
            }
        }
        else
        {
            same_instant = 1;
        }
        now_ = ev.time;
        ++processed_;
        ++summary.events;
        ev.action();
        if (stop_requested_)
        {
            summary.stopped = true;
            break;
        }
    }
    summary.final_time = now_;
    return summary;
}

std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::mt19937_64 RngStreams::stream(ComponentId id) const
{
    return std::mt19937_64{splitmix64(seed_ ^ splitmix64(0x5eed0000ULL + id))};
}

} // namespace vespa
