#include "vespa/clocking.hpp"

#include <algorithm>

namespace vespa
{

bool FrequencyRange::contains(FrequencyHz f) const noexcept
{
    return step_hz != 0 && f >= min_hz && f <= max_hz && (f - min_hz) % step_hz == 0;
}

std::vector<FrequencyHz> FrequencyRange::legal_values() const
{
    std::vector<FrequencyHz> out;
    if (step_hz == 0)
    {
        return out;
    }
    for (FrequencyHz f = min_hz; f <= max_hz; f += step_hz)
    {
        out.push_back(f);
    }
    return out;
}

// ---------------------------------------------------------------------------
// ClockWaveform

namespace
{
std::uint64_t min_index(const ClockSegment& s) noexcept
{
    return s.anchor_is_edge ? 0 : 1;
}

SimTime edge_of(const ClockSegment& s, std::uint64_t k)
{
    return s.anchor + cycle_edge_time(s.freq, k);
}

/// Largest k with edge_of(s, k) <= limit, or nullopt if even k_min is later.
std::optional<std::uint64_t> last_index_upto(const ClockSegment& s, SimTime limit)
{
    if (limit < s.anchor)
    {
        return std::nullopt;
    }
    const std::uint64_t after = first_edge_index_at_or_after(s.freq, SimTime{limit.fs - s.anchor.fs + 1});
    if (after == 0 || after - 1 < min_index(s))
    {
        return std::nullopt;
    }
    return after - 1;
}
} // namespace

ClockWaveform::ClockWaveform(FrequencyHz initial)
{
    if (initial == 0)
    {
        throw std::invalid_argument("clock frequency must be positive");
    }
    segments_.push_back(ClockSegment{SimTime::zero(), initial, true, SimTime::max()});
}

std::size_t ClockWaveform::segment_for(SimTime t) const
{
    auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                               [](SimTime v, const ClockSegment& s) { return v < s.anchor; });
    return it == segments_.begin() ? 0 : static_cast<std::size_t>(std::distance(segments_.begin(), it)) - 1;
}

SimTime ClockWaveform::nth_edge_after(SimTime t, std::uint64_t n) const
{
    const SimTime lo = n == 0 ? t : t + SimTime{1};
    std::uint64_t remaining = n == 0 ? 1 : n;
    // The previous segment may still own an edge exactly at this segment's anchor.
    const std::size_t start = segment_for(t);
    for (std::size_t j = start == 0 ? 0 : start - 1; j < segments_.size(); ++j)
    {
        const ClockSegment& s = segments_[j];
        std::uint64_t k_first = min_index(s);
        if (lo > s.anchor)
        {
            k_first = std::max(k_first, first_edge_index_at_or_after(s.freq, lo - s.anchor));
        }
        if (s.last_valid == SimTime::max())
        {
            return edge_of(s, k_first + remaining - 1);
        }
        const auto k_last = last_index_upto(s, s.last_valid);
        if (!k_last || *k_last < k_first)
        {
            continue;
        }
        const std::uint64_t available = *k_last - k_first + 1;
        if (remaining <= available)
        {
            return edge_of(s, k_first + remaining - 1);
        }
        remaining -= available;
    }
    throw SimulationFault("clock waveform has no open segment");
}

std::optional<SimTime> ClockWaveform::last_edge_at_or_before(SimTime t) const
{
    for (std::size_t j = segment_for(t) + 1; j-- > 0;)
    {
        const ClockSegment& s = segments_[j];
        const auto k = last_index_upto(s, std::min(t, s.last_valid));
        if (k)
        {
            return edge_of(s, *k);
        }
    }
    return std::nullopt;
}

std::uint64_t ClockWaveform::edges_in(SimTime a, SimTime b) const
{
    if (b <= a)
    {
        return 0;
    }
    std::uint64_t count = 0;
    for (const ClockSegment& s : segments_)
    {
        if (s.anchor > b)
        {
            break;
        }
        const SimTime hi = std::min(b, s.last_valid);
        const auto k_hi = last_index_upto(s, hi);
        if (!k_hi)
        {
            continue;
        }
        const auto k_lo = last_index_upto(s, std::min(a, s.last_valid));
        const std::uint64_t below = k_lo ? *k_lo + 1 - min_index(s) : 0;
        const std::uint64_t upto = *k_hi + 1 - min_index(s);
        count += upto - std::min(upto, below);
    }
    return count;
}

std::vector<SimTime> ClockWaveform::edges_between(SimTime from, SimTime to) const
{
    std::vector<SimTime> out;
    for (SimTime e = edge_at_or_after(from); e < to; e = nth_edge_after(e, 1))
    {
        out.push_back(e);
    }
    return out;
}

FrequencyHz ClockWaveform::frequency_at(SimTime t) const
{
    const ClockSegment& s = segments_[segment_for(t)];
    return t > s.last_valid ? 0 : s.freq;
}

void ClockWaveform::retarget(SimTime request, SimTime completion, FrequencyHz freq, ActuatorMode mode)
{
    if (freq == 0)
    {
        throw std::invalid_argument("clock frequency must be positive");
    }
    if (completion < request || (mode == ActuatorMode::NaiveSingle && request < segments_.back().anchor))
    {
        throw SimulationFault("clock retarget out of order");
    }
    ClockSegment& cur = segments_.back();
    if (mode == ActuatorMode::DualOscillator)
    {
        if (freq == cur.freq)
        {
            return;
        }
        const SimTime handover = nth_edge_after(completion, 0);
        cur.last_valid = handover;
        segments_.push_back(ClockSegment{handover, freq, false, SimTime::max()});
    }
    else
    {
        cur.last_valid = request;
        segments_.push_back(ClockSegment{completion, freq, false, SimTime::max()});
    }
}

// ---------------------------------------------------------------------------
// DfsActuator

DfsActuator::DfsActuator(FrequencyHz initial, SimTime reconfig_latency, ActuatorMode mode)
    : osc_{Oscillator{initial, true}, Oscillator{initial, true}}, mode_(mode), latency_(reconfig_latency),
      requested_(initial)
{
    if (reconfig_latency == SimTime::zero())
    {
        throw std::invalid_argument("DFS reconfiguration latency must be positive");
    }
}

SimTime DfsActuator::begin(FrequencyHz target, SimTime now)
{
    if (busy())
    {
        throw SimulationFault("DFS actuator already reconfiguring");
    }
    requested_ = target;
    if (mode_ == ActuatorMode::DualOscillator)
    {
        osc_[1 - master_] = Oscillator{target, false};
    }
    else
    {
        osc_[master_] = Oscillator{target, false};
    }
    state_ = ActuatorState::ReconfiguringSlave;
    return now + latency_;
}

void DfsActuator::complete()
{
    if (state_ != ActuatorState::ReconfiguringSlave)
    {
        throw SimulationFault("DFS actuator completion without a running reconfiguration");
    }
    state_ = ActuatorState::Swapping;
    if (mode_ == ActuatorMode::DualOscillator)
    {
        osc_[1 - master_].locked = true;
        master_ = 1 - master_;
    }
    else
    {
        osc_[master_].locked = true;
    }
    state_ = ActuatorState::Stable;
    ++completed_;
}

std::vector<SimTime> actuator_edges(const ClockWaveform& wave, SimTime from, SimTime to)
{
    return wave.edges_between(from, to);
}

// ---------------------------------------------------------------------------
// ClockDomain

ClockDomain::ClockDomain(Kernel& kernel, IslandId id, FrequencyHz initial)
    : kernel_(kernel), id_(id), wave_(initial)
{
}

void ClockDomain::after_cycles(SimTime from, std::uint64_t n, std::function<void()> action)
{
    std::uint32_t slot = 0;
    if (free_.empty())
    {
        slot = static_cast<std::uint32_t>(waits_.size());
        waits_.emplace_back();
    }
    else
    {
        slot = free_.back();
        free_.pop_back();
    }
    Wait& w = waits_[slot];
    w.from = from;
    w.n = n;
    w.target = wave_.nth_edge_after(from, n);
    w.active = true;
    w.action = std::move(action);
    ++active_waits_;
    arm(slot);
}

void ClockDomain::arm(std::uint32_t slot)
{
    Wait& w = waits_[slot];
    const std::uint64_t gen = w.generation;
    kernel_.schedule(w.target, id_, [this, slot, gen] { fire(slot, gen); });
}

void ClockDomain::fire(std::uint32_t slot, std::uint64_t generation)
{
    Wait& w = waits_[slot];
    if (!w.active || w.generation != generation)
    {
        return;
    }
    auto action = std::move(w.action);
    w.action = nullptr;
    w.active = false;
    ++w.generation;
    --active_waits_;
    free_.push_back(slot);
    action();
}

void ClockDomain::retarget(SimTime request, SimTime completion, FrequencyHz freq, ActuatorMode mode)
{
    wave_.retarget(request, completion, freq, mode);
    for (std::uint32_t slot = 0; slot < waits_.size(); ++slot)
    {
        Wait& w = waits_[slot];
        if (!w.active)
        {
            continue;
        }
        const SimTime target = wave_.nth_edge_after(w.from, w.n);
        if (target != w.target)
        {
            ++w.generation;
            w.target = target;
            arm(slot);
        }
    }
}

// ---------------------------------------------------------------------------
// ClockTree

std::string_view to_string(RejectReason r) noexcept
{
    switch (r)
    {
    case RejectReason::OutOfRange:
        return "out_of_range";
    case RejectReason::OffStepGrid:
        return "off_step_grid";
    case RejectReason::Busy:
        return "busy";
    case RejectReason::FixedIsland:
        return "fixed_island";
    case RejectReason::UnknownIsland:
        return "unknown_island";
    }
    return "unknown";
}

ClockTree::ClockTree(Kernel& kernel, const std::vector<IslandClockConfig>& islands, std::uint32_t resync_depth)
    : kernel_(kernel), resync_depth_(resync_depth)
{
    if (resync_depth < 2)
    {
        throw std::invalid_argument("resynchronizer depth must be at least 2");
    }
    for (const auto& cfg : islands)
    {
        Island isl;
        isl.cfg = cfg;
        isl.domain = std::make_unique<ClockDomain>(kernel, cfg.id, cfg.initial_hz);
        if (cfg.dfs)
        {
            isl.actuator.emplace(cfg.initial_hz, cfg.reconfig_latency, cfg.mode);
        }
        if (!islands_.emplace(cfg.id, std::move(isl)).second)
        {
            throw std::invalid_argument("duplicate island id " + std::to_string(cfg.id));
        }
    }
}

ClockDomain& ClockTree::domain(IslandId id)
{
    auto it = islands_.find(id);
    if (it == islands_.end())
    {
        throw std::out_of_range("unknown island " + std::to_string(id));
    }
    return *it->second.domain;
}

const ClockDomain& ClockTree::domain(IslandId id) const
{
    auto it = islands_.find(id);
    if (it == islands_.end())
    {
        throw std::out_of_range("unknown island " + std::to_string(id));
    }
    return *it->second.domain;
}

bool ClockTree::is_dfs(IslandId id) const
{
    auto it = islands_.find(id);
    return it != islands_.end() && it->second.cfg.dfs;
}

std::vector<IslandId> ClockTree::island_ids() const
{
    std::vector<IslandId> out;
    for (const auto& [id, isl] : islands_)
    {
        out.push_back(id);
    }
    return out;
}

std::vector<IslandId> ClockTree::dfs_island_ids() const
{
    std::vector<IslandId> out;
    for (const auto& [id, isl] : islands_)
    {
        if (isl.cfg.dfs)
        {
            out.push_back(id);
        }
    }
    return out;
}

WriteOutcome ClockTree::write_frequency(IslandId island, FrequencyHz freq, SimTime t)
{
    WriteOutcome out;
    auto it = islands_.find(island);
    if (it == islands_.end())
    {
        out.reason = RejectReason::UnknownIsland;
        return out;
    }
    Island& isl = it->second;
    if (!isl.cfg.dfs)
    {
        out.reason = RejectReason::FixedIsland;
        return out;
    }
    const FrequencyRange& r = isl.cfg.range;
    if (freq < r.min_hz || freq > r.max_hz)
    {
        out.reason = RejectReason::OutOfRange;
        return out;
    }
    if (!r.contains(freq))
    {
        out.reason = RejectReason::OffStepGrid;
        return out;
    }
    if (isl.actuator->busy())
    {
        if (isl.cfg.busy_policy == BusyPolicy::Reject)
        {
            out.reason = RejectReason::Busy;
            return out;
        }
        isl.queued = freq;
        out.accepted = true;
        out.queued = true;
        return out;
    }
    start_reconfiguration(isl, freq, t);
    out.accepted = true;
    out.effective_at = t + isl.cfg.reconfig_latency;
    return out;
}

void ClockTree::start_reconfiguration(Island& isl, FrequencyHz freq, SimTime t)
{
    const SimTime completion = isl.actuator->begin(freq, t);
    isl.domain->retarget(t, completion, freq, isl.cfg.mode);
    if (isl.cfg.mode == ActuatorMode::NaiveSingle && observer_)
    {
        observer_(isl.cfg.id, t, 0);
    }
    const IslandId id = isl.cfg.id;
    kernel_.schedule(completion, id, [this, id] { finish_reconfiguration(id); });
}

void ClockTree::finish_reconfiguration(IslandId id)
{
    Island& isl = islands_.at(id);
    isl.actuator->complete();
    const SimTime now = kernel_.now();
    if (observer_)
    {
        observer_(id, now, isl.actuator->master().freq);
    }
    if (isl.queued)
    {
        const FrequencyHz next = *isl.queued;
        isl.queued.reset();
        start_reconfiguration(isl, next, now);
    }
}

FrequencyRegister ClockTree::frequency_register(IslandId island) const
{
    auto it = islands_.find(island);
    if (it == islands_.end() || !it->second.actuator)
    {
        return {};
    }
    return FrequencyRegister{it->second.actuator->requested(), it->second.actuator->busy()};
}

const DfsActuator* ClockTree::actuator(IslandId island) const
{
    auto it = islands_.find(island);
    return it == islands_.end() || !it->second.actuator ? nullptr : &*it->second.actuator;
}

const FrequencyRange* ClockTree::legal_range(IslandId island) const
{
    auto it = islands_.find(island);
    return it == islands_.end() || !it->second.cfg.dfs ? nullptr : &it->second.cfg.range;
}

SimTime ClockTree::crossing_delay(IslandId src, IslandId dst, SimTime arrival) const
{
    if (src == dst)
    {
        return arrival;
    }
    return domain(dst).edge_after(arrival, resync_depth_);
}

void ClockTree::cross(IslandId src, IslandId dst, SimTime arrival, std::function<void()> action)
{
    if (src == dst)
    {
        kernel_.schedule(arrival, dst, std::move(action));
        return;
    }
    domain(dst).after_cycles(arrival, resync_depth_, std::move(action));
}

} // namespace vespa
