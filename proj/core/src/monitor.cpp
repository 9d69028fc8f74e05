#include "vespa/monitor.hpp"

#include <algorithm>

namespace vespa
{

double TileCounters::rtt_mean_fs() const noexcept
{
    return rtt_count_ == 0 ? 0.0 : static_cast<double>(rtt_sum_) / static_cast<double>(rtt_count_);
}

std::uint32_t TileCounters::enable_mask() const noexcept
{
    std::uint32_t m = 0;
    for (std::size_t i = 0; i < enables_.size(); ++i)
    {
        m |= enables_[i] ? (1U << i) : 0U;
    }
    return m;
}

void TileCounters::set_enable_mask(std::uint32_t mask) noexcept
{
    for (std::size_t i = 0; i < enables_.size(); ++i)
    {
        enables_[i] = (mask >> i) & 1U;
    }
}

void TileCounters::count_in() noexcept
{
    if (enabled(Statistic::PktsIn))
    {
        ++pkts_in_;
    }
}

void TileCounters::count_out() noexcept
{
    if (enabled(Statistic::PktsOut))
    {
        ++pkts_out_;
    }
}

void TileCounters::record_rtt(SimTime request_issue, SimTime data_arrival)
{
    if (data_arrival < request_issue)
    {
        throw std::logic_error("RTT sample with arrival before issue");
    }
    if (!enabled(Statistic::Rtt))
    {
        return;
    }
    rtt_last_ = (data_arrival - request_issue).fs;
    rtt_sum_ += rtt_last_;
    ++rtt_count_;
}

void TileCounters::exec_start() noexcept
{
    if (enabled(Statistic::ExecTime))
    {
        exec_time_ = 0;
        exec_running_ = true;
    }
}

void TileCounters::exec_stop(std::uint64_t cycles) noexcept
{
    if (enabled(Statistic::ExecTime) && exec_running_)
    {
        exec_time_ = cycles;
    }
    exec_running_ = false;
}

void TileCounters::reset_manual() noexcept
{
    pkts_in_ = 0;
    pkts_out_ = 0;
    rtt_sum_ = 0;
    rtt_count_ = 0;
    rtt_last_ = 0;
}

// ---------------------------------------------------------------------------

RegisterMap::RegisterMap(std::vector<TileCounters*> tiles, ClockTree& clocks, std::function<SimTime()> now)
    : tiles_(std::move(tiles)), clocks_(clocks), now_(std::move(now)), latched_hi_(tiles_.size(), 0)
{
}

namespace
{
std::uint32_t low32(std::uint64_t v) noexcept
{
    return static_cast<std::uint32_t>(v & 0xFFFFFFFFULL);
}

struct Decoded
{
    enum class Kind
    {
        None,
        Freq,
        Status,
        Tile
    } kind = Kind::None;
    std::uint32_t index = 0;
    std::uint32_t offset = 0;
};

Decoded decode(std::uint32_t addr, std::size_t tiles, const ClockTree& clocks)
{
    Decoded d;
    if (addr % 4 != 0)
    {
        return d;
    }
    if (addr >= regs::kFreqBase && addr < regs::kStatusBase)
    {
        const IslandId isl = (addr - regs::kFreqBase) / 4;
        if (clocks.has_island(isl) && clocks.is_dfs(isl))
        {
            d.kind = Decoded::Kind::Freq;
            d.index = isl;
        }
        return d;
    }
    if (addr >= regs::kStatusBase && addr < regs::kStatusBase + 0x100)
    {
        const IslandId isl = (addr - regs::kStatusBase) / 4;
        if (clocks.has_island(isl) && clocks.is_dfs(isl))
        {
            d.kind = Decoded::Kind::Status;
            d.index = isl;
        }
        return d;
    }
    if (addr >= regs::kTileBase)
    {
        const std::uint32_t rel = addr - regs::kTileBase;
        const std::uint32_t tile = rel / regs::kTileStride;
        if (tile < tiles)
        {
            d.kind = Decoded::Kind::Tile;
            d.index = tile;
            d.offset = rel % regs::kTileStride;
        }
    }
    return d;
}
} // namespace

bool RegisterMap::mapped(std::uint32_t addr) const noexcept
{
    return decode(addr, tiles_.size(), clocks_).kind != Decoded::Kind::None;
}

std::vector<std::uint32_t> RegisterMap::addresses() const
{
    std::vector<std::uint32_t> out;
    for (IslandId isl : clocks_.dfs_island_ids())
    {
        out.push_back(regs::freq_register(isl));
    }
    for (IslandId isl : clocks_.dfs_island_ids())
    {
        out.push_back(regs::status_register(isl));
    }
    for (std::size_t t = 0; t < tiles_.size(); ++t)
    {
        for (std::uint32_t off = 0; off < regs::kTileStride; off += 4)
        {
            out.push_back(regs::tile_register(t, off));
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::uint32_t RegisterMap::read(std::uint32_t addr)
{
    const Decoded d = decode(addr, tiles_.size(), clocks_);
    switch (d.kind)
    {
    case Decoded::Kind::None:
        break;
    case Decoded::Kind::Freq:
        return static_cast<std::uint32_t>(clocks_.domain(d.index).frequency_at(now_()) / 1'000'000ULL);
    case Decoded::Kind::Status: {
        const FrequencyRegister fr = clocks_.frequency_register(d.index);
        return static_cast<std::uint32_t>(fr.requested_hz / 1'000'000ULL) | (fr.busy ? regs::kStatusBusy : 0U);
    }
    case Decoded::Kind::Tile: {
        const TileCounters& c = *tiles_[d.index];
        switch (d.offset)
        {
        case regs::kExecTime:
            return low32(c.exec_time());
        case regs::kPktsIn:
            return low32(c.pkts_in());
        case regs::kPktsOut:
            return low32(c.pkts_out());
        case regs::kRttSumLo:
            latched_hi_[d.index] = static_cast<std::uint32_t>(c.rtt_sum_fs() >> 32);
            return low32(c.rtt_sum_fs());
        case regs::kRttSumHi:
            return latched_hi_[d.index];
        case regs::kRttCount:
            return low32(c.rtt_count());
        case regs::kControl:
            return c.enable_mask();
        case regs::kRttLastNs:
            return low32(c.rtt_last_fs() / 1'000'000ULL);
        default:
            break;
        }
        break;
    }
    }
    throw UnmappedAddress("unmapped register address " + std::to_string(addr));
}

RegisterWrite RegisterMap::write(std::uint32_t addr, std::uint32_t value)
{
    const Decoded d = decode(addr, tiles_.size(), clocks_);
    switch (d.kind)
    {
    case Decoded::Kind::None:
        throw UnmappedAddress("unmapped register address " + std::to_string(addr));
    case Decoded::Kind::Freq: {
        RegisterWrite w;
        w.frequency = clocks_.write_frequency(d.index, static_cast<FrequencyHz>(value) * 1'000'000ULL, now_());
        w.ok = w.frequency->accepted;
        return w;
    }
    case Decoded::Kind::Status:
        return RegisterWrite{false, std::nullopt};
    case Decoded::Kind::Tile:
        if (d.offset == regs::kControl)
        {
            TileCounters& c = *tiles_[d.index];
            c.set_enable_mask(value & regs::kControlEnableMask);
            if (value & regs::kControlReset)
            {
                c.reset_manual();
                latched_hi_[d.index] = 0;
            }
            return RegisterWrite{true, std::nullopt};
        }
        return RegisterWrite{false, std::nullopt};
    }
    return RegisterWrite{false, std::nullopt};
}

// ---------------------------------------------------------------------------

RatePoint sample_traffic(std::uint64_t packets_in_window, SimTime window_end, SimTime window)
{
    if (window == SimTime::zero())
    {
        throw std::invalid_argument("sampling window must be positive");
    }
    return RatePoint{window_end, static_cast<double>(packets_in_window) / window.seconds() / 1e6};
}

TrafficSampler::TrafficSampler(Kernel& kernel, SimTime window, std::function<std::uint64_t()> counter)
    : kernel_(kernel), window_(window), counter_(std::move(counter))
{
    if (window == SimTime::zero())
    {
        throw std::invalid_argument("sampling window must be positive");
    }
}

void TrafficSampler::start(SimTime from, SimTime until)
{
    last_ = counter_();
    until_ = until;
    next_ = from + window_;
    if (next_ <= until_)
    {
        kernel_.schedule(next_, 0, [this] { tick(); });
    }
}

void TrafficSampler::tick()
{
    const std::uint64_t now_count = counter_();
    points_.push_back(sample_traffic(now_count - last_, next_, window_));
    last_ = now_count;
    next_ = next_ + window_;
    if (next_ <= until_)
    {
        kernel_.schedule(next_, 0, [this] { tick(); });
    }
}

} // namespace vespa
