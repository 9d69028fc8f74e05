#include "vespa/area.hpp"
#include "vespa/calibration.hpp"
#include "vespa/config.hpp"
#include "vespa/engine.hpp"
#include "vespa/experiment.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace vespa;

namespace
{

enum Exit : int
{
    kOk = 0,
    kConfigError = 1,
    kSimulationFault = 2,
    kPartialSweep = 3,
};

std::string read_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
    {
        throw ConfigError("cannot open " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::ofstream open_out(const fs::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
    {
        throw std::runtime_error("cannot write " + path.string());
    }
    return out;
}

SoCDescription load_or_testbed(const std::string& path)
{
    return path.empty() ? reference_testbed() : load_description_file(path);
}

struct Common
{
    std::string config;
    std::uint64_t seed = 1;
    std::string duration;
    std::uint64_t budget = kDefaultBudgetBytes;
    unsigned jobs = 1;
    std::string out = ".";
    std::string schedule;
    std::string window = "1ms";
    std::string space;
    bool seed_set = false;
    bool budget_set = false;
};

int cmd_run(const Common& c)
{
    const SoCDescription desc = load_description_file(c.config);
    RunOptions o;
    o.seed = c.seed;
    o.budget_bytes = c.budget;
    o.window = parse_duration(c.window);
    if (!c.duration.empty())
    {
        o.duration = parse_duration(c.duration);
    }
    const RunResult r = run_simulation(desc, o);
    fs::create_directories(c.out);
    {
        auto f = open_out(fs::path(c.out) / "metrics.csv");
        write_metrics_csv(f, r);
    }
    {
        auto f = open_out(fs::path(c.out) / "trace.csv");
        write_trace_csv(f, r.trace);
    }
    for (const auto& t : r.tiles)
    {
        if (t.kind == TileKind::Accel && t.invocations > 0)
        {
            std::printf("%s %s x%u: %.4f MB/s, mean RTT %.1f ns\n", t.name.c_str(), t.accel.c_str(), t.replication,
                        t.throughput_mbps, t.mean_rtt_ns);
        }
    }
    std::printf("simulated %s, MEM busy %.3f\n", to_string(r.end).c_str(), r.mem_busy_fraction);
    if (!r.completed && !o.duration)
    {
        std::fprintf(stderr, "error: accelerators did not consume their budget within %s\n",
                     to_string(o.limit).c_str());
        return kSimulationFault;
    }
    return kOk;
}

int cmd_sweep(const Common& c)
{
    const SoCDescription base = load_or_testbed(c.config);
    SweepSpace space = parse_sweep_space(read_file(c.space), base);
    if (c.seed_set)
    {
        space.seed = c.seed;
    }
    if (c.budget_set)
    {
        space.budget_bytes = c.budget;
    }
    const std::size_t n = sweep_size(space);
    std::printf("sweep: %zu points, %u job(s)\n", n, c.jobs);
    std::fflush(stdout);

    const auto rows = run_sweep(base, space, c.jobs);
    fs::create_directories(fs::path(c.out) / "points");
    {
        auto f = open_out(fs::path(c.out) / "sweep.csv");
        write_sweep_csv(f, rows);
    }
    std::size_t failed = 0;
    for (const auto& row : rows)
    {
        char name[32];
        std::snprintf(name, sizeof name, "point_%04zu.json", row.point.index);
        try
        {
            auto f = open_out(fs::path(c.out) / "points" / name);
            f << serialize(materialize(base, row.point));
        }
        catch (const ConfigError&)
        {
            // the row already carries the error
        }
        if (!row.ok())
        {
            ++failed;
            std::fprintf(stderr, "point %zu: %s\n", row.point.index, row.status.c_str());
        }
    }
    std::printf("sweep: %zu ok, %zu failed\n", rows.size() - failed, failed);
    return failed == 0 ? kOk : kPartialSweep;
}

int cmd_profile(const Common& c)
{
    const SoCDescription desc = load_description_file(c.config);
    const Schedule schedule = parse_schedule(read_file(c.schedule), desc);
    const ProfileResult r = run_profile(desc, schedule, parse_duration(c.window), c.seed);
    fs::create_directories(c.out);
    const fs::path out(c.out);
    {
        auto f = open_out(out / "freq_profile.csv");
        write_frequency_csv(f, r);
    }
    {
        auto f = open_out(out / "mem_traffic.csv");
        write_mem_traffic_csv(f, r);
    }
    {
        auto f = open_out(out / "samples.csv");
        write_trace_csv(f, r.samples);
    }
    {
        auto f = open_out(out / "commands.log");
        write_command_log(f, r);
    }
    {
        auto f = open_out(out / "plot.json");
        write_plot_json(f, r);
    }
    for (const auto& e : r.log)
    {
        if (e.result.rfind("rejected", 0) == 0)
        {
            std::fprintf(stderr, "%s: %s: %s\n", to_string(e.time).c_str(), e.command.c_str(), e.result.c_str());
        }
    }
    std::printf("profiled %s: %zu traffic samples, %zu commands\n", to_string(r.end).c_str(), r.mem_traffic.size(),
                r.log.size());
    return kOk;
}

int cmd_testbed(const std::string& variant, const std::string& out)
{
    IslandVariant v = IslandVariant::SixClocks;
    if (variant == "five")
    {
        v = IslandVariant::FiveClocks;
    }
    else if (variant != "six")
    {
        throw ConfigError("variant must be 'six' or 'five'");
    }
    const std::string text = serialize(reference_testbed(v));
    if (out.empty() || out == "-")
    {
        std::cout << text;
    }
    else
    {
        auto f = open_out(out);
        f << text;
    }
    return kOk;
}

int cmd_area(const std::string& table_path, const std::string& accel, std::uint32_t k)
{
    const CalibrationTable table = table_path.empty() ? builtin_area_table() : load_calibration_table(table_path);
    std::printf("accel,k,lut,ff,bram,dsp,lut_pct,ff_pct,bram_pct,dsp_pct,fits\n");
    auto row = [&](const std::string& name, std::uint32_t kk) {
        const AreaEstimate e = estimate(table, name, kk);
        std::printf("%s,%u,%llu,%llu,%llu,%llu,%.3f,%.3f,%.3f,%.3f,%d\n", name.c_str(), kk,
                    static_cast<unsigned long long>(e.resources.lut), static_cast<unsigned long long>(e.resources.ff),
                    static_cast<unsigned long long>(e.resources.bram),
                    static_cast<unsigned long long>(e.resources.dsp), 100 * e.utilization[0], 100 * e.utilization[1],
                    100 * e.utilization[2], 100 * e.utilization[3], e.fits_device ? 1 : 0);
    };
    for (const auto& a : table.accelerators)
    {
        if (!accel.empty() && a.name != accel)
        {
            continue;
        }
        if (k != 0)
        {
            row(a.name, k);
        }
        else
        {
            for (std::uint32_t kk = 1; kk <= 8; ++kk)
            {
                row(a.name, kk);
            }
        }
    }
    if (!accel.empty() && table.find(accel) == nullptr)
    {
        throw ConfigError("no area data for accelerator '" + accel + "'");
    }
    return kOk;
}

int cmd_calibrate(const std::string& accel)
{
    const CalibrationTargets& targets = chstone_targets();
    std::printf("accel,compute_cycles_per_item,target_mbps,simulated_mbps,error_pct\n");
    for (const auto& t : targets.entries)
    {
        if (!accel.empty() && t.name != accel)
        {
            continue;
        }
        const AcceleratorProfile p = calibrate_profile(t.name, targets);
        const double got = measure_baseline(p, 1, targets).throughput_mbps;
        std::printf("%s,%llu,%.2f,%.4f,%+.3f\n", t.name.c_str(),
                    static_cast<unsigned long long>(p.compute_cycles_per_item), t.baseline_mbps, got,
                    100.0 * (got / t.baseline_mbps - 1.0));
    }
    if (!accel.empty() && targets.find(accel) == nullptr)
    {
        throw ConfigError("no throughput target for accelerator '" + accel + "'");
    }
    return kOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Discrete-event simulator of tile-based SoCs with multi-replica accelerators and DFS islands"};
    app.require_subcommand(1);
    Common c;

    auto add_seed = [&](CLI::App* sub) {
        sub->add_option_function<std::uint64_t>(
            "--seed", [&](std::uint64_t v) { c.seed = v; c.seed_set = true; }, "Random seed");
    };
    auto add_budget = [&](CLI::App* sub) {
        sub->add_option_function<std::uint64_t>(
            "--budget-bytes", [&](std::uint64_t v) { c.budget = v; c.budget_set = true; },
            "Input bytes each accelerator processes (default 1000000)");
    };

    auto* run = app.add_subcommand("run", "Simulate one configuration");
    run->add_option("--config", c.config, "SoC description (JSON)")->required();
    add_seed(run);
    run->add_option("--duration", c.duration, "Stop time, e.g. 20ms; 0 skips simulation");
    add_budget(run);
    run->add_option("--window", c.window, "Trace sampling window")->capture_default_str();
    run->add_option("--out", c.out, "Output directory")->capture_default_str();

    auto* sweep = app.add_subcommand("sweep", "Run a design-space sweep");
    sweep->add_option("--space", c.space, "Sweep space (JSON)")->required();
    sweep->add_option("--config", c.config, "Base SoC description (default: reference testbed)");
    add_seed(sweep);
    add_budget(sweep);
    sweep->add_option("--jobs", c.jobs, "Concurrent simulations")->capture_default_str()->check(CLI::PositiveNumber);
    sweep->add_option("--out", c.out, "Output directory")->capture_default_str();

    auto* profile = app.add_subcommand("profile", "Apply a frequency schedule and record memory traffic");
    profile->add_option("--config", c.config, "SoC description (JSON)")->required();
    profile->add_option("--schedule", c.schedule, "Schedule (JSON)")->required();
    profile->add_option("--window", c.window, "Traffic sampling window")->capture_default_str();
    add_seed(profile);
    profile->add_option("--out", c.out, "Output directory")->capture_default_str();

    std::string variant = "six";
    std::string testbed_out;
    auto* testbed = app.add_subcommand("testbed", "Print the reference testbed description");
    testbed->add_option("--variant", variant, "Clock grouping: six or five islands")->capture_default_str();
    testbed->add_option("--out", testbed_out, "Output file (default: stdout)");

    std::string area_table;
    std::string area_accel;
    std::uint32_t area_k = 0;
    auto* area = app.add_subcommand("area", "FPGA resource estimates");
    area->add_option("--table", area_table, "Area table (JSON, default: built-in)");
    area->add_option("--accel", area_accel, "Accelerator (default: all)");
    area->add_option("--k", area_k, "Replication factor (default: 1..8)");

    std::string cal_accel;
    auto* calibrate = app.add_subcommand("calibrate", "Fit accelerator compute cycles to the throughput targets");
    calibrate->add_option("--accel", cal_accel, "Accelerator (default: all)");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        return app.exit(e) == 0 ? kOk : kConfigError;
    }

    try
    {
        if (*run)
        {
            return cmd_run(c);
        }
        if (*sweep)
        {
            return cmd_sweep(c);
        }
        if (*profile)
        {
            return cmd_profile(c);
        }
        if (*testbed)
        {
            return cmd_testbed(variant, testbed_out);
        }
        if (*area)
        {
            return cmd_area(area_table, area_accel, area_k);
        }
        if (*calibrate)
        {
            return cmd_calibrate(cal_accel);
        }
    }
    catch (const SimulationFault& e)
    {
        std::fprintf(stderr, "simulation fault: %s\n", e.what());
        return kSimulationFault;
    }
    catch (const std::exception& e)
    {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kConfigError;
    }
    return kOk;
}
