#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace vespa
{

struct ResourceVector
{
    std::uint64_t lut = 0;
    std::uint64_t ff = 0;
    std::uint64_t bram = 0; ///< 18Kb blocks
    std::uint64_t dsp = 0;

    bool operator==(const ResourceVector&) const = default;
};

enum class Resource : std::uint8_t
{
    Lut,
    Ff,
    Bram,
    Dsp,
};

inline constexpr std::array<Resource, 4> kResources{Resource::Lut, Resource::Ff, Resource::Bram, Resource::Dsp};

std::string_view to_string(Resource r) noexcept;
std::uint64_t get(const ResourceVector& v, Resource r) noexcept;

/// Synthesized resource counts of one accelerator tile at the measured
/// replication factors (K = 1, 2 and 4).
struct AcceleratorArea
{
    std::string name;
    std::map<std::uint32_t, ResourceVector> rows;
};

struct CalibrationTable
{
    std::vector<AcceleratorArea> accelerators;
    ResourceVector device;

    const AcceleratorArea* find(std::string_view name) const noexcept;
};

/// Built-in table for the five CHStone tiles on a Virtex-7 2000 device.
const CalibrationTable& builtin_area_table();

/// Reads the JSON table format (see docs/area.md). Throws std::runtime_error
/// on malformed input or rows that break dsp(K) = K * dsp(1).
CalibrationTable parse_calibration_table(const std::string& text);
CalibrationTable load_calibration_table(const std::filesystem::path& path);
std::string serialize(const CalibrationTable& table);

struct LineFit
{
    double intercept = 0.0;
    double slope = 0.0;
    /// Stored minus fitted value at each stored K, in ascending K order.
    std::vector<double> residuals;
};

struct MarginalFit
{
    std::array<LineFit, 4> lines;

    const LineFit& operator[](Resource r) const noexcept { return lines[static_cast<std::size_t>(r)]; }
};

/// Least-squares line per resource over the stored rows. For DSP the line
/// is forced through the origin with slope dsp(1).
MarginalFit fit_marginal(const CalibrationTable& table, std::string_view accel);

struct AreaEstimate
{
    ResourceVector resources;
    /// Fraction of the device used, per resource.
    std::array<double, 4> utilization{};
    bool fits_device = true;
};

/// Stored row when K is in the table, otherwise the rounded fitted line
/// (clamped at zero); DSP is always K * dsp(1). Throws std::invalid_argument
/// for an unknown accelerator or K == 0.
AreaEstimate estimate(const CalibrationTable& table, std::string_view accel, std::uint32_t k);
AreaEstimate estimate(std::string_view accel, std::uint32_t k);

} // namespace vespa
