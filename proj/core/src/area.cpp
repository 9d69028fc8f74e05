#include "vespa/area.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace vespa
{

std::string_view to_string(Resource r) noexcept
{
    switch (r)
    {
    case Resource::Lut:
        return "lut";
    case Resource::Ff:
        return "ff";
    case Resource::Bram:
        return "bram";
    case Resource::Dsp:
        return "dsp";
    }
    return "?";
}

std::uint64_t get(const ResourceVector& v, Resource r) noexcept
{
    switch (r)
    {
    case Resource::Lut:
        return v.lut;
    case Resource::Ff:
        return v.ff;
    case Resource::Bram:
        return v.bram;
    case Resource::Dsp:
        return v.dsp;
    }
    return 0;
}

namespace
{
void set(ResourceVector& v, Resource r, std::uint64_t value) noexcept
{
    switch (r)
    {
    case Resource::Lut:
        v.lut = value;
        break;
    case Resource::Ff:
        v.ff = value;
        break;
    case Resource::Bram:
        v.bram = value;
        break;
    case Resource::Dsp:
        v.dsp = value;
        break;
    }
}

void check_dsp_linear(const AcceleratorArea& a)
{
    auto one = a.rows.find(1);
    if (one == a.rows.end())
    {
        throw std::runtime_error("area table: '" + a.name + "' has no K=1 row");
    }
    for (const auto& [k, row] : a.rows)
    {
        if (row.dsp != k * one->second.dsp)
        {
            throw std::runtime_error("area table: '" + a.name + "' breaks dsp(K) = K * dsp(1) at K=" +
                                     std::to_string(k));
        }
    }
}

const AcceleratorArea& require(const CalibrationTable& table, std::string_view accel)
{
    const AcceleratorArea* a = table.find(accel);
    if (a == nullptr)
    {
        throw std::invalid_argument("no area data for accelerator '" + std::string(accel) + "'");
    }
    return *a;
}

ResourceVector parse_vector(const nlohmann::json& j, const std::string& where)
{
    if (!j.is_object())
    {
        throw std::runtime_error("area table: " + where + " must be an object");
    }
    ResourceVector v;
    for (Resource r : kResources)
    {
        const std::string key(to_string(r));
        if (!j.contains(key) || !j.at(key).is_number_unsigned())
        {
            throw std::runtime_error("area table: " + where + "." + key + " must be a non-negative integer");
        }
        set(v, r, j.at(key).get<std::uint64_t>());
    }
    return v;
}

nlohmann::json vector_json(const ResourceVector& v)
{
    nlohmann::json j = nlohmann::json::object();
    for (Resource r : kResources)
    {
        j[std::string(to_string(r))] = get(v, r);
    }
    return j;
}
} // namespace

const AcceleratorArea* CalibrationTable::find(std::string_view name) const noexcept
{
    for (const auto& a : accelerators)
    {
        if (a.name == name)
        {
            return &a;
        }
    }
    return nullptr;
}

const CalibrationTable& builtin_area_table()
{
    static const CalibrationTable table = [] {
        CalibrationTable t;
        t.device = ResourceVector{1'221'600, 2'443'200, 2'584, 2'160};
        t.accelerators = {
            {"adpcm", {{1, {10899, 11720, 25, 81}}, {2, {16455, 15158, 48, 162}}, {4, {27313, 21780, 94, 324}}}},
            {"dfadd", {{1, {11268, 11199, 2, 9}}, {2, {16988, 14090, 2, 18}}, {4, {28599, 19614, 2, 36}}}},
            {"dfmul", {{1, {8435, 10222, 2, 25}}, {2, {11352, 12136, 2, 50}}, {4, {17382, 15706, 2, 100}}}},
            {"dfsin", {{1, {16627, 14997, 2, 52}}, {2, {27770, 21686, 2, 104}}, {4, {50043, 34804, 2, 208}}}},
            {"gsm", {{1, {9900, 11418, 18, 62}}, {2, {14304, 14520, 34, 124}}, {4, {22927, 20473, 66, 248}}}},
        };
        return t;
    }();
    return table;
}

CalibrationTable parse_calibration_table(const std::string& text)
{
    nlohmann::json doc;
    try
    {
        doc = nlohmann::json::parse(text);
    }
    catch (const nlohmann::json::parse_error& e)
    {
        throw std::runtime_error(std::string("area table: ") + e.what());
    }
    if (!doc.is_object() || doc.value("schema_version", 0) != 1)
    {
        throw std::runtime_error("area table: expected an object with schema_version 1");
    }
    CalibrationTable t;
    t.device = parse_vector(doc.at("device"), "device");
    const auto& accs = doc.at("accelerators");
    if (!accs.is_object())
    {
        throw std::runtime_error("area table: accelerators must be an object");
    }
    for (const auto& [name, rows] : accs.items())
    {
        AcceleratorArea a;
        a.name = name;
        for (const auto& [kstr, row] : rows.items())
        {
            std::uint32_t k = 0;
            std::istringstream is(kstr);
            if (!(is >> k) || !is.eof() || k == 0)
            {
                throw std::runtime_error("area table: replication key '" + kstr + "' of '" + name + "' is not a positive integer");
            }
            a.rows[k] = parse_vector(row, name + "." + kstr);
        }
        check_dsp_linear(a);
        t.accelerators.push_back(std::move(a));
    }
    return t;
}

CalibrationTable load_calibration_table(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
    {
        throw std::runtime_error("cannot open area table " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_calibration_table(ss.str());
}

std::string serialize(const CalibrationTable& table)
{
    nlohmann::json doc;
    doc["schema_version"] = 1;
    doc["device"] = vector_json(table.device);
    doc["accelerators"] = nlohmann::json::object();
    for (const auto& a : table.accelerators)
    {
        nlohmann::json rows = nlohmann::json::object();
        for (const auto& [k, row] : a.rows)
        {
            rows[std::to_string(k)] = vector_json(row);
        }
        doc["accelerators"][a.name] = rows;
    }
    return doc.dump(2) + "\n";
}

MarginalFit fit_marginal(const CalibrationTable& table, std::string_view accel)
{
    const AcceleratorArea& a = require(table, accel);
    const double n = static_cast<double>(a.rows.size());
    MarginalFit fit;
    for (Resource r : kResources)
    {
        LineFit& line = fit.lines[static_cast<std::size_t>(r)];
        if (r == Resource::Dsp)
        {
            line.slope = static_cast<double>(a.rows.at(1).dsp);
        }
        else if (a.rows.size() == 1)
        {
            line.intercept = static_cast<double>(get(a.rows.begin()->second, r));
        }
        else
        {
            double mk = 0.0;
            double my = 0.0;
            for (const auto& [k, row] : a.rows)
            {
                mk += k;
                my += static_cast<double>(get(row, r));
            }
            mk /= n;
            my /= n;
            double sxx = 0.0;
            double sxy = 0.0;
            for (const auto& [k, row] : a.rows)
            {
                sxx += (k - mk) * (k - mk);
                sxy += (k - mk) * (static_cast<double>(get(row, r)) - my);
            }
            line.slope = sxy / sxx;
            line.intercept = my - line.slope * mk;
        }
        for (const auto& [k, row] : a.rows)
        {
            line.residuals.push_back(static_cast<double>(get(row, r)) - (line.intercept + line.slope * k));
        }
    }
    return fit;
}

AreaEstimate estimate(const CalibrationTable& table, std::string_view accel, std::uint32_t k)
{
    if (k == 0)
    {
        throw std::invalid_argument("replication factor must be at least 1");
    }
    const AcceleratorArea& a = require(table, accel);
    AreaEstimate out;
    if (auto it = a.rows.find(k); it != a.rows.end())
    {
        out.resources = it->second;
    }
    else
    {
        const MarginalFit fit = fit_marginal(table, accel);
        for (Resource r : kResources)
        {
            const double v = std::round(fit[r].intercept + fit[r].slope * k);
            set(out.resources, r, v <= 0.0 ? 0 : static_cast<std::uint64_t>(v));
        }
    }
    out.resources.dsp = static_cast<std::uint64_t>(k) * a.rows.at(1).dsp;
    for (Resource r : kResources)
    {
        const std::uint64_t cap = get(table.device, r);
        const std::uint64_t used = get(out.resources, r);
        out.utilization[static_cast<std::size_t>(r)] =
            cap == 0 ? 0.0 : static_cast<double>(used) / static_cast<double>(cap);
        if (used > cap)
        {
            out.fits_device = false;
        }
    }
    return out;
}

AreaEstimate estimate(std::string_view accel, std::uint32_t k)
{
    return estimate(builtin_area_table(), accel, k);
}

} // namespace vespa
