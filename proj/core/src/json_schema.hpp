#pragma once

// JSON reading helpers shared by the document parsers. Errors carry a
// JSONPath-like location.

#include "vespa/config.hpp"

#include <json.hpp>

#include <algorithm>
#include <initializer_list>
#include <string>
#include <string_view>
#include <type_traits>

namespace vespa::schema
{

using nlohmann::json;

[[noreturn]] inline void schema_error(const std::string& where, const std::string& what)
{
    throw ConfigError("schema violation at " + where + ": " + what);
}

inline void reject_unknown(const json& obj, const std::string& where, std::initializer_list<std::string_view> allowed)
{
    if (!obj.is_object())
    {
        schema_error(where, "expected an object");
    }
    for (const auto& [key, value] : obj.items())
    {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
        {
            schema_error(where + "." + key, "unknown key");
        }
    }
}

inline const json& required(const json& obj, const std::string& where, const char* key)
{
    auto it = obj.find(key);
    if (it == obj.end())
    {
        schema_error(where + "." + key, "missing required field");
    }
    return *it;
}

template <class T>
T get_number(const json& v, const std::string& where)
{
    if (!v.is_number_integer() && !v.is_number_unsigned())
    {
        schema_error(where, "expected an integer");
    }
    if constexpr (std::is_unsigned_v<T>)
    {
        if (v.is_number_integer() && v.get<std::int64_t>() < 0)
        {
            schema_error(where, "expected a non-negative integer");
        }
    }
    return v.get<T>();
}

template <class T>
T opt_number(const json& obj, const std::string& where, const char* key, T fallback)
{
    auto it = obj.find(key);
    return it == obj.end() ? fallback : get_number<T>(*it, where + "." + key);
}

inline std::string get_string(const json& v, const std::string& where)
{
    if (!v.is_string())
    {
        schema_error(where, "expected a string");
    }
    return v.get<std::string>();
}

inline bool get_bool(const json& v, const std::string& where)
{
    if (!v.is_boolean())
    {
        schema_error(where, "expected a boolean");
    }
    return v.get<bool>();
}

inline Position get_position(const json& v, const std::string& where)
{
    if (!v.is_array() || v.size() != 2)
    {
        schema_error(where, "expected [row, col]");
    }
    return Position{get_number<int>(v[0], where + "[0]"), get_number<int>(v[1], where + "[1]")};
}

} // namespace vespa::schema
