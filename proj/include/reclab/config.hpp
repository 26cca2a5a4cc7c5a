#pragma once

#include <filesystem>
#include <initializer_list>
#include <string>
#include <string_view>

#include <json.hpp>

#include "reclab/errors.hpp"

namespace reclab {

inline constexpr int kConfigVersion = 1;

/// Reads a JSON config file and checks its "version". Missing or unreadable
/// files raise ConfigError naming the path.
nlohmann::json load_config(const std::filesystem::path& path);

/// Throws ConfigError on any key of `j` not listed in `allowed`.
void check_fields(const nlohmann::json& j, std::initializer_list<std::string_view> allowed,
                  std::string_view context);

/// j[key] converted to T, with a ConfigError naming the key on failure.
template <class T> T get_field(const nlohmann::json& j, const char* key, std::string_view context) {
    if (!j.is_object() || !j.contains(key)) {
        throw ConfigError(std::string(context) + ": missing field \"" + key + "\"");
    }
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError(std::string(context) + ": field \"" + key + "\" has the wrong type");
    }
}

template <class T>
T get_field(const nlohmann::json& j, const char* key, std::string_view context, T fallback) {
    return j.contains(key) ? get_field<T>(j, key, context) : fallback;
}

} // namespace reclab
