#include "reclab/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace reclab {

nlohmann::json load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot read config " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(buf.str());
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
    }
    if (!j.is_object()) {
        throw ConfigError("config " + path.string() + " must be a JSON object");
    }
    if (!j.contains("version") || !j.at("version").is_number_integer() ||
        j.at("version").get<int>() != kConfigVersion) {
        throw ConfigError("config " + path.string() + ": \"version\" must be " +
                          std::to_string(kConfigVersion));
    }
    return j;
}

void check_fields(const nlohmann::json& j, std::initializer_list<std::string_view> allowed,
                  std::string_view context) {
    if (!j.is_object()) {
        throw ConfigError(std::string(context) + " must be a JSON object");
    }
    for (const auto& [key, value] : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw ConfigError(std::string(context) + ": unknown field \"" + key + "\"");
        }
    }
}

} // namespace reclab
