#pragma once

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <string>

#include "understory/errors.hpp"

namespace understory::detail {

using json = nlohmann::json;

inline json load_json_file(const std::filesystem::path& path, const char* what) {
    std::ifstream in(path);
    if (!in) throw IoError(std::string("cannot open ") + what + " '" + path.string() + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("invalid ") + what + " '" + path.string() + "': " + e.what());
    }
}

inline void save_json_file(const json& j, const std::filesystem::path& path, const char* what) {
    std::ofstream out(path);
    if (!out) throw IoError(std::string("cannot write ") + what + " '" + path.string() + "'");
    out << j.dump(2) << "\n";
    if (!out) throw IoError(std::string("short write for ") + what + " '" + path.string() + "'");
}

template <typename T>
T require(const json& j, const char* key, const char* context) {
    if (!j.is_object() || !j.contains(key))
        throw ConfigError(std::string(context) + ": missing field '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string(context) + ": field '" + key + "' has the wrong type");
    }
}

template <typename T>
T optional_field(const json& j, const char* key, T fallback) {
    if (!j.is_object() || !j.contains(key)) return fallback;
    return j.at(key).get<T>();
}

} // namespace understory::detail
