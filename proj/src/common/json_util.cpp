#include "common/json_util.hpp"

#include <fstream>
#include <sstream>

#include "common/errors.hpp"

namespace pokeai::json_util {

namespace {

std::string field_path(const std::string& context, std::string_view key) {
    return context + "." + std::string(key);
}

}  // namespace

json read_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    try {
        return json::parse(buffer.str());
    } catch (const json::parse_error& e) {
        throw DataError(path.string() + ": invalid JSON: " + e.what());
    }
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << contents;
    out.flush();
    if (!out) throw IoError("write failed for " + path.string());
}

const json& require(const json& object, std::string_view key, const std::string& context) {
    if (!object.is_object()) throw DataError(context + ": expected an object");
    auto it = object.find(key);
    if (it == object.end()) throw DataError(field_path(context, key) + ": missing field");
    return *it;
}

int require_int(const json& object, std::string_view key, const std::string& context, int lo,
                int hi) {
    const json& value = require(object, key, context);
    if (!value.is_number_integer())
        throw DataError(field_path(context, key) + ": expected an integer");
    const auto v = value.get<long long>();
    if (v < lo || v > hi) {
        throw DataError(field_path(context, key) + ": value " + std::to_string(v) +
                        " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
    return static_cast<int>(v);
}

double require_number(const json& object, std::string_view key, const std::string& context) {
    const json& value = require(object, key, context);
    if (!value.is_number()) throw DataError(field_path(context, key) + ": expected a number");
    return value.get<double>();
}

std::string require_string(const json& object, std::string_view key, const std::string& context) {
    const json& value = require(object, key, context);
    if (!value.is_string()) throw DataError(field_path(context, key) + ": expected a string");
    return value.get<std::string>();
}

const json& require_array(const json& object, std::string_view key, const std::string& context) {
    const json& value = require(object, key, context);
    if (!value.is_array()) throw DataError(field_path(context, key) + ": expected an array");
    return value;
}

void require_schema_version(const json& document, const std::string& context, int expected) {
    const int version = require_int(document, "schema_version", context, 0, 1 << 30);
    if (version != expected) {
        throw DataError(context + ".schema_version: unsupported version " +
                        std::to_string(version) + " (expected " + std::to_string(expected) + ")");
    }
}

}  // namespace pokeai::json_util
