#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

namespace pokeai::json_util {

using nlohmann::json;

// Missing/unreadable file -> IoError; malformed JSON -> DataError.
json read_file(const std::filesystem::path& path);

// Writes atomically-enough for our purposes (truncate + write + flush).
void write_file(const std::filesystem::path& path, const std::string& contents);

// Field accessors that raise DataError naming `context.key`.
const json& require(const json& object, std::string_view key, const std::string& context);
int require_int(const json& object, std::string_view key, const std::string& context, int lo,
                int hi);
double require_number(const json& object, std::string_view key, const std::string& context);
std::string require_string(const json& object, std::string_view key, const std::string& context);
const json& require_array(const json& object, std::string_view key, const std::string& context);
void require_schema_version(const json& document, const std::string& context, int expected);

}  // namespace pokeai::json_util
