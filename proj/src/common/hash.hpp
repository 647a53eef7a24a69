#pragma once

#include <string>
#include <string_view>

namespace pokeai {

// Lowercase hex SHA-256 of the input bytes.
std::string sha256_hex(std::string_view bytes);

}  // namespace pokeai
