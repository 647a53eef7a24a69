#pragma once

#include <string>

namespace pokeai {

// Current UTC time as "YYYY-MM-DDTHH:MM:SSZ".
std::string utc_timestamp();

}  // namespace pokeai
