#pragma once

#include <json.hpp>

#include "battle/types.hpp"

namespace pokeai::battle {

nlohmann::json to_json(const Monster& monster);
nlohmann::json to_json(const BattleState& state);

// Short stable digest of the canonical state JSON (first 16 hex chars of SHA-256).
std::string state_digest(const BattleState& state);

}  // namespace pokeai::battle
