#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "battle/data.hpp"
#include "battle/engine.hpp"
#include "common/rng.hpp"

namespace pokeai::scenario {

struct EncounterEntry {
    const battle::SpeciesSpec* species = nullptr;
    std::vector<int> level_set;
    double weight = 0.0;
};

struct EncounterTable {
    std::string location;
    std::vector<EncounterEntry> entries;

    double expected_level() const;
};

struct Checkpoint {
    std::vector<battle::Monster> party;
    battle::Bag bag;
};

struct Encounter {
    const battle::SpeciesSpec* species = nullptr;
    int level = 1;
};

// Exactly two RNG draws: one for the species, one for the level.
Encounter sample_encounter(const EncounterTable& table, Rng& rng);

// Rolls five DVs (five draws) and builds the Monster with its default moveset.
battle::Monster spawn_wild(const battle::SpeciesSpec& species, int level, Rng& rng);

EncounterTable load_encounter_table(const std::filesystem::path& path, const battle::GameData& data);
Checkpoint load_checkpoint(const std::filesystem::path& path, const battle::GameData& data);

// Fresh battle against `enemy`: picks the first non-fainted party member,
// clears stages and confusion, resets the per-battle counters.
battle::BattleState begin_battle(std::vector<battle::Monster> party, battle::Bag bag,
                                 battle::Monster enemy);

}  // namespace pokeai::scenario
