#pragma once

#include <filesystem>
#include <string>

#include "battle/data.hpp"
#include "battle/engine.hpp"
#include "scenario/scenario.hpp"

namespace testing_support {

inline std::filesystem::path data_dir() { return POKEAI_DATA_DIR; }
inline std::filesystem::path prompt_dir() { return POKEAI_PROMPT_DIR; }
inline std::filesystem::path source_dir() { return POKEAI_SOURCE_DIR; }

inline const pokeai::battle::GameDataPtr& game_data() {
    static const auto data = pokeai::battle::GameData::load(data_dir());
    return data;
}

inline const pokeai::battle::BattleEngine& engine() {
    static const pokeai::battle::BattleEngine e(game_data());
    return e;
}

inline pokeai::battle::Monster monster(const std::string& species, int level,
                                       pokeai::battle::Dvs dvs = {}) {
    const auto& sp = game_data()->species(species);
    return pokeai::battle::make_monster(sp, level, dvs, pokeai::battle::default_moveset(sp, level));
}

inline pokeai::battle::Monster monster_with(const std::string& species, int level,
                                            std::initializer_list<const char*> moves,
                                            pokeai::battle::Dvs dvs = {}) {
    std::vector<const pokeai::battle::MoveSpec*> specs;
    for (const char* m : moves) specs.push_back(&game_data()->move(m));
    return pokeai::battle::make_monster(game_data()->species(species), level, dvs, specs);
}

inline pokeai::scenario::Checkpoint default_checkpoint() {
    return pokeai::scenario::load_checkpoint(data_dir() / "checkpoints" / "mt_moon_default.json",
                                            *game_data());
}

// Default checkpoint party against `enemy`.
inline pokeai::battle::BattleState mt_moon_state(pokeai::battle::Monster enemy) {
    auto cp = default_checkpoint();
    return pokeai::scenario::begin_battle(cp.party, cp.bag, std::move(enemy));
}

// Scratch directory unique to the calling test.
inline std::filesystem::path temp_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("pokeai_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace testing_support
