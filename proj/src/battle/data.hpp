#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "battle/types.hpp"

namespace pokeai::battle {

struct StageTables {
    int denominator = 100;
    std::array<int, 13> battle_stat{};        // index = stage + 6
    std::array<int, 13> accuracy_evasion{};  // index = stage + 6
};

// Battle constants that are not per-move or per-species.
struct Mechanics {
    int damage_roll_min = 217;
    int damage_roll_max = 255;
    int stab_numerator = 3;
    int stab_denominator = 2;
    int crit_speed_divisor = 2;
    int crit_roll_range = 256;
    int escape_speed_factor = 32;
    int escape_attempt_bonus = 30;
    int escape_roll_range = 256;
    int paralysis_speed_divisor = 4;
    int full_paralysis_chance = 64;
    int confusion_self_hit_chance = 128;
    int confusion_self_hit_power = 40;
    int status_roll_range = 256;
    int sleep_turns_min = 1;
    int sleep_turns_max = 4;
    int confusion_turns_min = 1;
    int confusion_turns_max = 4;
    int potion_heal = 20;
    int struggle_power = 50;
    int struggle_recoil_divisor = 2;
    int turn_limit = 500;
};

// Immutable rule set loaded from the data directory. Monsters hold raw
// pointers into it, so it is always owned through shared_ptr<const GameData>.
class GameData {
public:
    static std::shared_ptr<const GameData> load(const std::filesystem::path& data_dir);

    const MoveSpec* find_move(std::string_view name) const;
    const SpeciesSpec* find_species(std::string_view name) const;
    const MoveSpec& move(std::string_view name) const;        // throws DataError
    const SpeciesSpec& species(std::string_view name) const;  // throws DataError

    // Chart entry in tenths: 0, 5, 10 or 20.
    int chart_tenths(TypeId attack, TypeId defend) const {
        return chart_[static_cast<int>(attack)][static_cast<int>(defend)];
    }
    bool type_is_special(TypeId type) const { return special_[static_cast<int>(type)]; }

    const StageTables& stage_tables() const { return stages_; }
    const Mechanics& mechanics() const { return mechanics_; }
    const MoveSpec& struggle() const { return struggle_; }
    const std::vector<std::unique_ptr<MoveSpec>>& moves() const { return moves_; }
    const std::vector<std::unique_ptr<SpeciesSpec>>& all_species() const { return species_; }
    const std::filesystem::path& directory() const { return dir_; }

private:
    GameData() = default;

    std::filesystem::path dir_;
    std::array<std::array<int, kTypeCount>, kTypeCount> chart_{};
    std::array<bool, kTypeCount> special_{};
    StageTables stages_;
    Mechanics mechanics_;
    MoveSpec struggle_;
    std::vector<std::unique_ptr<MoveSpec>> moves_;
    std::vector<std::unique_ptr<SpeciesSpec>> species_;
    std::map<std::string, const MoveSpec*, std::less<>> move_index_;
    std::map<std::string, const SpeciesSpec*, std::less<>> species_index_;
};

using GameDataPtr = std::shared_ptr<const GameData>;

}  // namespace pokeai::battle
