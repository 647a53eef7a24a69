#pragma once

#include <optional>

#include "battle/data.hpp"
#include "battle/events.hpp"
#include "battle/types.hpp"
#include "common/rng.hpp"

namespace pokeai::battle {

struct Ratio {
    int numerator = 1;
    int denominator = 1;

    double value() const { return static_cast<double>(numerator) / denominator; }
    friend bool operator==(const Ratio&, const Ratio&) = default;
};

// Capabilities the agent may use. Forced switches ignore allow_strategic_switch.
struct AblationMask {
    bool allow_strategic_switch = true;
    bool allow_item = true;
    bool allow_escape = true;

    static AblationMask full() { return {}; }
    friend bool operator==(const AblationMask&, const AblationMask&) = default;
};

// Gen-1 stat formula; hp adds level + 10 instead of 5.
Stats compute_stats(const SpeciesSpec& species, int level, const Dvs& dvs);

// Last (up to) four distinct moves learned at or below `level`.
std::vector<const MoveSpec*> default_moveset(const SpeciesSpec& species, int level);

// Full-HP, full-PP Monster with no status.
Monster make_monster(const SpeciesSpec& species, int level, const Dvs& dvs,
                     const std::vector<const MoveSpec*>& moves);

class BattleEngine {
public:
    explicit BattleEngine(GameDataPtr data);

    const GameData& data() const { return *data_; }
    const GameDataPtr& data_ptr() const { return data_; }

    Ratio stage_multiplier(int stage) const;
    Ratio accuracy_stage_multiplier(int stage) const;

    // Product of chart entries; one of {0, 0.25, 0.5, 1, 2, 4}.
    double type_effectiveness(TypeId attack, TypeId defend1, std::optional<TypeId> defend2) const;

    // Stat after stages (and the paralysis speed cut), floored, at least 1.
    int effective_stat(const Monster& monster, Stat stat) const;

    int compute_damage_with_roll(const Monster& attacker, const Monster& defender,
                                 const MoveSpec& move, bool crit, int roll) const;
    int compute_damage(const Monster& attacker, const Monster& defender, const MoveSpec& move,
                       bool crit, Rng& rng) const;

    Ratio hit_chance(const MoveSpec& move, const Monster& attacker, const Monster& defender) const;
    bool accuracy_check(const MoveSpec& move, const Monster& attacker, const Monster& defender,
                        Rng& rng) const;

    Ratio crit_chance(const SpeciesSpec& species) const;
    bool critical_check(const SpeciesSpec& species, Rng& rng) const;

    // Escape odds F out of escape_roll_range; nullopt when escape is certain.
    std::optional<int> escape_threshold(const BattleState& state) const;
    bool attempt_escape(BattleState& state, Rng& rng) const;

    ActionSet valid_actions(const BattleState& state, const AblationMask& mask) const;
    bool is_valid(const BattleState& state, const Action& action, const AblationMask& mask) const;

    TurnEvents apply_item(BattleState& state, int bag_slot, int target) const;
    Action enemy_policy(const BattleState& state, Rng& rng) const;

    // Resolves one decision. While a forced switch is pending only the
    // player's switch resolves and `enemy_action` is ignored.
    TurnEvents resolve_turn(BattleState& state, const Action& player_action,
                            const Action& enemy_action, Rng& rng) const;

private:
    void execute_action(BattleState& state, Side side, const Action& action, TurnEvents& out,
                        Rng& rng) const;
    void execute_move(BattleState& state, Side side, const MoveSpec& move, int slot,
                      TurnEvents& out, Rng& rng) const;
    bool check_battle_end(BattleState& state, TurnEvents& out) const;
    int action_priority(const BattleState& state, Side side, const Action& action) const;

    GameDataPtr data_;
};

}  // namespace pokeai::battle
