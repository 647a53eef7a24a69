#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace pokeai::battle {

enum class TypeId : std::uint8_t {
    Normal,
    Fire,
    Water,
    Electric,
    Grass,
    Ice,
    Fighting,
    Poison,
    Ground,
    Flying,
    Psychic,
    Bug,
    Rock,
    Ghost,
    Dragon,
};
inline constexpr int kTypeCount = 15;

std::string_view type_name(TypeId type);
std::optional<TypeId> parse_type(std::string_view name);

enum class MoveCategory : std::uint8_t { Physical, Special, Status };

std::string_view category_name(MoveCategory category);

enum class Stat : std::uint8_t { Attack, Defense, Speed, Special, Accuracy, Evasion };
inline constexpr int kStageStatCount = 6;

std::string_view stat_name(Stat stat);
std::optional<Stat> parse_stat(std::string_view name);

enum class EffectKind : std::uint8_t { None, LowerStat, RaiseStat, Drain, Sleep, Paralyze, Confuse };

struct MoveEffect {
    EffectKind kind = EffectKind::None;
    Stat stat = Stat::Attack;  // LowerStat / RaiseStat
    int stages = 0;            // LowerStat / RaiseStat
    int drain_numerator = 0;   // Drain
    int drain_denominator = 1;
};

struct MoveSpec {
    std::string name;
    TypeId type = TypeId::Normal;
    MoveCategory category = MoveCategory::Physical;
    int power = 0;
    std::optional<int> accuracy;  // nullopt: never misses
    int max_pp = 1;
    int priority = 0;
    MoveEffect effect;

    bool is_damaging() const { return category != MoveCategory::Status; }
};

struct BaseStats {
    int hp = 1;
    int attack = 1;
    int defense = 1;
    int speed = 1;
    int special = 1;
};

struct LearnsetEntry {
    int level = 1;
    const MoveSpec* move = nullptr;
};

struct SpeciesSpec {
    std::string name;
    TypeId type1 = TypeId::Normal;
    std::optional<TypeId> type2;
    BaseStats base;
    std::vector<LearnsetEntry> learnset;  // ascending by level

    bool has_type(TypeId type) const { return type1 == type || (type2 && *type2 == type); }
};

// Per-stat determinant values, each in [0, 15].
struct Dvs {
    int hp = 8;
    int attack = 8;
    int defense = 8;
    int speed = 8;
    int special = 8;

    friend bool operator==(const Dvs&, const Dvs&) = default;
};

struct Stats {
    int hp = 1;
    int attack = 1;
    int defense = 1;
    int speed = 1;
    int special = 1;

    friend bool operator==(const Stats&, const Stats&) = default;
};

class StatStages {
public:
    int get(Stat stat) const { return values_[static_cast<int>(stat)]; }
    // Stores the clamped value and returns the change actually applied.
    int adjust(Stat stat, int delta);
    void set(Stat stat, int value);
    void reset() { values_.fill(0); }

    friend bool operator==(const StatStages&, const StatStages&) = default;

    static constexpr int kMin = -6;
    static constexpr int kMax = 6;

private:
    std::array<int, kStageStatCount> values_{};
};

enum class StatusKind : std::uint8_t { None, Sleep, Paralysis, Confusion };

std::string_view status_name(StatusKind kind);

struct Status {
    StatusKind kind = StatusKind::None;
    int turns = 0;  // remaining turns for Sleep / Confusion

    friend bool operator==(const Status&, const Status&) = default;
};

struct MoveSlot {
    const MoveSpec* move = nullptr;
    int pp = 0;

    friend bool operator==(const MoveSlot&, const MoveSlot&) = default;
};

struct Monster {
    const SpeciesSpec* species = nullptr;
    int level = 1;
    Dvs dvs;
    Stats stats;
    int current_hp = 1;
    std::vector<MoveSlot> moves;
    Status status;
    StatStages stages;

    int max_hp() const { return stats.hp; }
    bool fainted() const { return current_hp == 0; }
    bool has_usable_move() const;
    const std::string& name() const { return species->name; }

    friend bool operator==(const Monster&, const Monster&) = default;
};

enum class ItemKind : std::uint8_t { Potion, PokeBall };

std::string_view item_name(ItemKind item);
std::optional<ItemKind> parse_item(std::string_view name);

struct BagSlot {
    ItemKind item = ItemKind::Potion;
    int count = 0;

    friend bool operator==(const BagSlot&, const BagSlot&) = default;
};

struct Bag {
    std::vector<BagSlot> slots;

    int count(ItemKind item) const;

    friend bool operator==(const Bag&, const Bag&) = default;
};

enum class Outcome : std::uint8_t { Ongoing, Win, Loss, Escaped };

std::string_view outcome_name(Outcome outcome);

struct BattleState {
    std::vector<Monster> party;
    int active = 0;
    Monster enemy;
    Bag bag;
    int turn_number = 0;
    int escape_attempts = 0;
    Outcome outcome = Outcome::Ongoing;
    // Active player Monster fainted and a healthy bench member must come in.
    bool forced_switch_pending = false;

    Monster& active_monster() { return party.at(static_cast<std::size_t>(active)); }
    const Monster& active_monster() const { return party.at(static_cast<std::size_t>(active)); }
    bool party_wiped() const;

    friend bool operator==(const BattleState&, const BattleState&) = default;
};

// ---- actions --------------------------------------------------------------

namespace action {
struct UseMove {
    int slot = 0;  // 0-based move slot
    friend bool operator==(const UseMove&, const UseMove&) = default;
};
struct Struggle {
    friend bool operator==(const Struggle&, const Struggle&) = default;
};
struct Switch {
    int party_index = 0;  // 0-based
    friend bool operator==(const Switch&, const Switch&) = default;
};
struct UseItem {
    int bag_slot = 0;  // 0-based
    int target = 0;    // 0-based party index
    friend bool operator==(const UseItem&, const UseItem&) = default;
};
struct Run {
    friend bool operator==(const Run&, const Run&) = default;
};
}  // namespace action

using Action = std::variant<action::UseMove, action::Struggle, action::Switch, action::UseItem,
                            action::Run>;
using ActionSet = std::vector<Action>;

std::string describe(const Action& action);

}  // namespace pokeai::battle
