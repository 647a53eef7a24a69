#include "battle/types.hpp"

#include <algorithm>

#include "common/errors.hpp"

namespace pokeai::battle {

namespace {

constexpr std::array<std::string_view, kTypeCount> kTypeNames = {
    "Normal", "Fire",   "Water",   "Electric", "Grass", "Ice",   "Fighting", "Poison",
    "Ground", "Flying", "Psychic", "Bug",      "Rock",  "Ghost", "Dragon",
};

constexpr std::array<std::string_view, kStageStatCount> kStatNames = {
    "attack", "defense", "speed", "special", "accuracy", "evasion",
};

}  // namespace

std::string_view type_name(TypeId type) { return kTypeNames[static_cast<int>(type)]; }

std::optional<TypeId> parse_type(std::string_view name) {
    for (int i = 0; i < kTypeCount; ++i) {
        if (kTypeNames[i] == name) return static_cast<TypeId>(i);
    }
    return std::nullopt;
}

std::string_view category_name(MoveCategory category) {
    switch (category) {
        case MoveCategory::Physical: return "physical";
        case MoveCategory::Special: return "special";
        case MoveCategory::Status: return "status";
    }
    return "?";
}

std::string_view stat_name(Stat stat) { return kStatNames[static_cast<int>(stat)]; }

std::optional<Stat> parse_stat(std::string_view name) {
    for (int i = 0; i < kStageStatCount; ++i) {
        if (kStatNames[i] == name) return static_cast<Stat>(i);
    }
    return std::nullopt;
}

int StatStages::adjust(Stat stat, int delta) {
    int& v = values_[static_cast<int>(stat)];
    const int before = v;
    v = std::clamp(v + delta, kMin, kMax);
    return v - before;
}

void StatStages::set(Stat stat, int value) {
    expects(value >= kMin && value <= kMax, "StatStages::set: stage out of range");
    values_[static_cast<int>(stat)] = value;
}

std::string_view status_name(StatusKind kind) {
    switch (kind) {
        case StatusKind::None: return "none";
        case StatusKind::Sleep: return "sleep";
        case StatusKind::Paralysis: return "paralysis";
        case StatusKind::Confusion: return "confusion";
    }
    return "?";
}

bool Monster::has_usable_move() const {
    return std::any_of(moves.begin(), moves.end(), [](const MoveSlot& m) { return m.pp > 0; });
}

std::string_view item_name(ItemKind item) {
    switch (item) {
        case ItemKind::Potion: return "potion";
        case ItemKind::PokeBall: return "poke_ball";
    }
    return "?";
}

std::optional<ItemKind> parse_item(std::string_view name) {
    if (name == "potion") return ItemKind::Potion;
    if (name == "poke_ball") return ItemKind::PokeBall;
    return std::nullopt;
}

int Bag::count(ItemKind item) const {
    int total = 0;
    for (const auto& slot : slots) {
        if (slot.item == item) total += slot.count;
    }
    return total;
}

std::string_view outcome_name(Outcome outcome) {
    switch (outcome) {
        case Outcome::Ongoing: return "ongoing";
        case Outcome::Win: return "win";
        case Outcome::Loss: return "loss";
        case Outcome::Escaped: return "escaped";
    }
    return "?";
}

bool BattleState::party_wiped() const {
    return std::all_of(party.begin(), party.end(), [](const Monster& m) { return m.fainted(); });
}

std::string describe(const Action& action) {
    struct Visitor {
        std::string operator()(const action::UseMove& a) const {
            return "move#" + std::to_string(a.slot + 1);
        }
        std::string operator()(const action::Struggle&) const { return "struggle"; }
        std::string operator()(const action::Switch& a) const {
            return "switch#" + std::to_string(a.party_index + 1);
        }
        std::string operator()(const action::UseItem& a) const {
            return "item#" + std::to_string(a.bag_slot + 1) + "->" + std::to_string(a.target + 1);
        }
        std::string operator()(const action::Run&) const { return "run"; }
    };
    return std::visit(Visitor{}, action);
}

}  // namespace pokeai::battle
