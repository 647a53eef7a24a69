#include "battle/serialize.hpp"

#include "common/hash.hpp"

namespace pokeai::battle {

using nlohmann::json;

json to_json(const Monster& m) {
    json moves = json::array();
    for (const auto& slot : m.moves)
        moves.push_back({{"name", slot.move->name}, {"pp", slot.pp}, {"max_pp", slot.move->max_pp}});
    json stages = json::object();
    for (int i = 0; i < kStageStatCount; ++i) {
        const auto s = static_cast<Stat>(i);
        stages[std::string(stat_name(s))] = m.stages.get(s);
    }
    json types = json::array({type_name(m.species->type1)});
    if (m.species->type2) types.push_back(type_name(*m.species->type2));
    return {
        {"species", m.species->name},
        {"level", m.level},
        {"types", types},
        {"hp", m.current_hp},
        {"max_hp", m.max_hp()},
        {"stats", {{"attack", m.stats.attack}, {"defense", m.stats.defense},
                   {"speed", m.stats.speed}, {"special", m.stats.special}}},
        {"dvs", {{"hp", m.dvs.hp}, {"attack", m.dvs.attack}, {"defense", m.dvs.defense},
                 {"speed", m.dvs.speed}, {"special", m.dvs.special}}},
        {"moves", moves},
        {"status", {{"kind", status_name(m.status.kind)}, {"turns", m.status.turns}}},
        {"stages", stages},
    };
}

json to_json(const BattleState& state) {
    json party = json::array();
    for (const auto& m : state.party) party.push_back(to_json(m));
    json bag = json::array();
    for (const auto& slot : state.bag.slots)
        bag.push_back({{"item", item_name(slot.item)}, {"count", slot.count}});
    return {
        {"party", party},
        {"active", state.active},
        {"enemy", to_json(state.enemy)},
        {"bag", bag},
        {"turn_number", state.turn_number},
        {"escape_attempts", state.escape_attempts},
        {"outcome", outcome_name(state.outcome)},
        {"forced_switch_pending", state.forced_switch_pending},
    };
}

std::string state_digest(const BattleState& state) {
    return sha256_hex(to_json(state).dump()).substr(0, 16);
}

}  // namespace pokeai::battle
