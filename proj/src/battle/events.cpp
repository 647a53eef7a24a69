#include "battle/events.hpp"

#include <algorithm>
#include <sstream>

#include "common/errors.hpp"

namespace pokeai::battle {

using nlohmann::json;

std::string_view side_name(Side side) { return side == Side::Player ? "player" : "enemy"; }

namespace {

Monster& monster_for(BattleState& state, Side side) {
    return side == Side::Player ? state.active_monster() : state.enemy;
}

std::string actor(const BattleState& state, Side side) {
    if (side == Side::Enemy) return "Wild " + state.enemy.name();
    return state.active_monster().name();
}

std::string effectiveness_note(double e) {
    if (e == 0.0) return " (no effect)";
    if (e > 1.0) return " (super effective)";
    if (e < 1.0) return " (not very effective)";
    return "";
}

json status_json(const Status& s) {
    return {{"kind", status_name(s.kind)}, {"turns", s.turns}};
}

}  // namespace

std::string_view event_kind(const Event& e) {
    struct V {
        std::string_view operator()(const event::TurnStarted&) const { return "turn_started"; }
        std::string_view operator()(const event::MoveUsed&) const { return "move_used"; }
        std::string_view operator()(const event::StruggleUsed&) const { return "struggle_used"; }
        std::string_view operator()(const event::Missed&) const { return "missed"; }
        std::string_view operator()(const event::Damage&) const { return "damage"; }
        std::string_view operator()(const event::StatChanged&) const { return "stat_changed"; }
        std::string_view operator()(const event::MoveFailed&) const { return "move_failed"; }
        std::string_view operator()(const event::StatusApplied&) const { return "status_applied"; }
        std::string_view operator()(const event::StatusTick&) const { return "status_tick"; }
        std::string_view operator()(const event::SelfHit&) const { return "self_hit"; }
        std::string_view operator()(const event::Drained&) const { return "drained"; }
        std::string_view operator()(const event::Recoil&) const { return "recoil"; }
        std::string_view operator()(const event::ItemUsed&) const { return "item_used"; }
        std::string_view operator()(const event::Switched&) const { return "switched"; }
        std::string_view operator()(const event::EscapeAttempt&) const { return "escape_attempt"; }
        std::string_view operator()(const event::Fainted&) const { return "fainted"; }
        std::string_view operator()(const event::BattleEnded&) const { return "battle_ended"; }
    };
    return std::visit(V{}, e);
}

json to_json(const Event& e) {
    json j;
    j["kind"] = event_kind(e);
    std::visit(
        [&j](const auto& ev) {
            using T = std::decay_t<decltype(ev)>;
            if constexpr (std::is_same_v<T, event::TurnStarted>) {
                j["turn"] = ev.turn;
            } else if constexpr (std::is_same_v<T, event::MoveUsed>) {
                j["side"] = side_name(ev.side);
                j["move"] = ev.move;
                j["slot"] = ev.slot;
                j["pp_after"] = ev.pp_after;
            } else if constexpr (std::is_same_v<T, event::StruggleUsed>) {
                j["side"] = side_name(ev.side);
            } else if constexpr (std::is_same_v<T, event::Missed>) {
                j["side"] = side_name(ev.side);
                j["move"] = ev.move;
            } else if constexpr (std::is_same_v<T, event::Damage>) {
                j["target"] = side_name(ev.target);
                j["move"] = ev.move;
                j["amount"] = ev.amount;
                j["crit"] = ev.crit;
                j["effectiveness"] = ev.effectiveness;
                j["hp_after"] = ev.hp_after;
            } else if constexpr (std::is_same_v<T, event::StatChanged>) {
                j["target"] = side_name(ev.target);
                j["stat"] = stat_name(ev.stat);
                j["delta"] = ev.delta;
                j["stage_after"] = ev.stage_after;
            } else if constexpr (std::is_same_v<T, event::MoveFailed>) {
                j["side"] = side_name(ev.side);
                j["move"] = ev.move;
                j["reason"] = ev.reason;
            } else if constexpr (std::is_same_v<T, event::StatusApplied>) {
                j["target"] = side_name(ev.target);
                j["status"] = status_json(ev.status);
            } else if constexpr (std::is_same_v<T, event::StatusTick>) {
                j["side"] = side_name(ev.side);
                j["note"] = ev.note;
                j["status_after"] = status_json(ev.status_after);
            } else if constexpr (std::is_same_v<T, event::SelfHit> ||
                                 std::is_same_v<T, event::Drained> ||
                                 std::is_same_v<T, event::Recoil>) {
                j["side"] = side_name(ev.side);
                j["amount"] = ev.amount;
                j["hp_after"] = ev.hp_after;
            } else if constexpr (std::is_same_v<T, event::ItemUsed>) {
                j["item"] = item_name(ev.item);
                j["bag_slot"] = ev.bag_slot;
                j["target"] = ev.target;
                j["healed"] = ev.healed;
                j["hp_after"] = ev.hp_after;
                j["count_after"] = ev.count_after;
            } else if constexpr (std::is_same_v<T, event::Switched>) {
                j["from"] = ev.from;
                j["to"] = ev.to;
                j["forced"] = ev.forced;
            } else if constexpr (std::is_same_v<T, event::EscapeAttempt>) {
                j["success"] = ev.success;
                j["attempts_after"] = ev.attempts_after;
            } else if constexpr (std::is_same_v<T, event::Fainted>) {
                j["side"] = side_name(ev.side);
                j["party_index"] = ev.party_index;
            } else if constexpr (std::is_same_v<T, event::BattleEnded>) {
                j["outcome"] = outcome_name(ev.outcome);
            }
        },
        e);
    return j;
}

json to_json(const TurnEvents& events) {
    json arr = json::array();
    for (const auto& e : events) arr.push_back(to_json(e));
    return arr;
}

std::string render(const Event& e, const BattleState& state) {
    std::ostringstream os;
    std::visit(
        [&](const auto& ev) {
            using T = std::decay_t<decltype(ev)>;
            if constexpr (std::is_same_v<T, event::TurnStarted>) {
                os << "Turn " << ev.turn << " began.";
            } else if constexpr (std::is_same_v<T, event::MoveUsed>) {
                os << actor(state, ev.side) << " used " << ev.move << " (PP left " << ev.pp_after << ").";
            } else if constexpr (std::is_same_v<T, event::StruggleUsed>) {
                os << actor(state, ev.side) << " used Struggle (no PP left).";
            } else if constexpr (std::is_same_v<T, event::Missed>) {
                os << actor(state, ev.side) << "'s " << ev.move << " missed.";
            } else if constexpr (std::is_same_v<T, event::Damage>) {
                os << ev.move << " dealt " << ev.amount << " damage to " << actor(state, ev.target)
                   << (ev.crit ? " (critical hit)" : "") << effectiveness_note(ev.effectiveness)
                   << "; HP now " << ev.hp_after << ".";
            } else if constexpr (std::is_same_v<T, event::StatChanged>) {
                os << actor(state, ev.target) << "'s " << stat_name(ev.stat)
                   << (ev.delta < 0 ? " fell" : " rose") << " to stage " << ev.stage_after << ".";
            } else if constexpr (std::is_same_v<T, event::MoveFailed>) {
                os << actor(state, ev.side) << "'s " << ev.move << " failed (" << ev.reason << ").";
            } else if constexpr (std::is_same_v<T, event::StatusApplied>) {
                os << actor(state, ev.target) << " is now affected by " << status_name(ev.status.kind) << ".";
            } else if constexpr (std::is_same_v<T, event::StatusTick>) {
                os << actor(state, ev.side) << ": " << ev.note << ".";
            } else if constexpr (std::is_same_v<T, event::SelfHit>) {
                os << actor(state, ev.side) << " hurt itself in confusion for " << ev.amount << " HP.";
            } else if constexpr (std::is_same_v<T, event::Drained>) {
                os << actor(state, ev.side) << " drained " << ev.amount << " HP.";
            } else if constexpr (std::is_same_v<T, event::Recoil>) {
                os << actor(state, ev.side) << " took " << ev.amount << " recoil damage.";
            } else if constexpr (std::is_same_v<T, event::ItemUsed>) {
                os << "Used " << item_name(ev.item) << " on "
                   << state.party.at(static_cast<std::size_t>(ev.target)).name() << ", healed "
                   << ev.healed << " HP (" << ev.count_after << " left).";
            } else if constexpr (std::is_same_v<T, event::Switched>) {
                os << (ev.forced ? "Sent out " : "Switched to ")
                   << state.party.at(static_cast<std::size_t>(ev.to)).name() << ".";
            } else if constexpr (std::is_same_v<T, event::EscapeAttempt>) {
                os << (ev.success ? "Got away safely." : "Could not escape.");
            } else if constexpr (std::is_same_v<T, event::Fainted>) {
                if (ev.side == Side::Enemy) {
                    os << "Wild " << state.enemy.name() << " fainted.";
                } else {
                    os << state.party.at(static_cast<std::size_t>(ev.party_index)).name() << " fainted.";
                }
            } else if constexpr (std::is_same_v<T, event::BattleEnded>) {
                os << "Battle ended: " << outcome_name(ev.outcome) << ".";
            }
        },
        e);
    return os.str();
}

void apply_event(BattleState& state, const Event& e) {
    std::visit(
        [&](const auto& ev) {
            using T = std::decay_t<decltype(ev)>;
            if constexpr (std::is_same_v<T, event::TurnStarted>) {
                state.turn_number = ev.turn;
            } else if constexpr (std::is_same_v<T, event::MoveUsed>) {
                monster_for(state, ev.side).moves.at(static_cast<std::size_t>(ev.slot)).pp = ev.pp_after;
            } else if constexpr (std::is_same_v<T, event::Damage>) {
                monster_for(state, ev.target).current_hp = ev.hp_after;
            } else if constexpr (std::is_same_v<T, event::StatChanged>) {
                monster_for(state, ev.target).stages.set(ev.stat, ev.stage_after);
            } else if constexpr (std::is_same_v<T, event::StatusApplied>) {
                monster_for(state, ev.target).status = ev.status;
            } else if constexpr (std::is_same_v<T, event::StatusTick>) {
                monster_for(state, ev.side).status = ev.status_after;
            } else if constexpr (std::is_same_v<T, event::SelfHit> ||
                                 std::is_same_v<T, event::Drained> ||
                                 std::is_same_v<T, event::Recoil>) {
                monster_for(state, ev.side).current_hp = ev.hp_after;
            } else if constexpr (std::is_same_v<T, event::ItemUsed>) {
                state.bag.slots.at(static_cast<std::size_t>(ev.bag_slot)).count = ev.count_after;
                state.party.at(static_cast<std::size_t>(ev.target)).current_hp = ev.hp_after;
            } else if constexpr (std::is_same_v<T, event::Switched>) {
                Monster& outgoing = state.party.at(static_cast<std::size_t>(ev.from));
                outgoing.stages.reset();
                if (outgoing.status.kind == StatusKind::Confusion) outgoing.status = Status{};
                state.active = ev.to;
                state.active_monster().stages.reset();
                state.forced_switch_pending = false;
            } else if constexpr (std::is_same_v<T, event::EscapeAttempt>) {
                state.escape_attempts = ev.attempts_after;
            } else if constexpr (std::is_same_v<T, event::Fainted>) {
                if (ev.side == Side::Enemy) {
                    state.enemy.current_hp = 0;
                } else {
                    state.party.at(static_cast<std::size_t>(ev.party_index)).current_hp = 0;
                    state.forced_switch_pending = !state.party_wiped();
                }
            } else if constexpr (std::is_same_v<T, event::BattleEnded>) {
                state.outcome = ev.outcome;
                state.forced_switch_pending = false;
            }
            // StruggleUsed, Missed, MoveFailed carry no state delta.
        },
        e);
}

}  // namespace pokeai::battle
