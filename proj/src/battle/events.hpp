#pragma once

#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "battle/types.hpp"

namespace pokeai::battle {

enum class Side : std::uint8_t { Player, Enemy };

std::string_view side_name(Side side);

// Every event carries the post-change values it touched, so applying the
// event list to the pre-turn state reproduces the post-turn state.
namespace event {

struct TurnStarted {
    int turn = 0;
};
struct MoveUsed {
    Side side = Side::Player;
    std::string move;
    int slot = 0;
    int pp_after = 0;
};
struct StruggleUsed {
    Side side = Side::Player;
};
struct Missed {
    Side side = Side::Player;
    std::string move;
};
struct Damage {
    Side target = Side::Enemy;
    std::string move;
    int amount = 0;
    bool crit = false;
    double effectiveness = 1.0;
    int hp_after = 0;
};
struct StatChanged {
    Side target = Side::Enemy;
    Stat stat = Stat::Attack;
    int delta = 0;
    int stage_after = 0;
};
struct MoveFailed {
    Side side = Side::Player;
    std::string move;
    std::string reason;
};
struct StatusApplied {
    Side target = Side::Enemy;
    Status status;
};
// Start-of-action status processing (sleep countdown, paralysis, confusion).
struct StatusTick {
    Side side = Side::Player;
    std::string note;  // fast_asleep | woke_up | fully_paralyzed | confused | snapped_out
    Status status_after;
};
struct SelfHit {
    Side side = Side::Player;
    int amount = 0;
    int hp_after = 0;
};
struct Drained {
    Side side = Side::Player;
    int amount = 0;
    int hp_after = 0;
};
struct Recoil {
    Side side = Side::Player;
    int amount = 0;
    int hp_after = 0;
};
struct ItemUsed {
    ItemKind item = ItemKind::Potion;
    int bag_slot = 0;
    int target = 0;
    int healed = 0;
    int hp_after = 0;
    int count_after = 0;
};
struct Switched {
    int from = 0;
    int to = 0;
    bool forced = false;
};
struct EscapeAttempt {
    bool success = false;
    int attempts_after = 0;
};
struct Fainted {
    Side side = Side::Player;
    int party_index = 0;  // meaningful for Side::Player
};
struct BattleEnded {
    Outcome outcome = Outcome::Ongoing;
};

}  // namespace event

using Event = std::variant<event::TurnStarted, event::MoveUsed, event::StruggleUsed, event::Missed,
                           event::Damage, event::StatChanged, event::MoveFailed,
                           event::StatusApplied, event::StatusTick, event::SelfHit, event::Drained,
                           event::Recoil, event::ItemUsed, event::Switched, event::EscapeAttempt,
                           event::Fainted, event::BattleEnded>;

using TurnEvents = std::vector<Event>;

// Snake-case kind tag ("move_used", "struggle_used", ...).
std::string_view event_kind(const Event& event);

nlohmann::json to_json(const Event& event);
nlohmann::json to_json(const TurnEvents& events);

// One human-readable line, used by the history window.
std::string render(const Event& event, const BattleState& state);

// Applies one event's state delta.
void apply_event(BattleState& state, const Event& event);

inline void apply_events(BattleState& state, const TurnEvents& events) {
    for (const auto& e : events) apply_event(state, e);
}

}  // namespace pokeai::battle
