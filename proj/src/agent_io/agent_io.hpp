#pragma once

// Text interface between a battle and a decision policy. All 1-based
// numbering seen by policies is produced and consumed here; everything
// outside this module works with 0-based indices.

#include <deque>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "battle/engine.hpp"
#include "battle/events.hpp"
#include "common/errors.hpp"

namespace pokeai::agent_io {

enum class ActionKind { Move, Switch, Item, Run };

std::string_view kind_name(ActionKind kind);

struct ActionRequest {
    ActionKind kind = ActionKind::Move;
    std::optional<int> index;   // 1-based
    std::optional<int> target;  // 1-based party slot, items only
    std::string raw_text;

    friend bool operator==(const ActionRequest&, const ActionRequest&) = default;
};

class ParseError : public Error {
public:
    explicit ParseError(const std::string& what) : Error(ErrorCode::InvalidArgument, what) {}
};

class InvalidActionError : public Error {
public:
    InvalidActionError(ActionRequest request, const std::string& what)
        : Error(ErrorCode::InvalidArgument, what), request_(std::move(request)) {}
    const ActionRequest& request() const { return request_; }

private:
    ActionRequest request_;
};

struct Prompt {
    std::string system;
    std::string user;

    std::string hash() const;
};

class PromptTemplate {
public:
    static PromptTemplate load(const std::filesystem::path& path);
    static PromptTemplate parse(const std::string& text, const std::string& source = "template");

    // Placeholders are {{name}}. A line that is only a placeholder disappears
    // when the value is empty.
    Prompt render(const std::vector<std::pair<std::string, std::string>>& values) const;

private:
    std::string system_;
    std::string user_;
};

class HistoryWindow {
public:
    static constexpr std::size_t kCapacity = 3;

    void push(std::vector<std::string> round);
    const std::deque<std::vector<std::string>>& rounds() const { return rounds_; }
    bool empty() const { return rounds_.empty(); }
    std::size_t size() const { return rounds_.size(); }

private:
    std::deque<std::vector<std::string>> rounds_;
};

// One text line per event, rendered against the state as it was when the
// event happened. `before` is the state at the start of the turn.
std::vector<std::string> render_events(const battle::BattleState& before, const battle::TurnEvents& events);

void record_round(HistoryWindow& history, const battle::BattleState& before, const battle::TurnEvents& events);

Prompt serialize_state(const PromptTemplate& tmpl, const battle::BattleEngine& engine,
                       const battle::BattleState& state, const HistoryWindow& history,
                       const std::vector<std::string>& memory_snippets, const battle::AblationMask& mask);

ActionRequest parse_action(const std::string& raw);

// Maps a request onto the valid set. The active Monster is the default
// potion target.
battle::Action validate_action(const ActionRequest& request, const battle::ActionSet& valid,
                               const battle::BattleState& state);

// Inverse of validate_action for members of the valid set.
ActionRequest to_request(const battle::Action& action, const battle::BattleState& state);
std::string to_wire(const ActionRequest& request);

// Short menu label ("Ember", "Switch to Pidgey", ...).
std::string action_label(const battle::Action& action, const battle::BattleState& state);

}  // namespace pokeai::agent_io
