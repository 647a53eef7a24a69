#pragma once

#include <chrono>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "agent_io/agent_io.hpp"
#include "battle/engine.hpp"
#include "common/rng.hpp"
#include "memory/memory.hpp"
#include "policies/transport.hpp"

namespace pokeai::policies {

enum class DecisionSource { Random, Heuristic, Human, Llm, Fallback };

std::string_view source_name(DecisionSource source);

enum class FailureKind { Parse, Invalid, Transport };

std::string_view failure_name(FailureKind kind);

struct InvalidAttempt {
    std::string raw_text;
    std::string error;
    FailureKind kind = FailureKind::Parse;
};

struct PolicyDecision {
    agent_io::ActionRequest request;
    battle::Action action;
    long latency_ms = 0;
    int retries_used = 0;
    DecisionSource source = DecisionSource::Random;
    std::vector<InvalidAttempt> invalid_attempts;
};

struct DecisionContext {
    const battle::BattleEngine& engine;
    const battle::BattleState& state;
    const battle::ActionSet& valid;
    const agent_io::Prompt& prompt;
    const std::vector<memory::MemoryRecord>& recalled;
};

class Policy {
public:
    virtual ~Policy() = default;
    virtual PolicyDecision decide(const DecisionContext& ctx, Rng& rng) = 0;
    virtual std::string_view name() const = 0;
};

PolicyDecision random_policy(const battle::ActionSet& valid, const battle::BattleState& state, Rng& rng);

// Heuristic thresholds are a testable baseline, not tuned play.
inline constexpr int kHeuristicPotionPercent = 25;

PolicyDecision heuristic_policy(const battle::BattleEngine& engine, const battle::BattleState& state,
                                const battle::ActionSet& valid);

// Expected damage score used by the heuristic.
double expected_damage(const battle::BattleEngine& engine, const battle::Monster& attacker,
                       const battle::Monster& defender, const battle::MoveSpec& move);

class RandomPolicy : public Policy {
public:
    PolicyDecision decide(const DecisionContext& ctx, Rng& rng) override;
    std::string_view name() const override { return "random"; }
};

class HeuristicPolicy : public Policy {
public:
    PolicyDecision decide(const DecisionContext& ctx, Rng& rng) override;
    std::string_view name() const override { return "heuristic"; }
};

// Heuristic play, except that it runs when recalled memories say this
// matchup was lost before.
class MemoryAwarePolicy : public Policy {
public:
    PolicyDecision decide(const DecisionContext& ctx, Rng& rng) override;
    std::string_view name() const override { return "memory-aware"; }
};

class HumanPolicy : public Policy {
public:
    HumanPolicy(std::istream& in, std::ostream& out) : in_(in), out_(out) {}
    PolicyDecision decide(const DecisionContext& ctx, Rng& rng) override;
    std::string_view name() const override { return "human"; }

private:
    std::istream& in_;
    std::ostream& out_;
};

struct LlmEndpointConfig {
    std::string base_url;
    std::string model_name;
    std::string api_key;  // never written to logs or configs
    int timeout_ms = 30000;
    int max_retries = 3;
    double temperature = 0.0;
    int backoff_ms = 500;
    int max_in_flight = 4;

    // Fills base_url, model_name and api_key from POKEAI_LLM_* variables
    // where those are set.
    void apply_environment();
    LiveOptions live_options() const { return {base_url, api_key, timeout_ms, max_in_flight}; }
};

inline constexpr int kMaxPolicyRetries = 3;

class LlmPolicy : public Policy {
public:
    LlmPolicy(LlmEndpointConfig config, std::shared_ptr<Transport> transport);
    PolicyDecision decide(const DecisionContext& ctx, Rng& rng) override;
    std::string_view name() const override { return "llm"; }

    nlohmann::json build_request(const std::vector<std::pair<std::string, std::string>>& messages) const;

private:
    nlohmann::json send(const nlohmann::json& request, bool& timed_out_before);

    LlmEndpointConfig config_;
    std::shared_ptr<Transport> transport_;
};

std::string chat_content(const nlohmann::json& response);

}  // namespace pokeai::policies
