#include "policies/policies.hpp"

#include <cstdlib>
#include <istream>
#include <ostream>
#include <thread>

namespace pokeai::policies {

using namespace battle;
using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

long elapsed_ms(Clock::time_point start) {
    return static_cast<long>(std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start).count());
}

PolicyDecision make_decision(const Action& a, const BattleState& state, DecisionSource source) {
    PolicyDecision d;
    d.request = agent_io::to_request(a, state);
    d.action = a;
    d.source = source;
    return d;
}

const char* env(const char* name) {
    const char* v = std::getenv(name);
    return v && *v ? v : nullptr;
}

}  // namespace

std::string_view source_name(DecisionSource source) {
    switch (source) {
        case DecisionSource::Random: return "random";
        case DecisionSource::Heuristic: return "heuristic";
        case DecisionSource::Human: return "human";
        case DecisionSource::Llm: return "llm";
        case DecisionSource::Fallback: return "fallback";
    }
    return "random";
}

std::string_view failure_name(FailureKind kind) {
    switch (kind) {
        case FailureKind::Parse: return "parse";
        case FailureKind::Invalid: return "invalid";
        case FailureKind::Transport: return "transport";
    }
    return "parse";
}

PolicyDecision random_policy(const ActionSet& valid, const BattleState& state, Rng& rng) {
    expects(!valid.empty(), "random_policy needs a non-empty valid set");
    const int i = rng.uniform_int(0, static_cast<int>(valid.size()) - 1);
    return make_decision(valid[static_cast<std::size_t>(i)], state, DecisionSource::Random);
}

double expected_damage(const BattleEngine& engine, const Monster& attacker, const Monster& defender,
                       const MoveSpec& move) {
    if (!move.is_damaging()) return 0.0;
    const double stab = attacker.species->has_type(move.type) ? 1.5 : 1.0;
    const double eff = engine.type_effectiveness(move.type, defender.species->type1, defender.species->type2);
    const double acc = move.accuracy.value_or(100) / 100.0;
    return move.power * stab * eff * acc;
}

PolicyDecision heuristic_policy(const BattleEngine& engine, const BattleState& state, const ActionSet& valid) {
    expects(!valid.empty(), "heuristic_policy needs a non-empty valid set");
    const Monster& active = state.active_monster();

    if (!state.forced_switch_pending && active.current_hp * 100 < active.max_hp() * kHeuristicPotionPercent) {
        for (const Action& a : valid) {
            const auto* item = std::get_if<action::UseItem>(&a);
            if (item && item->target == state.active) return make_decision(a, state, DecisionSource::Heuristic);
        }
    }

    const Action* best = nullptr;
    double best_score = -1.0;
    for (const Action& a : valid) {
        const auto* m = std::get_if<action::UseMove>(&a);
        if (!m) continue;
        const MoveSpec& move = *active.moves.at(static_cast<std::size_t>(m->slot)).move;
        if (!move.is_damaging()) continue;
        const double s = expected_damage(engine, active, state.enemy, move);
        if (s > best_score) {
            best_score = s;
            best = &a;
        }
    }
    if (best) return make_decision(*best, state, DecisionSource::Heuristic);

    for (const Action& a : valid) {
        if (std::holds_alternative<action::Struggle>(a)) return make_decision(a, state, DecisionSource::Heuristic);
    }
    return make_decision(valid.front(), state, DecisionSource::Heuristic);
}

PolicyDecision RandomPolicy::decide(const DecisionContext& ctx, Rng& rng) {
    const auto start = Clock::now();
    PolicyDecision d = random_policy(ctx.valid, ctx.state, rng);
    d.latency_ms = elapsed_ms(start);
    return d;
}

PolicyDecision HeuristicPolicy::decide(const DecisionContext& ctx, Rng&) {
    const auto start = Clock::now();
    PolicyDecision d = heuristic_policy(ctx.engine, ctx.state, ctx.valid);
    d.latency_ms = elapsed_ms(start);
    return d;
}

PolicyDecision MemoryAwarePolicy::decide(const DecisionContext& ctx, Rng&) {
    const auto start = Clock::now();
    const bool run_valid = std::find(ctx.valid.begin(), ctx.valid.end(), Action{action::Run{}}) != ctx.valid.end();
    PolicyDecision d = memory::memory_aware_rule(ctx.state, ctx.recalled, run_valid)
                           ? make_decision(action::Run{}, ctx.state, DecisionSource::Heuristic)
                           : heuristic_policy(ctx.engine, ctx.state, ctx.valid);
    d.latency_ms = elapsed_ms(start);
    return d;
}

PolicyDecision HumanPolicy::decide(const DecisionContext& ctx, Rng&) {
    const auto start = Clock::now();
    out_ << "\n" << ctx.prompt.user << "\n\nChoose an action:\n";
    for (std::size_t i = 0; i < ctx.valid.size(); ++i)
        out_ << "  " << (i + 1) << ". " << agent_io::action_label(ctx.valid[i], ctx.state) << "\n";

    PolicyDecision d;
    std::string line;
    for (;;) {
        out_ << "> " << std::flush;
        if (!std::getline(in_, line)) throw Error(ErrorCode::InputClosed, "input closed before an action was chosen");
        int choice = 0;
        try {
            std::size_t used = 0;
            choice = std::stoi(line, &used);
            if (line.find_first_not_of(" \t\r", used) != std::string::npos) choice = 0;
        } catch (const std::exception&) {
            choice = 0;
        }
        if (choice >= 1 && choice <= static_cast<int>(ctx.valid.size())) break;
        out_ << "Please enter a number from 1 to " << ctx.valid.size() << ".\n";
        d.invalid_attempts.push_back({line, "not a menu entry", FailureKind::Parse});
    }
    const Action& a = ctx.valid[static_cast<std::size_t>(std::stoi(line) - 1)];
    d.request = agent_io::to_request(a, ctx.state);
    d.request.raw_text = line;
    d.action = a;
    d.source = DecisionSource::Human;
    d.latency_ms = elapsed_ms(start);
    return d;
}

void LlmEndpointConfig::apply_environment() {
    if (const char* v = env("POKEAI_LLM_BASE_URL")) base_url = v;
    if (const char* v = env("POKEAI_LLM_MODEL")) model_name = v;
    if (const char* v = env("POKEAI_LLM_API_KEY")) api_key = v;
}

LlmPolicy::LlmPolicy(LlmEndpointConfig config, std::shared_ptr<Transport> transport)
    : config_(std::move(config)), transport_(std::move(transport)) {
    if (!transport_) throw Error(ErrorCode::InvalidArgument, "LLM policy needs a transport");
    if (config_.timeout_ms <= 0) throw Error(ErrorCode::InvalidArgument, "timeout_ms must be positive");
    if (config_.max_retries < 0 || config_.max_retries > kMaxPolicyRetries)
        throw Error(ErrorCode::InvalidArgument, "max_retries must be between 0 and 3");
}

json LlmPolicy::build_request(const std::vector<std::pair<std::string, std::string>>& messages) const {
    json msgs = json::array();
    for (const auto& [role, content] : messages) msgs.push_back({{"role", role}, {"content", content}});
    return {{"model", config_.model_name}, {"temperature", config_.temperature}, {"messages", msgs}};
}

std::string chat_content(const json& response) {
    const json* content = nullptr;
    if (response.is_object() && response.contains("choices") && response["choices"].is_array() &&
        !response["choices"].empty()) {
        const json& choice = response["choices"][0];
        if (choice.is_object() && choice.contains("message") && choice["message"].is_object() &&
            choice["message"].contains("content"))
            content = &choice["message"]["content"];
    }
    if (!content) throw Error(ErrorCode::Endpoint, "chat response has no choices[0].message.content");
    if (content->is_null()) return "";
    if (!content->is_string()) throw Error(ErrorCode::Endpoint, "chat response content is not text");
    return content->get<std::string>();
}

json LlmPolicy::send(const json& request, bool& timed_out_before) {
    for (;;) {
        try {
            return transport_->complete(request);
        } catch (const TransientTransportError&) {
            if (timed_out_before) throw;
            timed_out_before = true;
            if (config_.backoff_ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(config_.backoff_ms));
        }
    }
}

PolicyDecision LlmPolicy::decide(const DecisionContext& ctx, Rng& rng) {
    const auto start = Clock::now();
    std::vector<std::pair<std::string, std::string>> messages = {{"system", ctx.prompt.system},
                                                                 {"user", ctx.prompt.user}};
    std::vector<InvalidAttempt> attempts;
    bool timed_out_before = false;

    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        json response;
        try {
            response = send(build_request(messages), timed_out_before);
        } catch (const TransientTransportError& e) {
            attempts.push_back({"", e.what(), FailureKind::Transport});
            break;
        }
        const std::string content = chat_content(response);
        std::string error;
        bool parse_failed = false;
        try {
            agent_io::ActionRequest req = agent_io::parse_action(content);
            const Action a = agent_io::validate_action(req, ctx.valid, ctx.state);
            PolicyDecision d;
            d.request = std::move(req);
            d.action = a;
            d.source = DecisionSource::Llm;
            d.retries_used = attempt;
            d.invalid_attempts = std::move(attempts);
            d.latency_ms = elapsed_ms(start);
            return d;
        } catch (const agent_io::ParseError& e) {
            error = e.what();
            parse_failed = true;
        } catch (const agent_io::InvalidActionError& e) {
            error = e.what();
        }
        attempts.push_back({content, error, parse_failed ? FailureKind::Parse : FailureKind::Invalid});
        messages.emplace_back("assistant", content);
        messages.emplace_back("user", "Your previous answer was rejected: " + error +
                                          ". Reply with exactly one JSON object copied from the valid actions list.");
    }

    PolicyDecision d = random_policy(ctx.valid, ctx.state, rng);
    d.source = DecisionSource::Fallback;
    d.retries_used = std::min(static_cast<int>(attempts.size()), config_.max_retries);
    d.invalid_attempts = std::move(attempts);
    d.latency_ms = elapsed_ms(start);
    return d;
}

}  // namespace pokeai::policies
