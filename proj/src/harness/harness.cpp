#include "harness/harness.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "battle/serialize.hpp"
#include "common/clock.hpp"
#include "common/json_util.hpp"

namespace pokeai::harness {

using namespace battle;
using nlohmann::json;
namespace fs = std::filesystem;
namespace ju = json_util;

namespace {

constexpr std::array<const char*, kCategoryCount> kCategoryNames = {"damaging_move", "status_move", "switch",
                                                                    "item",          "run",         "invalid"};

const char* const kPilotText = "Level 5 Squirtle was defeated by a Level 8 Pikachu in Viridian Forest.";

template <class T>
void take(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

ActionCategory categorize(const Action& a, const Monster& active) {
    if (const auto* m = std::get_if<action::UseMove>(&a))
        return active.moves.at(static_cast<std::size_t>(m->slot)).move->is_damaging() ? ActionCategory::DamagingMove
                                                                                       : ActionCategory::StatusMove;
    if (std::holds_alternative<action::Struggle>(a)) return ActionCategory::DamagingMove;
    if (std::holds_alternative<action::Switch>(a)) return ActionCategory::Switch;
    if (std::holds_alternative<action::UseItem>(a)) return ActionCategory::Item;
    return ActionCategory::Run;
}

json wire_json(const agent_io::ActionRequest& req) { return json::parse(agent_io::to_wire(req)); }

void strip_volatile(json& j) {
    if (j.is_object()) {
        j.erase("timestamp");
        j.erase("latency_ms");
        j.erase("run_id");
        for (auto& [k, v] : j.items()) strip_volatile(v);
    } else if (j.is_array()) {
        for (auto& v : j) strip_volatile(v);
    }
}

void write_line(std::ostream& log, json line) {
    line["timestamp"] = utc_timestamp();
    log << line.dump() << "\n" << std::flush;
}

std::string percent(double fraction) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(1) << fraction * 100.0 << "%";
    return os.str();
}

json monster_brief(const Monster& m) {
    return {{"species", m.name()}, {"level", m.level}, {"hp", m.current_hp}, {"max_hp", m.max_hp()}};
}

}  // namespace

std::string_view policy_name(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::Random: return "random";
        case PolicyKind::Heuristic: return "heuristic";
        case PolicyKind::MemoryAware: return "memory-aware";
        case PolicyKind::Human: return "human";
        case PolicyKind::Llm: return "llm";
    }
    return "random";
}

std::optional<PolicyKind> parse_policy(std::string_view name) {
    for (PolicyKind k : {PolicyKind::Random, PolicyKind::Heuristic, PolicyKind::MemoryAware, PolicyKind::Human,
                         PolicyKind::Llm})
        if (policy_name(k) == name) return k;
    return std::nullopt;
}

std::string RunConfig::effective_run_id() const {
    if (!run_id.empty()) return run_id;
    return std::string(policy_name(policy)) + "-" + mask_name(mask) + "-seed" + std::to_string(seed);
}

void RunConfig::validate() const {
    auto bad = [](const std::string& why) { throw Error(ErrorCode::InvalidArgument, why); };
    if (battles_per_run < 1) bad("battles_per_run must be at least 1");
    if (repetitions < 1) bad("repetitions must be at least 1");
    if (jobs < 1) bad("jobs must be at least 1");
    if (memory.k < 1) bad("memory.k must be at least 1");
    if (memory.enabled && memory.store_path.empty()) bad("memory.store_path is required when memory is enabled");
    if (policy == PolicyKind::Human && jobs != 1) bad("the human policy cannot run repetitions in parallel");
    if (policy == PolicyKind::Llm) {
        if (transport != policies::TransportMode::Live && cassette.empty())
            bad("record and replay transports need a cassette path");
        if (llm.timeout_ms <= 0) bad("llm.timeout_ms must be positive");
        if (llm.max_retries < 0 || llm.max_retries > policies::kMaxPolicyRetries)
            bad("llm.max_retries must be between 0 and 3");
    }
}

battle::AblationMask mask_from_name(std::string_view name) {
    if (name == "full") return {true, true, true};
    if (name == "no-escape") return {true, true, false};
    if (name == "no-switch") return {false, true, true};
    if (name == "no-item") return {true, false, true};
    throw Error(ErrorCode::InvalidArgument,
                "unknown mask '" + std::string(name) + "' (expected full, no-escape, no-switch or no-item)");
}

std::string mask_name(const battle::AblationMask& m) {
    if (m.allow_strategic_switch && m.allow_item && m.allow_escape) return "full";
    if (m.allow_strategic_switch && m.allow_item && !m.allow_escape) return "no-escape";
    if (!m.allow_strategic_switch && m.allow_item && m.allow_escape) return "no-switch";
    if (m.allow_strategic_switch && !m.allow_item && m.allow_escape) return "no-item";
    std::string out = "custom";
    if (!m.allow_strategic_switch) out += "-noswitch";
    if (!m.allow_item) out += "-noitem";
    if (!m.allow_escape) out += "-noescape";
    return out;
}

RunConfig config_from_json(const json& j, RunConfig c) {
    if (!j.is_object()) throw DataError("run config must be a JSON object");
    static const std::set<std::string> known = {"seed",     "battles_per_run", "repetitions", "policy",
                                                "mask",     "data_dir",        "checkpoint",  "encounters",
                                                "prompt",   "output_dir",      "run_id",      "jobs",
                                                "cassette", "transport",       "llm",         "memory"};
    for (const auto& [key, value] : j.items())
        if (!known.count(key)) throw DataError("run config: unknown key '" + key + "'");
    try {
        take(j, "seed", c.seed);
        take(j, "battles_per_run", c.battles_per_run);
        take(j, "repetitions", c.repetitions);
        take(j, "data_dir", c.data_dir);
        take(j, "checkpoint", c.checkpoint);
        take(j, "encounters", c.encounters);
        take(j, "prompt", c.prompt);
        take(j, "output_dir", c.output_dir);
        take(j, "run_id", c.run_id);
        take(j, "jobs", c.jobs);
        take(j, "cassette", c.cassette);
        if (j.contains("policy")) {
            const auto p = parse_policy(j["policy"].get<std::string>());
            if (!p) throw DataError("run config: unknown policy '" + j["policy"].get<std::string>() + "'");
            c.policy = *p;
        }
        if (j.contains("transport")) {
            const auto t = policies::parse_mode(j["transport"].get<std::string>());
            if (!t) throw DataError("run config: unknown transport '" + j["transport"].get<std::string>() + "'");
            c.transport = *t;
        }
        if (j.contains("mask")) {
            const json& m = j["mask"];
            if (m.is_string()) {
                c.mask = mask_from_name(m.get<std::string>());
            } else {
                take(m, "allow_strategic_switch", c.mask.allow_strategic_switch);
                take(m, "allow_item", c.mask.allow_item);
                take(m, "allow_escape", c.mask.allow_escape);
            }
        }
        if (j.contains("llm")) {
            const json& l = j["llm"];
            if (l.contains("api_key"))
                throw DataError("run config: llm.api_key is not read from files; set POKEAI_LLM_API_KEY");
            take(l, "base_url", c.llm.base_url);
            take(l, "model", c.llm.model_name);
            take(l, "timeout_ms", c.llm.timeout_ms);
            take(l, "max_retries", c.llm.max_retries);
            take(l, "temperature", c.llm.temperature);
            take(l, "backoff_ms", c.llm.backoff_ms);
            take(l, "max_in_flight", c.llm.max_in_flight);
        }
        if (j.contains("memory")) {
            const json& m = j["memory"];
            take(m, "enabled", c.memory.enabled);
            take(m, "store_path", c.memory.store_path);
            take(m, "k", c.memory.k);
            take(m, "record_losses", c.memory.record_losses);
        }
    } catch (const json::exception& e) {
        throw DataError(std::string("run config: ") + e.what());
    }
    return c;
}

RunConfig load_config(const fs::path& path, RunConfig base) { return config_from_json(ju::read_file(path), base); }

json to_json(const RunConfig& c) {
    return {{"seed", c.seed},
            {"battles_per_run", c.battles_per_run},
            {"repetitions", c.repetitions},
            {"policy", policy_name(c.policy)},
            {"mask",
             {{"allow_strategic_switch", c.mask.allow_strategic_switch},
              {"allow_item", c.mask.allow_item},
              {"allow_escape", c.mask.allow_escape}}},
            {"data_dir", c.data_dir},
            {"checkpoint", c.checkpoint},
            {"encounters", c.encounters},
            {"prompt", c.prompt},
            {"output_dir", c.output_dir},
            {"run_id", c.effective_run_id()},
            {"jobs", c.jobs},
            {"cassette", c.cassette},
            {"transport", policies::mode_name(c.transport)},
            {"llm",
             {{"base_url", c.llm.base_url},
              {"model", c.llm.model_name},
              {"timeout_ms", c.llm.timeout_ms},
              {"max_retries", c.llm.max_retries},
              {"temperature", c.llm.temperature},
              {"backoff_ms", c.llm.backoff_ms},
              {"max_in_flight", c.llm.max_in_flight}}},
            {"memory",
             {{"enabled", c.memory.enabled},
              {"store_path", c.memory.store_path},
              {"k", c.memory.k},
              {"record_losses", c.memory.record_losses}}}};
}

std::string_view battle_outcome_name(BattleOutcome o) {
    switch (o) {
        case BattleOutcome::Win: return "win";
        case BattleOutcome::Loss: return "loss";
        case BattleOutcome::Escaped: return "escaped";
        case BattleOutcome::Forfeit: return "forfeit_remaining";
    }
    return "win";
}

std::string_view category_name(ActionCategory c) { return kCategoryNames[static_cast<std::size_t>(c)]; }

int EpisodeResult::count(BattleOutcome o) const {
    return static_cast<int>(std::count(outcomes.begin(), outcomes.end(), o));
}

std::array<double, kCategoryCount> action_distribution(const ActionCounts& counts) {
    std::array<double, kCategoryCount> out{};
    long total = 0;
    for (long c : counts) total += c;
    if (total == 0) return out;
    for (std::size_t i = 0; i < kCategoryCount; ++i) out[i] = static_cast<double>(counts[i]) / total;
    return out;
}

double AggregateMetrics::win_rate_percent() const {
    long total = 0;
    for (int w : wins_per_repetition) total += w;
    const long denom = static_cast<long>(wins_per_repetition.size()) * battles_per_run;
    return denom == 0 ? 0.0 : static_cast<double>(total * 100) / static_cast<double>(denom);
}

AggregateMetrics aggregate_wins(const std::vector<int>& wins, int battles_per_run) {
    if (wins.empty()) throw Error(ErrorCode::InvalidArgument, "no repetitions to aggregate");
    if (battles_per_run < 1) throw Error(ErrorCode::InvalidArgument, "battles_per_run must be at least 1");
    AggregateMetrics m;
    m.repetitions = static_cast<int>(wins.size());
    m.battles_per_run = battles_per_run;
    m.wins_per_repetition = wins;
    long total = 0;
    for (int w : wins) total += w;
    const double n = static_cast<double>(wins.size());
    m.mean_win_rate = static_cast<double>(total) / (n * battles_per_run);
    if (wins.size() > 1) {
        double ss = 0.0;
        for (int w : wins) {
            const double d = static_cast<double>(w) / battles_per_run - m.mean_win_rate;
            ss += d * d;
        }
        m.sem = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
    }
    return m;
}

AggregateMetrics aggregate(const std::vector<EpisodeResult>& episodes, int battles_per_run) {
    std::vector<int> wins;
    for (const auto& e : episodes) wins.push_back(e.wins());
    AggregateMetrics m = aggregate_wins(wins, battles_per_run);
    auto& t = m.totals;
    for (const char* k : {"wins", "losses", "escaped", "forfeit_remaining", "potions_used", "strategic_switches",
                          "forced_switches", "escapes_attempted", "escapes_succeeded", "invalid_actions",
                          "fallback_decisions", "decisions", "battle_turns"})
        t[k] = 0;
    for (const auto& e : episodes) {
        t["wins"] += e.count(BattleOutcome::Win);
        t["losses"] += e.count(BattleOutcome::Loss);
        t["escaped"] += e.count(BattleOutcome::Escaped);
        t["forfeit_remaining"] += e.count(BattleOutcome::Forfeit);
        t["potions_used"] += e.potions_used;
        t["strategic_switches"] += e.strategic_switches;
        t["forced_switches"] += e.forced_switches;
        t["escapes_attempted"] += e.escapes_attempted;
        t["escapes_succeeded"] += e.escapes_succeeded;
        t["invalid_actions"] += e.invalid_actions;
        t["fallback_decisions"] += e.fallback_decisions;
        for (std::size_t i = 0; i < kCategoryCount; ++i) {
            m.action_counts[i] += e.action_counts[i];
            if (i != static_cast<std::size_t>(ActionCategory::Invalid)) t["decisions"] += e.action_counts[i];
        }
        for (int turns : e.turns) t["battle_turns"] += turns;
    }
    m.action_distribution = action_distribution(m.action_counts);
    return m;
}

json AggregateMetrics::to_json() const {
    json counts = json::object(), dist = json::object();
    for (std::size_t i = 0; i < kCategoryCount; ++i) {
        counts[kCategoryNames[i]] = action_counts[i];
        dist[kCategoryNames[i]] = action_distribution[i];
    }
    return {{"repetitions", repetitions},
            {"battles_per_run", battles_per_run},
            {"wins_per_repetition", wins_per_repetition},
            {"mean_win_rate", mean_win_rate},
            {"win_rate_percent", win_rate_percent()},
            {"sem", sem},
            {"sem_percent", sem * 100.0},
            {"action_counts", counts},
            {"action_distribution", dist},
            {"totals", totals}};
}

RunContext RunContext::load(const RunConfig& config) {
    config.validate();
    RunContext ctx;
    ctx.data = GameData::load(config.data_dir);
    ctx.engine = std::make_shared<const BattleEngine>(ctx.data);
    ctx.checkpoint = scenario::load_checkpoint(config.checkpoint, *ctx.data);
    ctx.encounters = scenario::load_encounter_table(config.encounters, *ctx.data);
    ctx.prompt = agent_io::PromptTemplate::load(config.prompt);
    if (config.memory.enabled) ctx.memory = std::make_shared<memory::MemoryStore>(config.memory.store_path);
    if (config.policy == PolicyKind::Llm) {
        policies::LlmEndpointConfig llm = config.llm;
        llm.apply_environment();
        if (config.transport != policies::TransportMode::Replay && llm.base_url.empty())
            throw Error(ErrorCode::InvalidArgument, "LLM policy needs a base URL (llm.base_url or POKEAI_LLM_BASE_URL)");
        ctx.transport = policies::make_transport(config.transport, config.cassette, llm.live_options());
    }
    return ctx;
}

std::vector<ScheduledEncounter> encounter_schedule(const RunConfig& config, const RunContext& ctx, int repetition) {
    Rng rng(Rng::derive_seed(config.seed, streams::kEncounter, static_cast<std::uint64_t>(repetition)));
    std::vector<ScheduledEncounter> out;
    out.reserve(static_cast<std::size_t>(config.battles_per_run));
    for (int b = 0; b < config.battles_per_run; ++b) {
        const auto enc = scenario::sample_encounter(ctx.encounters, rng);
        out.push_back({enc.species, enc.level, scenario::spawn_wild(*enc.species, enc.level, rng)});
    }
    return out;
}

PolicyFactory default_policy_factory(const RunConfig& config, const RunContext& ctx) {
    const PolicyKind kind = config.policy;
    policies::LlmEndpointConfig llm = config.llm;
    llm.apply_environment();
    if (config.transport == policies::TransportMode::Replay) llm.backoff_ms = 0;
    auto transport = ctx.transport;
    return [kind, llm, transport](int) -> std::unique_ptr<policies::Policy> {
        switch (kind) {
            case PolicyKind::Random: return std::make_unique<policies::RandomPolicy>();
            case PolicyKind::Heuristic: return std::make_unique<policies::HeuristicPolicy>();
            case PolicyKind::MemoryAware: return std::make_unique<policies::MemoryAwarePolicy>();
            case PolicyKind::Human: return std::make_unique<policies::HumanPolicy>(std::cin, std::cout);
            case PolicyKind::Llm: return std::make_unique<policies::LlmPolicy>(llm, transport);
        }
        throw Error(ErrorCode::InvalidArgument, "unknown policy");
    };
}

EpisodeResult run_gauntlet(const RunConfig& config, const RunContext& ctx, policies::Policy& policy, int repetition,
                           std::ostream& log) {
    const BattleEngine& engine = *ctx.engine;
    const auto rep = static_cast<std::uint64_t>(repetition);
    Rng battle_rng(Rng::derive_seed(config.seed, streams::kBattle, rep));
    Rng policy_rng(Rng::derive_seed(config.seed, streams::kPolicy, rep));
    const auto schedule = encounter_schedule(config, ctx, repetition);
    const int turn_limit = ctx.data->mechanics().turn_limit;

    EpisodeResult result;
    result.repetition = repetition;
    std::vector<Monster> party = ctx.checkpoint.party;
    Bag bag = ctx.checkpoint.bag;

    for (int b = 0; b < config.battles_per_run; ++b) {
        const bool wiped = std::all_of(party.begin(), party.end(), [](const Monster& m) { return m.fainted(); });
        if (wiped) {
            result.outcomes.push_back(BattleOutcome::Forfeit);
            result.turns.push_back(0);
            write_line(log, {{"type", "battle_end"},
                             {"repetition", repetition},
                             {"battle", b + 1},
                             {"outcome", battle_outcome_name(BattleOutcome::Forfeit)},
                             {"turns", 0}});
            continue;
        }

        BattleState state = scenario::begin_battle(party, bag, schedule[static_cast<std::size_t>(b)].monster);
        json party_json = json::array();
        for (const auto& m : state.party) party_json.push_back(monster_brief(m));
        write_line(log, {{"type", "battle_start"},
                         {"repetition", repetition},
                         {"battle", b + 1},
                         {"location", ctx.encounters.location},
                         {"enemy", battle::to_json(state.enemy)},
                         {"party", party_json},
                         {"potions", state.bag.count(ItemKind::Potion)}});

        agent_io::HistoryWindow history;
        int decisions = 0;
        Monster last_active = state.active_monster();
        while (state.outcome == Outcome::Ongoing) {
            if (++decisions > turn_limit)
                throw Error(ErrorCode::Deadlock, "battle " + std::to_string(b + 1) + " of repetition " +
                                                     std::to_string(repetition) + " exceeded " +
                                                     std::to_string(turn_limit) + " decisions");
            const ActionSet valid = engine.valid_actions(state, config.mask);
            std::vector<memory::MemoryRecord> recalled;
            if (ctx.memory) {
                for (auto& s : ctx.memory->retrieve(
                         {memory::entities_for(state, ctx.encounters.location), config.memory.k}))
                    recalled.push_back(std::move(s.record));
            }
            const auto snippets = memory::format_snippets(recalled);
            const agent_io::Prompt prompt =
                agent_io::serialize_state(ctx.prompt, engine, state, history, snippets, config.mask);
            const std::string digest = state_digest(state);

            policies::PolicyDecision decision =
                policy.decide({engine, state, valid, prompt, recalled}, policy_rng);
            if (std::find(valid.begin(), valid.end(), decision.action) == valid.end())
                throw ContractViolation("policy returned an action outside the valid set");

            for (const auto& attempt : decision.invalid_attempts) {
                if (attempt.kind == policies::FailureKind::Transport) continue;
                ++result.invalid_actions;
                ++result.action_counts[static_cast<std::size_t>(ActionCategory::Invalid)];
                write_line(log, {{"type", "invalid_action"},
                                 {"repetition", repetition},
                                 {"battle", b + 1},
                                 {"decision", decisions},
                                 {"failure", policies::failure_name(attempt.kind)},
                                 {"error", attempt.error},
                                 {"raw_text", attempt.raw_text}});
            }
            if (decision.source == policies::DecisionSource::Fallback) ++result.fallback_decisions;

            const ActionCategory category = categorize(decision.action, state.active_monster());
            ++result.action_counts[static_cast<std::size_t>(category)];

            const Action enemy_action =
                state.forced_switch_pending ? Action{action::Struggle{}} : engine.enemy_policy(state, battle_rng);
            const BattleState before = state;
            const TurnEvents events = engine.resolve_turn(state, decision.action, enemy_action, battle_rng);
            agent_io::record_round(history, before, events);

            for (const auto& e : events) {
                if (std::holds_alternative<event::ItemUsed>(e)) ++result.potions_used;
                if (const auto* s = std::get_if<event::Switched>(&e))
                    ++(s->forced ? result.forced_switches : result.strategic_switches);
                if (const auto* x = std::get_if<event::EscapeAttempt>(&e)) {
                    ++result.escapes_attempted;
                    result.escapes_succeeded += x->success;
                }
            }
            if (!state.forced_switch_pending && !state.party_wiped()) last_active = state.active_monster();

            write_line(log, {{"type", "decision"},
                             {"repetition", repetition},
                             {"battle", b + 1},
                             {"decision", decisions},
                             {"turn", state.turn_number},
                             {"state_digest", digest},
                             {"prompt_hash", prompt.hash()},
                             {"action", wire_json(agent_io::to_request(decision.action, before))},
                             {"raw_text", decision.request.raw_text},
                             {"category", category_name(category)},
                             {"source", policies::source_name(decision.source)},
                             {"retries", decision.retries_used},
                             {"latency_ms", decision.latency_ms},
                             {"events", battle::to_json(events)}});
        }

        BattleOutcome outcome = BattleOutcome::Win;
        if (state.outcome == Outcome::Loss) outcome = BattleOutcome::Loss;
        else if (state.outcome == Outcome::Escaped) outcome = BattleOutcome::Escaped;
        result.outcomes.push_back(outcome);
        result.turns.push_back(state.turn_number);
        party = state.party;
        bag = state.bag;
        json end_party = json::array();
        for (const auto& m : party) end_party.push_back(monster_brief(m));
        write_line(log, {{"type", "battle_end"},
                         {"repetition", repetition},
                         {"battle", b + 1},
                         {"outcome", battle_outcome_name(outcome)},
                         {"turns", state.turn_number},
                         {"party", end_party},
                         {"potions", bag.count(ItemKind::Potion)}});

        if (outcome == BattleOutcome::Loss && ctx.memory && config.memory.record_losses) {
            memory::MemoryRecord r;
            r.text = "Level " + std::to_string(last_active.level) + " " + last_active.name() +
                     " was defeated by a Level " + std::to_string(state.enemy.level) + " " + state.enemy.name() +
                     " in " + ctx.encounters.location + ".";
            r.entities = {last_active.name(), last_active.level, state.enemy.name(), state.enemy.level,
                          ctx.encounters.location};
            r.outcome = memory::RecordOutcome::Lost;
            ctx.memory->insert(r);
        }
    }
    result.final_party = party;
    result.final_bag = bag;
    return result;
}

namespace {

void write_summary_csv(const fs::path& path, const std::vector<EpisodeResult>& episodes, int battles) {
    std::ostringstream os;
    os << "repetition,wins,losses,escaped,forfeit_remaining,win_rate,potions_used,strategic_switches,"
          "forced_switches,escapes_attempted,escapes_succeeded,invalid_actions,fallback_decisions\n";
    for (const auto& e : episodes) {
        os << e.repetition << "," << e.wins() << "," << e.count(BattleOutcome::Loss) << ","
           << e.count(BattleOutcome::Escaped) << "," << e.count(BattleOutcome::Forfeit) << ","
           << static_cast<double>(e.wins()) / battles << "," << e.potions_used << "," << e.strategic_switches << ","
           << e.forced_switches << "," << e.escapes_attempted << "," << e.escapes_succeeded << ","
           << e.invalid_actions << "," << e.fallback_decisions << "\n";
    }
    ju::write_file(path, os.str());
}

}  // namespace

RunOutput repeat_and_aggregate(const RunConfig& config, const RunContext& ctx, const PolicyFactory& factory) {
    config.validate();
    RunOutput out;
    out.run_dir = config.run_dir();
    fs::create_directories(out.run_dir);
    ju::write_file(out.run_dir / "config.json", to_json(config).dump(2) + "\n");

    const int reps = config.repetitions;
    std::vector<fs::path> parts;
    for (int r = 0; r < reps; ++r) parts.push_back(out.run_dir / ("turns.rep-" + std::to_string(r) + ".part"));
    std::vector<std::optional<EpisodeResult>> results(static_cast<std::size_t>(reps));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(reps));
    std::atomic<int> next{0};

    auto worker = [&] {
        for (int r = next++; r < reps; r = next++) {
            const auto i = static_cast<std::size_t>(r);
            std::ofstream log(parts[i], std::ios::trunc);
            try {
                if (!log) throw IoError("cannot write " + parts[i].string());
                auto policy = factory(r);
                results[i] = run_gauntlet(config, ctx, *policy, r, log);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const int threads = std::min(config.jobs, reps);
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    // Merge per-repetition logs in repetition order, even after a failure.
    {
        std::ofstream turns(out.run_dir / "turns.jsonl", std::ios::trunc);
        for (const auto& p : parts) {
            std::ifstream in(p);
            if (in) turns << in.rdbuf();
            in.close();
            std::error_code ec;
            fs::remove(p, ec);
        }
        if (!turns.flush()) throw IoError("cannot write " + (out.run_dir / "turns.jsonl").string());
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    for (auto& r : results) out.episodes.push_back(std::move(*r));
    out.metrics = aggregate(out.episodes, config.battles_per_run);
    json metrics = out.metrics.to_json();
    metrics["run_id"] = config.effective_run_id();
    metrics["policy"] = policy_name(config.policy);
    metrics["mask"] = mask_name(config.mask);
    metrics["seed"] = config.seed;
    ju::write_file(out.run_dir / "metrics.json", metrics.dump(2) + "\n");
    write_summary_csv(out.run_dir / "summary.csv", out.episodes, config.battles_per_run);
    return out;
}

RunOutput run_eval(const RunConfig& config) {
    const RunContext ctx = RunContext::load(config);
    return repeat_and_aggregate(config, ctx, default_policy_factory(config, ctx));
}

std::vector<AblationRow> ablation_sweep(const RunConfig& base) {
    const RunContext ctx = RunContext::load(base);
    std::vector<AblationRow> rows;
    for (const char* variant : {"full", "no-escape", "no-switch", "no-item"}) {
        RunConfig c = base;
        c.mask = mask_from_name(variant);
        c.output_dir = base.run_dir().string();
        c.run_id = variant;
        const RunOutput out = repeat_and_aggregate(c, ctx, default_policy_factory(c, ctx));
        rows.push_back({variant, c.mask, out.metrics});
    }
    std::ostringstream csv;
    csv << "variant,mean_win_rate,sem,potions_used,strategic_switches,forced_switches,escapes_attempted\n";
    for (const auto& r : rows) {
        csv << r.variant << "," << r.metrics.mean_win_rate << "," << r.metrics.sem << ","
            << r.metrics.totals.at("potions_used") << "," << r.metrics.totals.at("strategic_switches") << ","
            << r.metrics.totals.at("forced_switches") << "," << r.metrics.totals.at("escapes_attempted") << "\n";
    }
    ju::write_file(base.run_dir() / "ablation.csv", csv.str());
    return rows;
}

std::string ablation_table(const std::vector<AblationRow>& rows) {
    std::ostringstream os;
    os << std::left << std::setw(11) << "variant" << std::setw(10) << "win rate" << std::setw(9) << "SEM"
       << std::setw(9) << "potions" << std::setw(10) << "switches" << std::setw(8) << "forced" << "runs\n";
    for (const auto& r : rows) {
        os << std::left << std::setw(11) << r.variant << std::setw(10) << percent(r.metrics.mean_win_rate)
           << std::setw(9) << percent(r.metrics.sem) << std::setw(9) << r.metrics.totals.at("potions_used")
           << std::setw(10) << r.metrics.totals.at("strategic_switches") << std::setw(8)
           << r.metrics.totals.at("forced_switches") << r.metrics.totals.at("escapes_attempted") << "\n";
    }
    return os.str();
}

std::string canonical_jsonl(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    std::string line, out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded()) throw DataError(path.string() + ": malformed JSON line");
        strip_volatile(j);
        out += j.dump() + "\n";
    }
    return out;
}

std::string canonical_json_file(const fs::path& path) {
    json j = ju::read_file(path);
    strip_volatile(j);
    return j.dump();
}

PilotResult run_pilot_memory(const PilotConfig& config) {
    const fs::path data_dir = config.data_dir;
    const auto data = GameData::load(data_dir);
    const BattleEngine engine(data);
    const auto tmpl = agent_io::PromptTemplate::load(config.prompt);

    fs::path store_path = config.store_path;
    if (store_path.empty()) {
        store_path = fs::path(config.output_dir) / "pilot-memory" / "memory.jsonl";
        std::error_code ec;
        fs::remove(store_path, ec);
    }
    memory::MemoryStore store(store_path);

    memory::MemoryRecord pilot;
    pilot.text = kPilotText;
    pilot.entities = {"Squirtle", 5, "Pikachu", 8, "Viridian Forest"};
    pilot.outcome = memory::RecordOutcome::Lost;

    PilotResult result;
    result.pilot_id = store.insert(pilot);

    const auto cp = scenario::load_checkpoint(data_dir / "checkpoints" / "viridian_pilot.json", *data);
    const auto table = scenario::load_encounter_table(data_dir / "encounters" / "viridian_forest_pilot.json", *data);
    Rng encounter_rng(Rng::derive_seed(config.seed, streams::kEncounter, 0));
    const auto enc = scenario::sample_encounter(table, encounter_rng);
    BattleState state = scenario::begin_battle(cp.party, cp.bag, scenario::spawn_wild(*enc.species, enc.level, encounter_rng));

    result.retrieved = store.retrieve({memory::entities_for(state, table.location), 3});
    result.pilot_ranked_first = !result.retrieved.empty() && result.retrieved.front().record.id == result.pilot_id;
    std::vector<memory::MemoryRecord> recalled;
    for (const auto& s : result.retrieved) recalled.push_back(s.record);
    result.snippets = memory::format_snippets(recalled);

    const AblationMask mask = AblationMask::full();
    const ActionSet valid = engine.valid_actions(state, mask);
    const auto prompt = agent_io::serialize_state(tmpl, engine, state, {}, result.snippets, mask);
    result.prompt_user = prompt.user;

    Rng policy_rng(Rng::derive_seed(config.seed, streams::kPolicy, 0));
    policies::MemoryAwarePolicy policy;
    const auto decision = policy.decide({engine, state, valid, prompt, recalled}, policy_rng);
    result.action = decision.action;
    result.action_wire = agent_io::to_wire(agent_io::to_request(decision.action, state));

    Rng battle_rng(Rng::derive_seed(config.seed, streams::kBattle, 0));
    const Action enemy_action = engine.enemy_policy(state, battle_rng);
    engine.resolve_turn(state, decision.action, enemy_action, battle_rng);
    result.outcome_after_turn = state.outcome;
    return result;
}

std::string summary_text(const RunOutput& out, const RunConfig& config) {
    const auto& m = out.metrics;
    std::ostringstream os;
    os << "Run " << config.effective_run_id() << ": policy " << policy_name(config.policy) << ", mask "
       << mask_name(config.mask) << ", " << m.repetitions << " x " << m.battles_per_run << " battles\n";
    os << "Win rate " << percent(m.mean_win_rate) << " (SEM " << percent(m.sem) << "), wins per repetition:";
    for (int w : m.wins_per_repetition) os << " " << w;
    os << "\nActions:";
    for (std::size_t i = 0; i < kCategoryCount; ++i)
        os << " " << kCategoryNames[i] << " " << percent(m.action_distribution[i]);
    os << "\nInvalid actions " << m.totals.at("invalid_actions") << ", fallbacks " << m.totals.at("fallback_decisions")
       << "\nOutput: " << out.run_dir.string() << "\n";
    return os.str();
}

}  // namespace pokeai::harness
