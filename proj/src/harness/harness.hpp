#pragma once

// Experiment runner: gauntlets, repetitions, metrics and run directories.

#include <array>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "battle/engine.hpp"
#include "policies/policies.hpp"
#include "scenario/scenario.hpp"

namespace pokeai::harness {

enum class PolicyKind { Random, Heuristic, MemoryAware, Human, Llm };

std::string_view policy_name(PolicyKind kind);
std::optional<PolicyKind> parse_policy(std::string_view name);

struct MemoryConfig {
    bool enabled = false;
    std::string store_path;
    int k = 3;
    bool record_losses = false;
};

struct RunConfig {
    std::uint64_t seed = 0;
    int battles_per_run = 50;
    int repetitions = 10;
    PolicyKind policy = PolicyKind::Random;
    policies::LlmEndpointConfig llm;
    policies::TransportMode transport = policies::TransportMode::Live;
    std::string cassette;
    battle::AblationMask mask;
    std::string data_dir = "data";
    std::string checkpoint = "data/checkpoints/mt_moon_default.json";
    std::string encounters = "data/encounters/mt_moon.json";
    std::string prompt = "prompts/battle_v1.txt";
    MemoryConfig memory;
    std::string output_dir = "runs";
    std::string run_id;  // empty: derived from policy and seed
    int jobs = 1;

    std::string effective_run_id() const;
    std::filesystem::path run_dir() const { return std::filesystem::path(output_dir) / effective_run_id(); }
    void validate() const;
};

// Applies the keys present in `j` on top of `base`. Unknown keys are errors.
RunConfig config_from_json(const nlohmann::json& j, RunConfig base = {});
RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});
// Never includes the API key.
nlohmann::json to_json(const RunConfig& config);

battle::AblationMask mask_from_name(std::string_view name);
std::string mask_name(const battle::AblationMask& mask);

enum class BattleOutcome { Win, Loss, Escaped, Forfeit };
std::string_view battle_outcome_name(BattleOutcome outcome);

enum class ActionCategory { DamagingMove, StatusMove, Switch, Item, Run, Invalid };
inline constexpr std::size_t kCategoryCount = 6;
std::string_view category_name(ActionCategory category);

using ActionCounts = std::array<long, kCategoryCount>;

struct EpisodeResult {
    int repetition = 0;
    std::vector<BattleOutcome> outcomes;
    std::vector<int> turns;
    int potions_used = 0;
    int strategic_switches = 0;
    int forced_switches = 0;
    int escapes_attempted = 0;
    int escapes_succeeded = 0;
    int invalid_actions = 0;
    int fallback_decisions = 0;
    ActionCounts action_counts{};
    std::vector<battle::Monster> final_party;
    battle::Bag final_bag;

    int count(BattleOutcome outcome) const;
    int wins() const { return count(BattleOutcome::Win); }
};

struct AggregateMetrics {
    int repetitions = 0;
    int battles_per_run = 0;
    std::vector<int> wins_per_repetition;
    double mean_win_rate = 0.0;  // fraction in [0, 1]
    double sem = 0.0;            // of the per-repetition win rate
    ActionCounts action_counts{};
    std::array<double, kCategoryCount> action_distribution{};
    std::map<std::string, long> totals;

    // From the integer win total, so 404 wins over 10 x 50 battles is exactly 80.8.
    double win_rate_percent() const;

    nlohmann::json to_json() const;
};

// Pure arithmetic over per-repetition win counts.
AggregateMetrics aggregate_wins(const std::vector<int>& wins_per_repetition, int battles_per_run);
AggregateMetrics aggregate(const std::vector<EpisodeResult>& episodes, int battles_per_run);

// Fractions over the six categories; all zeros when there are no counts.
std::array<double, kCategoryCount> action_distribution(const ActionCounts& counts);

// Everything a gauntlet needs that is shared between repetitions.
struct RunContext {
    battle::GameDataPtr data;
    std::shared_ptr<const battle::BattleEngine> engine;
    scenario::Checkpoint checkpoint;
    scenario::EncounterTable encounters;
    agent_io::PromptTemplate prompt;
    std::shared_ptr<memory::MemoryStore> memory;  // null when disabled
    std::shared_ptr<policies::Transport> transport;  // LLM policy only

    static RunContext load(const RunConfig& config);
};

struct ScheduledEncounter {
    const battle::SpeciesSpec* species = nullptr;
    int level = 1;
    battle::Monster monster;
};

// Wild Monsters for one repetition, drawn only from the encounter stream so
// every policy and ablation variant meets the same sequence.
std::vector<ScheduledEncounter> encounter_schedule(const RunConfig& config, const RunContext& ctx, int repetition);

using PolicyFactory = std::function<std::unique_ptr<policies::Policy>(int repetition)>;

PolicyFactory default_policy_factory(const RunConfig& config, const RunContext& ctx);

// One 50-battle (by default) gauntlet; every decision is appended to `log`
// as a JSON line and flushed.
EpisodeResult run_gauntlet(const RunConfig& config, const RunContext& ctx, policies::Policy& policy, int repetition,
                           std::ostream& log);

struct RunOutput {
    std::vector<EpisodeResult> episodes;
    AggregateMetrics metrics;
    std::filesystem::path run_dir;
};

// Runs all repetitions and writes turns.jsonl, metrics.json, summary.csv and
// config.json into the run directory.
RunOutput repeat_and_aggregate(const RunConfig& config, const RunContext& ctx, const PolicyFactory& factory);
RunOutput run_eval(const RunConfig& config);

struct AblationRow {
    std::string variant;
    battle::AblationMask mask;
    AggregateMetrics metrics;
};

std::vector<AblationRow> ablation_sweep(const RunConfig& base);
std::string ablation_table(const std::vector<AblationRow>& rows);

// JSONL with timestamps and latencies removed, for determinism checks.
std::string canonical_jsonl(const std::filesystem::path& path);
std::string canonical_json_file(const std::filesystem::path& path);

struct PilotResult {
    std::vector<memory::ScoredRecord> retrieved;
    std::string pilot_id;
    bool pilot_ranked_first = false;
    std::vector<std::string> snippets;
    battle::Action action;
    std::string action_wire;
    battle::Outcome outcome_after_turn = battle::Outcome::Ongoing;
    std::string prompt_user;
};

struct PilotConfig {
    std::string data_dir = "data";
    std::string prompt = "prompts/battle_v1.txt";
    std::string store_path;  // empty: fresh store under output_dir
    std::string output_dir = "runs";
    std::uint64_t seed = 0;
};

PilotResult run_pilot_memory(const PilotConfig& config);

// Human-readable one-paragraph summary of a run.
std::string summary_text(const RunOutput& output, const RunConfig& config);

}  // namespace pokeai::harness
