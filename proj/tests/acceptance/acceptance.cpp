// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails. Criteria 7-9 drive the real CLI binary.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "harness/harness.hpp"
#include "oracle/gen1_oracle.hpp"
#include "support/test_support.hpp"

using namespace pokeai;
using namespace pokeai::battle;
using namespace testing_support;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v, int precision = 2) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(precision) << v;
    return os.str();
}

std::string pct(double fraction) { return fmt(fraction * 100.0, 2) + "%"; }

struct CliResult {
    int exit_code = -1;
    std::string output;
};

// Runs the CLI from the source root so relative data paths resolve.
CliResult run_cli(const std::string& args) {
    const std::string cmd = "cd '" + source_dir().string() + "' && '" POKEAI_CLI_PATH "' " + args + " 2>&1";
    CliResult r;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return r;
    std::array<char, 4096> buf{};
    std::size_t n = 0;
    while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.output.append(buf.data(), n);
    const int status = pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

harness::RunConfig gauntlet_config(harness::PolicyKind policy, const fs::path& out) {
    harness::RunConfig c;
    c.seed = 2024;
    c.battles_per_run = 50;
    c.repetitions = 10;
    c.policy = policy;
    c.data_dir = data_dir().string();
    c.checkpoint = (data_dir() / "checkpoints" / "mt_moon_default.json").string();
    c.encounters = (data_dir() / "encounters" / "mt_moon.json").string();
    c.prompt = (prompt_dir() / "battle_v1.txt").string();
    c.output_dir = out.string();
    c.jobs = 4;
    return c;
}

// The heuristic sweep feeds criteria 3 and 4.
const std::vector<harness::AblationRow>& heuristic_sweep() {
    static const auto rows = harness::ablation_sweep(
        gauntlet_config(harness::PolicyKind::Heuristic, temp_dir("acceptance_sweep")));
    return rows;
}

const harness::AggregateMetrics& variant(const std::string& name) {
    for (const auto& r : heuristic_sweep())
        if (r.variant == name) return r.metrics;
    throw std::runtime_error("missing ablation variant " + name);
}

long category_count(const harness::AggregateMetrics& m, harness::ActionCategory c) {
    return m.action_counts[static_cast<std::size_t>(c)];
}

// 1 ------------------------------------------------------------------------
Verdict encounter_statistics() {
    const auto table = scenario::load_encounter_table(data_dir() / "encounters" / "mt_moon.json", *game_data());
    const std::map<std::string, double> expected{{"Zubat", 0.79}, {"Geodude", 0.15}, {"Paras", 0.05}, {"Clefairy", 0.01}};
    Rng rng(Rng::derive_seed(1, streams::kEncounter, 0));
    constexpr int kSamples = 100000;
    std::map<std::string, int> counts;
    long level_sum = 0;
    for (int i = 0; i < kSamples; ++i) {
        const auto e = scenario::sample_encounter(table, rng);
        ++counts[e.species->name];
        level_sum += e.level;
    }
    bool ok = counts.size() == expected.size();
    std::string detail;
    for (const auto& [species, p] : expected) {
        const double f = counts[species] / double(kSamples);
        ok = ok && std::fabs(f - p) <= 0.005;
        detail += species + " " + pct(f) + " ";
    }
    const double mean = level_sum / double(kSamples);
    ok = ok && std::fabs(mean - 8.18) <= 0.10;
    return {ok, detail + "mean level " + fmt(mean, 3) + " (target 8.18 +/- 0.10, species +/- 0.5%)"};
}

// 2 ------------------------------------------------------------------------
Verdict metrics_arithmetic() {
    const auto ten = harness::aggregate_wins({40, 41, 40, 41, 40, 41, 40, 41, 40, 40}, 50);
    const auto one = harness::aggregate_wins({43}, 50);
    const double p10 = ten.to_json()["win_rate_percent"].get<double>();
    const double p1 = one.to_json()["win_rate_percent"].get<double>();
    const bool ok = p10 == 80.8 && p1 == 86.0 && ten.mean_win_rate == 0.808 && one.mean_win_rate == 0.86;
    return {ok, "mean 40.4/50 -> " + fmt(p10, 12) + "%, 43/50 -> " + fmt(p1, 12) + "% (exact)"};
}

// 3 ------------------------------------------------------------------------
Verdict ablation_semantics() {
    using harness::ActionCategory;
    const auto& ns = variant("no-switch");
    const auto& ni = variant("no-item");
    const auto& ne = variant("no-escape");
    const long strategic = ns.totals.at("strategic_switches");
    const long forced = ns.totals.at("forced_switches");
    const long items = ni.totals.at("potions_used") + category_count(ni, ActionCategory::Item);
    const long runs = ne.totals.at("escapes_attempted") + category_count(ne, ActionCategory::Run);
    const bool ok = strategic == 0 && forced >= 0 && items == 0 && runs == 0 && ns.repetitions == 10 &&
                    ns.battles_per_run == 50;
    return {ok, "10x50 heuristic: no-switch strategic " + std::to_string(strategic) + " forced " +
                    std::to_string(forced) + ", no-item item events " + std::to_string(items) +
                    ", no-escape run events " + std::to_string(runs)};
}

// 4 ------------------------------------------------------------------------
Verdict ablation_ordering() {
    const double full = variant("full").mean_win_rate;
    const double no_item = variant("no-item").mean_win_rate;
    auto cfg = gauntlet_config(harness::PolicyKind::Random, temp_dir("acceptance_random_baseline"));
    const double random = harness::run_eval(cfg).metrics.mean_win_rate;
    const bool ok = full >= no_item && full > random;
    return {ok, "heuristic full " + pct(full) + " >= no-item " + pct(no_item) + ", full > random " + pct(random)};
}

// 5 ------------------------------------------------------------------------
Verdict random_validity() {
    auto cfg = gauntlet_config(harness::PolicyKind::Random, temp_dir("acceptance_random_validity"));
    cfg.seed = 5;
    harness::RunOutput out;
    try {
        out = harness::run_eval(cfg);
    } catch (const Error& e) {
        return {false, std::string("run aborted: ") + e.what()};
    }
    long invalid_lines = 0;
    std::ifstream in(out.run_dir / "turns.jsonl");
    std::string line;
    while (std::getline(in, line))
        if (json::parse(line)["type"] == "invalid_action") ++invalid_lines;
    const long invalid = out.metrics.totals.at("invalid_actions");
    const bool ok = invalid == 0 && invalid_lines == 0;
    return {ok, "10x50 random: invalid_action events " + std::to_string(invalid_lines) + ", deadlocks 0, " +
                    std::to_string(out.metrics.totals.at("decisions")) + " decisions"};
}

// 6 ------------------------------------------------------------------------
std::set<std::string> type_names(const SpeciesSpec& s) {
    std::set<std::string> out{std::string(type_name(s.type1))};
    if (s.type2) out.insert(std::string(type_name(*s.type2)));
    return out;
}

std::optional<std::string> type2_name(const SpeciesSpec& s) {
    if (!s.type2) return std::nullopt;
    return std::string(type_name(*s.type2));
}

Verdict mechanics_oracle() {
    constexpr int kInputs = 1000;
    const auto& eng = engine();
    Rng rng(606);
    std::vector<const SpeciesSpec*> species;
    for (const auto& s : game_data()->all_species()) species.push_back(s.get());
    std::vector<const MoveSpec*> damaging;
    for (const auto& m : game_data()->moves())
        if (m->is_damaging()) damaging.push_back(m.get());
    auto pick = [&](const auto& v) { return v[static_cast<std::size_t>(rng.uniform_int(0, int(v.size()) - 1))]; };
    auto dvs = [&] {
        return Dvs{rng.uniform_int(0, 15), rng.uniform_int(0, 15), rng.uniform_int(0, 15), rng.uniform_int(0, 15),
                   rng.uniform_int(0, 15)};
    };

    int mismatches = 0;
    for (int i = 0; i < kInputs; ++i) {
        const int s = rng.uniform_int(-6, 6);
        mismatches += eng.stage_multiplier(s).numerator != oracle::stat_stage_percent(s);
    }
    std::vector<TypeId> types;
    for (int t = 0; t < kTypeCount; ++t) types.push_back(static_cast<TypeId>(t));
    for (int i = 0; i < kInputs; ++i) {
        const TypeId a = pick(types), d1 = pick(types);
        const bool dual = rng.uniform_int(0, 1) == 1;
        const TypeId d2 = pick(types);
        const double got = eng.type_effectiveness(a, d1, dual ? std::optional<TypeId>(d2) : std::nullopt);
        const double want = oracle::effectiveness(std::string(type_name(a)), std::string(type_name(d1)),
                                                  dual ? std::optional<std::string>(type_name(d2)) : std::nullopt);
        mismatches += got != want;
    }
    for (int i = 0; i < kInputs; ++i) {
        const SpeciesSpec& sp = *pick(species);
        const int level = rng.uniform_int(1, 100);
        const Dvs d = dvs();
        const Monster m = make_monster(sp, level, d, default_moveset(sp, level));
        mismatches += m.stats.hp != oracle::hp_stat(sp.base.hp, d.hp, level);
        mismatches += m.stats.attack != oracle::stat(sp.base.attack, d.attack, level);
        mismatches += m.stats.defense != oracle::stat(sp.base.defense, d.defense, level);
        mismatches += m.stats.speed != oracle::stat(sp.base.speed, d.speed, level);
        mismatches += m.stats.special != oracle::stat(sp.base.special, d.special, level);
    }
    for (int i = 0; i < kInputs; ++i) {
        const SpeciesSpec& as = *pick(species);
        const SpeciesSpec& ds = *pick(species);
        Monster a = make_monster(as, rng.uniform_int(1, 100), dvs(), default_moveset(as, 100));
        Monster d = make_monster(ds, rng.uniform_int(1, 100), dvs(), default_moveset(ds, 100));
        for (Stat st : {Stat::Attack, Stat::Defense, Stat::Special})
            a.stages.set(st, rng.uniform_int(-6, 6)), d.stages.set(st, rng.uniform_int(-6, 6));
        const MoveSpec& move = *pick(damaging);
        const bool crit = rng.uniform_int(0, 1) == 1;
        const int roll = rng.uniform_int(217, 255);
        oracle::DamageInput in;
        in.level = a.level;
        in.power = move.power;
        in.special = move.category == MoveCategory::Special;
        in.crit = crit;
        in.roll = roll;
        in.atk = in.special ? a.stats.special : a.stats.attack;
        in.atk_stage = a.stages.get(in.special ? Stat::Special : Stat::Attack);
        in.def = in.special ? d.stats.special : d.stats.defense;
        in.def_stage = d.stages.get(in.special ? Stat::Special : Stat::Defense);
        in.move_type = std::string(type_name(move.type));
        in.attacker_types = type_names(as);
        in.defender_type1 = std::string(type_name(ds.type1));
        in.defender_type2 = type2_name(ds);
        mismatches += eng.compute_damage_with_roll(a, d, move, crit, roll) != oracle::damage(in);
    }
    BattleState base = mt_moon_state(monster("Zubat", 8));
    for (int i = 0; i < kInputs; ++i) {
        BattleState s = base;
        s.active_monster().stats.speed = rng.uniform_int(1, 400);
        s.enemy.stats.speed = rng.uniform_int(1, 1200);
        s.escape_attempts = rng.uniform_int(0, 9);
        const auto t = eng.escape_threshold(s);
        const auto odds = oracle::escape_odds(s.active_monster().stats.speed, s.enemy.stats.speed, s.escape_attempts);
        mismatches += (t ? *t : 256) != odds.first;
    }

    // Monte Carlo at 100k draws
    constexpr int kDraws = 100000;
    BattleState esc = base;
    esc.active_monster().stats.speed = 50;
    esc.enemy.stats.speed = 80;
    int escaped = 0;
    for (int i = 0; i < kDraws; ++i) {
        BattleState t = esc;
        escaped += eng.attempt_escape(t, rng);
    }
    const double esc_rate = escaped / double(kDraws);
    const double esc_want = oracle::escape_odds(50, 80, 0).first / 256.0;
    const SpeciesSpec& charmander = game_data()->species("Charmander");
    int crits = 0;
    for (int i = 0; i < kDraws; ++i) crits += eng.critical_check(charmander, rng);
    const double crit_rate = crits / double(kDraws);
    const double crit_want = oracle::crit_probability(charmander.base.speed);

    const bool ok = mismatches == 0 && std::fabs(esc_rate - esc_want) <= 0.015 &&
                    std::fabs(crit_rate - crit_want) <= 0.015;
    return {ok, std::to_string(mismatches) + " mismatches over 5x" + std::to_string(kInputs) +
                    " randomized inputs; escape MC " + pct(esc_rate) + " vs " + pct(esc_want) + ", crit MC " +
                    pct(crit_rate) + " vs " + pct(crit_want) + " (+/- 1.5%)"};
}

// 7 ------------------------------------------------------------------------
json without_timestamps(json j) {
    if (j.is_object()) {
        j.erase("created_at");
        for (auto& [k, v] : j.items()) v = without_timestamps(v);
    } else if (j.is_array()) {
        for (auto& v : j) v = without_timestamps(v);
    }
    return j;
}

Verdict memory_pilot() {
    const fs::path out = temp_dir("acceptance_pilot");
    std::array<std::string, 2> results;
    for (int i = 0; i < 2; ++i) {
        const auto r = run_cli("pilot-memory --output-dir '" + out.string() + "'");
        if (r.exit_code != 0) return {false, "pilot-memory exited " + std::to_string(r.exit_code) + ": " + r.output};
        std::ifstream in(out / "pilot-memory" / "result.json");
        results[static_cast<std::size_t>(i)] = std::string((std::istreambuf_iterator<char>(in)), {});
    }
    const json r = json::parse(results[0]);
    const std::string prompt = r.value("prompt", std::string());
    const bool matchup = prompt.find("Pikachu, level 9") != std::string::npos &&
                         prompt.find("Squirtle (party slot 1), level 6") != std::string::npos;
    const bool first = r["pilot_ranked_first"].get<bool>() && r["retrieved"][0]["id"] == r["pilot_id"];
    const bool runs = r["action"]["action"] == "run";
    const bool same = without_timestamps(r) == without_timestamps(json::parse(results[1]));
    const bool ok = matchup && first && runs && same;
    return {ok, std::string("L6 Squirtle vs L9 Pikachu: ") + (first ? "record ranked first" : "record NOT first") +
                    ", action " + r["action"]["action"].get<std::string>() +
                    (same ? ", identical on rerun" : ", differs on rerun")};
}

// 8 ------------------------------------------------------------------------
Verdict determinism() {
    const fs::path out = temp_dir("acceptance_determinism");
    std::string detail;
    bool ok = true;
    for (const std::string policy : {"random", "heuristic"}) {
        for (const char* id : {"a", "b"}) {
            const auto r = run_cli("run-eval --policy " + policy + " --seed 11 --repetitions 3 --output-dir '" +
                                   out.string() + "' --run-id " + policy + "-" + id);
            if (r.exit_code != 0) return {false, "run-eval exited " + std::to_string(r.exit_code) + ": " + r.output};
        }
        const fs::path a = out / (policy + "-a"), b = out / (policy + "-b");
        const bool same = harness::canonical_jsonl(a / "turns.jsonl") == harness::canonical_jsonl(b / "turns.jsonl") &&
                          harness::canonical_json_file(a / "metrics.json") ==
                              harness::canonical_json_file(b / "metrics.json");
        ok = ok && same;
        detail += policy + (same ? " identical, " : " DIFFERENT, ");
    }
    for (const char* id : {"a", "b"}) {
        const auto r = run_cli("replay --run-dir fixtures/cassettes/mock-llm --output-dir '" + out.string() +
                               "' --run-id replay-" + id);
        if (r.exit_code != 0) return {false, "replay exited " + std::to_string(r.exit_code) + ": " + r.output};
    }
    const bool same = harness::canonical_jsonl(out / "replay-a" / "turns.jsonl") ==
                          harness::canonical_jsonl(out / "replay-b" / "turns.jsonl") &&
                      harness::canonical_json_file(out / "replay-a" / "metrics.json") ==
                          harness::canonical_json_file(out / "replay-b" / "metrics.json");
    ok = ok && same;
    return {ok, detail + "replay" + (same ? " identical" : " DIFFERENT") + " (turns.jsonl and metrics.json)"};
}

// 9 ------------------------------------------------------------------------
Verdict replay_fidelity() {
    const fs::path out = temp_dir("acceptance_replay");
    const fs::path original = source_dir() / "fixtures" / "cassettes" / "mock-llm";
    const auto r = run_cli("replay --run-dir fixtures/cassettes/mock-llm --output-dir '" + out.string() +
                           "' --run-id replayed");
    const bool zero_calls = r.output.find("Live network calls: 0") != std::string::npos;
    const json a = json::parse(harness::canonical_json_file(original / "metrics.json"));
    const fs::path replayed = out / "replayed" / "metrics.json";
    if (!fs::exists(replayed)) return {false, "replay produced no metrics: " + r.output};
    const json b = json::parse(harness::canonical_json_file(replayed));
    const bool same = a == b;
    const bool ok = r.exit_code == 0 && zero_calls && same;
    return {ok, std::string("mock-llm cassette: metrics ") + (same ? "identical" : "DIFFERENT") + ", live calls " +
                    (zero_calls ? "0" : "non-zero") + ", win rate " + fmt(b["win_rate_percent"].get<double>(), 1) +
                    "%"};
}

// 10 -----------------------------------------------------------------------
Verdict declared_not_reproducible() {
    const fs::path cassette = source_dir() / "fixtures" / "cassettes" / "mock-llm" / "cassette.jsonl";
    const bool ok = fs::exists(cassette) && fs::file_size(cassette) > 0;
    return {ok, "declared: per-model win rates and action distributions need live model endpoints; "
                "fixture cassette and live-run recipe shipped instead"};
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* title;
        double limit_s;  // 0: no runtime limit
        std::function<Verdict()> check;
    };
    const std::vector<Criterion> criteria{
        {1, "encounter statistics", 5, encounter_statistics},
        {2, "metrics arithmetic", 0, metrics_arithmetic},
        {3, "ablation semantics", 0, ablation_semantics},
        {4, "directional ablation ordering", 60, ablation_ordering},
        {5, "random-baseline validity", 30, random_validity},
        {6, "mechanics oracle equivalence", 0, mechanics_oracle},
        {7, "memory pilot", 0, memory_pilot},
        {8, "determinism", 0, determinism},
        {9, "replay fidelity", 0, replay_fidelity},
        {10, "model-specific results (not reproducible, declared)", 0, declared_not_reproducible},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = c.check();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::string timing = fmt(secs, 2) + " s";
        if (c.limit_s > 0) {
            timing += ", limit " + fmt(c.limit_s, 0) + " s";
            if (secs >= c.limit_s) {
                v.pass = false;
                v.detail += "; over the runtime limit";
            }
        }
        if (!v.pass) ++failures;
        std::cout << (v.pass ? "PASS" : "FAIL") << " [" << c.id << "] " << c.title << ": " << v.detail << " ("
                  << timing << ")" << std::endl;
    }
    std::cout << (failures == 0 ? "All acceptance criteria passed." : std::to_string(failures) + " criteria failed.")
              << std::endl;
    return failures == 0 ? 0 : 1;
}
