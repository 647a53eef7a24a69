#include <doctest.h>

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "harness/harness.hpp"
#include "support/test_support.hpp"

using namespace pokeai;
using namespace pokeai::harness;
using namespace testing_support;
using nlohmann::json;

namespace {

RunConfig base_config(const std::string& name, PolicyKind policy = PolicyKind::Heuristic) {
    RunConfig c;
    c.seed = 42;
    c.battles_per_run = 20;
    c.repetitions = 3;
    c.policy = policy;
    c.data_dir = data_dir().string();
    c.checkpoint = (data_dir() / "checkpoints" / "mt_moon_default.json").string();
    c.encounters = (data_dir() / "encounters" / "mt_moon.json").string();
    c.prompt = (prompt_dir() / "battle_v1.txt").string();
    c.output_dir = temp_dir(name).string();
    return c;
}

std::vector<json> read_lines(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::vector<json> out;
    std::string line;
    while (std::getline(in, line)) out.push_back(json::parse(line));
    return out;
}

// Oracle for the SEM: sample standard deviation of per-repetition rates over sqrt(n).
double sem_oracle(const std::vector<int>& wins, int battles) {
    const double n = static_cast<double>(wins.size());
    double mean = 0;
    for (int w : wins) mean += w / double(battles);
    mean /= n;
    double ss = 0;
    for (int w : wins) ss += (w / double(battles) - mean) * (w / double(battles) - mean);
    return std::sqrt(ss / (n - 1)) / std::sqrt(n);
}

}  // namespace

TEST_SUITE("metrics arithmetic") {
    TEST_CASE("40.4 of 50 averages to 80.8%") {
        const std::vector<int> wins{40, 41, 40, 41, 40, 41, 40, 41, 40, 40};
        REQUIRE(std::accumulate(wins.begin(), wins.end(), 0) == 404);
        const auto m = aggregate_wins(wins, 50);
        CHECK(m.mean_win_rate == 0.808);
        CHECK(m.to_json()["win_rate_percent"].get<double>() == 80.8);
        CHECK(m.sem == doctest::Approx(sem_oracle(wins, 50)).epsilon(1e-12));
    }

    TEST_CASE("single run of 43 of 50") {
        const auto m = aggregate_wins({43}, 50);
        CHECK(m.mean_win_rate == 0.86);
        CHECK(m.to_json()["win_rate_percent"].get<double>() == 86.0);
        CHECK(m.sem == 0.0);
    }

    TEST_CASE("two runs of 40 and 41") {
        const auto m = aggregate_wins({40, 41}, 50);
        CHECK(m.mean_win_rate == doctest::Approx(0.81));
        CHECK(m.sem == doctest::Approx(0.01));
    }

    TEST_CASE("randomized SEM against the oracle") {
        Rng rng(77);
        for (int i = 0; i < 500; ++i) {
            const int n = rng.uniform_int(2, 12);
            std::vector<int> wins;
            for (int k = 0; k < n; ++k) wins.push_back(rng.uniform_int(0, 50));
            const auto m = aggregate_wins(wins, 50);
            CHECK(m.sem == doctest::Approx(sem_oracle(wins, 50)).epsilon(1e-9));
            CHECK(m.mean_win_rate >= 0.0);
            CHECK(m.mean_win_rate <= 1.0);
        }
    }

    TEST_CASE("action distribution") {
        const auto d = action_distribution({3, 1, 0, 0, 0, 0});
        CHECK(d[0] == 0.75);
        CHECK(d[1] == 0.25);
        const auto zero = action_distribution({});
        CHECK(std::accumulate(zero.begin(), zero.end(), 0.0) == 0.0);
    }
}

TEST_SUITE("config") {
    TEST_CASE("json overrides and rejections") {
        const RunConfig c = config_from_json(json{{"seed", 9}, {"policy", "random"}, {"mask", "no-item"}});
        CHECK(c.seed == 9);
        CHECK(c.policy == PolicyKind::Random);
        CHECK_FALSE(c.mask.allow_item);
        CHECK(c.effective_run_id() == "random-no-item-seed9");
        CHECK_THROWS_AS(config_from_json(json{{"sed", 1}}), Error);
        CHECK_THROWS_AS(config_from_json(json{{"llm", {{"api_key", "x"}}}}), Error);
        CHECK_THROWS_AS(config_from_json(json{{"mask", "no-fun"}}), Error);
        CHECK_THROWS_AS(config_from_json(json{{"battles_per_run", 0}}).validate(), Error);
    }

    TEST_CASE("serialized config never carries the key") {
        RunConfig c;
        c.llm.api_key = "sk-hidden";
        CHECK(to_json(c).dump().find("sk-hidden") == std::string::npos);
        CHECK(config_from_json(to_json(c)).seed == c.seed);
    }

    TEST_CASE("mask names") {
        for (const char* n : {"full", "no-escape", "no-switch", "no-item"}) CHECK(mask_name(mask_from_name(n)) == n);
    }
}

TEST_SUITE("gauntlet") {
    TEST_CASE("encounter schedule is shared across policies and masks") {
        RunConfig a = base_config("sched_a", PolicyKind::Random);
        RunConfig b = base_config("sched_b", PolicyKind::Heuristic);
        b.mask = mask_from_name("no-item");
        const auto ctx = RunContext::load(a);
        const auto sa = encounter_schedule(a, ctx, 1);
        const auto sb = encounter_schedule(b, ctx, 1);
        REQUIRE(sa.size() == sb.size());
        for (std::size_t i = 0; i < sa.size(); ++i) {
            CHECK(sa[i].species == sb[i].species);
            CHECK(sa[i].monster == sb[i].monster);
        }
        CHECK_FALSE(encounter_schedule(a, ctx, 2)[0].monster == sa[0].monster);
    }

    TEST_CASE("denominator always equals battles per run") {
        for (auto policy : {PolicyKind::Random, PolicyKind::Heuristic}) {
            RunConfig c = base_config("denominator", policy);
            c.repetitions = 4;
            c.battles_per_run = 50;
            const auto out = run_eval(c);
            int wins = 0;
            for (const auto& ep : out.episodes) {
                CHECK(ep.outcomes.size() == 50);
                wins += ep.wins();
            }
            CHECK(out.metrics.mean_win_rate == doctest::Approx(wins / 200.0));
            const auto& t = out.metrics.totals;
            CHECK(t.at("wins") + t.at("losses") + t.at("escaped") + t.at("forfeit_remaining") == 200);
        }
    }

    TEST_CASE("log lines") {
        RunConfig c = base_config("log_lines", PolicyKind::Random);
        c.repetitions = 2;
        const auto out = run_eval(c);
        const auto lines = read_lines(out.run_dir / "turns.jsonl");
        int starts = 0, ends = 0, forfeits = 0, decisions = 0;
        for (const auto& l : lines) {
            const std::string type = l["type"];
            if (type == "battle_start") ++starts;
            if (type == "battle_end") ++ends;
            if (type == "battle_end" && l["outcome"] == "forfeit_remaining") ++forfeits;
            if (type == "decision") {
                ++decisions;
                CHECK(l.contains("state_digest"));
                CHECK(l.contains("prompt_hash"));
                CHECK(l.contains("events"));
                CHECK(l["source"] == "random");
            }
            CHECK(l.contains("timestamp"));
            CHECK(type != "invalid_action");
        }
        CHECK(ends == 40);
        CHECK(starts + forfeits == 40);
        CHECK(decisions == out.metrics.totals.at("decisions"));
        const long counted = std::accumulate(out.metrics.action_counts.begin(), out.metrics.action_counts.end(), 0L);
        CHECK(counted == decisions);
        const double sum = std::accumulate(out.metrics.action_distribution.begin(),
                                           out.metrics.action_distribution.end(), 0.0);
        CHECK(sum == doctest::Approx(1.0));
        CHECK(std::filesystem::exists(out.run_dir / "metrics.json"));
        CHECK(std::filesystem::exists(out.run_dir / "summary.csv"));
        CHECK(std::filesystem::exists(out.run_dir / "config.json"));
    }

    TEST_CASE("identical seeds give identical runs") {
        for (auto policy : {PolicyKind::Random, PolicyKind::Heuristic}) {
            RunConfig a = base_config("det_a", policy);
            RunConfig b = base_config("det_b", policy);
            b.jobs = 3;
            const auto oa = run_eval(a);
            const auto ob = run_eval(b);
            CHECK(canonical_jsonl(oa.run_dir / "turns.jsonl") == canonical_jsonl(ob.run_dir / "turns.jsonl"));
            CHECK(canonical_json_file(oa.run_dir / "metrics.json") == canonical_json_file(ob.run_dir / "metrics.json"));
        }
        RunConfig c = base_config("det_c", PolicyKind::Random);
        RunConfig d = base_config("det_d", PolicyKind::Random);
        d.seed = 43;
        CHECK(canonical_jsonl(run_eval(c).run_dir / "turns.jsonl") !=
              canonical_jsonl(run_eval(d).run_dir / "turns.jsonl"));
    }

    TEST_CASE("party state persists across battles") {
        RunConfig c = base_config("persist", PolicyKind::Heuristic);
        c.repetitions = 1;
        const auto out = run_eval(c);
        json prev_party, prev_potions;
        int checked = 0;
        for (const auto& l : read_lines(out.run_dir / "turns.jsonl")) {
            if (l["type"] == "battle_start" && !prev_party.is_null()) {
                CHECK(l["party"] == prev_party);
                CHECK(l["potions"] == prev_potions);
                ++checked;
            }
            if (l["type"] == "battle_end" && l.contains("party")) {
                prev_party = l["party"];
                prev_potions = l["potions"];
            }
        }
        CHECK(checked > 0);
        CHECK(out.episodes[0].final_bag.count(battle::ItemKind::Potion) == 5 - out.episodes[0].potions_used);
    }
}

TEST_SUITE("ablation") {
    TEST_CASE("masked capabilities never appear") {
        RunConfig c = base_config("ablate_small");
        c.repetitions = 3;
        const auto rows = ablation_sweep(c);
        REQUIRE(rows.size() == 4);
        for (const auto& r : rows) {
            const auto& t = r.metrics.totals;
            if (r.variant == "no-switch") CHECK(t.at("strategic_switches") == 0);
            if (r.variant == "no-item") CHECK(t.at("potions_used") == 0);
            if (r.variant == "no-escape") CHECK(t.at("escapes_attempted") == 0);
        }
        CHECK(ablation_table(rows).find("no-switch") != std::string::npos);
        CHECK(std::filesystem::exists(c.run_dir() / "ablation.csv"));
    }

    TEST_CASE("random policy under masks") {
        RunConfig c = base_config("ablate_random", PolicyKind::Random);
        c.repetitions = 2;
        for (const auto& r : ablation_sweep(c)) {
            const auto& t = r.metrics.totals;
            if (r.variant == "no-switch") CHECK(t.at("strategic_switches") == 0);
            if (r.variant == "no-item") CHECK(t.at("potions_used") == 0);
            if (r.variant == "no-escape") CHECK(t.at("escapes_attempted") == 0);
            CHECK(t.at("invalid_actions") == 0);
        }
    }
}

TEST_SUITE("memory in the harness") {
    TEST_CASE("losses are remembered") {
        RunConfig c = base_config("mem_losses", PolicyKind::Random);
        c.repetitions = 1;
        c.memory.enabled = true;
        c.memory.record_losses = true;
        c.memory.store_path = (std::filesystem::path(c.output_dir) / "mem.jsonl").string();
        const auto out = run_eval(c);
        memory::MemoryStore store(c.memory.store_path);
        CHECK(static_cast<long>(store.size()) == out.metrics.totals.at("losses"));
        for (const auto& r : store.records()) {
            CHECK(r.outcome == memory::RecordOutcome::Lost);
            CHECK(r.text.find("was defeated by a Level") != std::string::npos);
        }
    }

    TEST_CASE("pilot") {
        PilotConfig p;
        p.data_dir = data_dir().string();
        p.prompt = (prompt_dir() / "battle_v1.txt").string();
        p.output_dir = temp_dir("pilot").string();
        const auto r = run_pilot_memory(p);
        CHECK(r.pilot_ranked_first);
        REQUIRE(!r.retrieved.empty());
        CHECK(r.retrieved[0].record.id == r.pilot_id);
        CHECK(r.action == battle::Action{battle::action::Run{}});
        CHECK(r.action_wire == "{\"action\": \"run\"}");
        CHECK(r.prompt_user.find("Level 5 Squirtle was defeated by a Level 8 Pikachu") != std::string::npos);
        const auto again = run_pilot_memory(p);
        CHECK(again.prompt_user == r.prompt_user);
        CHECK(again.outcome_after_turn == r.outcome_after_turn);
    }
}
