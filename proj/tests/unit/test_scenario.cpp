#include <doctest.h>

#include <cmath>
#include <fstream>
#include <map>

#include "common/errors.hpp"
#include "oracle/gen1_oracle.hpp"
#include "scenario/scenario.hpp"
#include "support/test_support.hpp"

using namespace pokeai;
using namespace pokeai::scenario;
using testing_support::data_dir;
using testing_support::game_data;

namespace {

EncounterTable mt_moon() {
    return load_encounter_table(data_dir() / "encounters" / "mt_moon.json", *game_data());
}

std::filesystem::path write_temp(const std::string& name, const std::string& body) {
    const auto dir = testing_support::temp_dir(name);
    const auto path = dir / (name + ".json");
    std::ofstream(path) << body;
    return path;
}

std::string data_error(auto fn) {
    try {
        fn();
    } catch (const DataError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_SUITE("encounter table") {
    TEST_CASE("frequencies within half a percent over 100k draws") {
        const EncounterTable table = mt_moon();
        Rng rng(Rng::derive_seed(7, streams::kEncounter, 0));
        std::map<std::string, int> counts;
        double level_sum = 0.0;
        const int n = 100000;
        for (int i = 0; i < n; ++i) {
            const Encounter e = sample_encounter(table, rng);
            ++counts[e.species->name];
            level_sum += e.level;
        }
        const std::map<std::string, double> expected = {
            {"Zubat", 0.79}, {"Geodude", 0.15}, {"Paras", 0.05}, {"Clefairy", 0.01}};
        for (const auto& [name, p] : expected) {
            CAPTURE(name);
            CHECK(std::fabs(counts[name] / static_cast<double>(n) - p) < 0.005);
        }
        CHECK(counts.size() == 4);
        CHECK(std::fabs(level_sum / n - 8.18) < 0.10);
        CHECK(rng.draws() == 2u * n);
    }

    TEST_CASE("expected level") {
        CHECK(mt_moon().expected_level() == doctest::Approx(8.18).epsilon(0.002));
    }

    TEST_CASE("level sets are respected") {
        const EncounterTable table = mt_moon();
        Rng rng(3);
        for (int i = 0; i < 5000; ++i) {
            const Encounter e = sample_encounter(table, rng);
            bool found = false;
            for (const auto& entry : table.entries)
                if (entry.species == e.species)
                    found = std::find(entry.level_set.begin(), entry.level_set.end(), e.level) !=
                            entry.level_set.end();
            CHECK(found);
        }
    }

    TEST_CASE("empty table is a data error") {
        EncounterTable empty;
        empty.location = "Nowhere";
        Rng rng(1);
        CHECK_THROWS_AS(sample_encounter(empty, rng), DataError);
        const auto path = write_temp("empty_table", R"({"schema_version":1,"location":"X","entries":[]})");
        CHECK(data_error([&] { load_encounter_table(path, *game_data()); }).find("empty") != std::string::npos);
    }

    TEST_CASE("weights must sum to one") {
        const auto path = write_temp(
            "bad_weights",
            R"({"schema_version":1,"location":"X","entries":[{"species":"Zubat","level_set":[8],"weight":0.7}]})");
        CHECK(data_error([&] { load_encounter_table(path, *game_data()); }).find("weights sum") !=
              std::string::npos);
    }

    TEST_CASE("same seed, same schedule") {
        const EncounterTable table = mt_moon();
        Rng a(99), b(99);
        for (int i = 0; i < 1000; ++i) {
            const Encounter x = sample_encounter(table, a);
            const Encounter y = sample_encounter(table, b);
            CHECK(x.species == y.species);
            CHECK(x.level == y.level);
        }
    }
}

TEST_SUITE("spawn_wild") {
    TEST_CASE("stats follow the formula for the rolled DVs") {
        Rng rng(5);
        const auto& zubat = game_data()->species("Zubat");
        for (int i = 0; i < 500; ++i) {
            const auto m = spawn_wild(zubat, 8, rng);
            CHECK(m.stats.hp == oracle::hp_stat(zubat.base.hp, m.dvs.hp, 8));
            CHECK(m.stats.speed == oracle::stat(zubat.base.speed, m.dvs.speed, 8));
            CHECK(m.current_hp == m.max_hp());
            CHECK(m.dvs.attack >= 0);
            CHECK(m.dvs.attack <= 15);
        }
        CHECK(rng.draws() == 5u * 500);
    }

    TEST_CASE("pinned: L8 Zubat with DV 8") {
        const auto m = battle::make_monster(game_data()->species("Zubat"), 8, {},
                                            battle::default_moveset(game_data()->species("Zubat"), 8));
        CHECK(m.stats == battle::Stats{25, 13, 11, 15, 12});
        REQUIRE(m.moves.size() == 1);
        CHECK(m.moves[0].move->name == "Leech Life");
    }
}

TEST_SUITE("checkpoint") {
    TEST_CASE("default checkpoint") {
        const Checkpoint cp = testing_support::default_checkpoint();
        REQUIRE(cp.party.size() == 2);
        CHECK(cp.party[0].name() == "Charmander");
        CHECK(cp.party[0].level == 15);
        CHECK(cp.party[0].stats == battle::Stats{39, 23, 20, 26, 22});
        CHECK(cp.party[1].stats == battle::Stats{39, 20, 19, 24, 17});
        CHECK(cp.party[0].moves.size() == 4);
        CHECK(cp.bag.count(battle::ItemKind::Potion) == 5);
        const Checkpoint pilot =
            load_checkpoint(data_dir() / "checkpoints" / "viridian_pilot.json", *game_data());
        CHECK(pilot.party.size() == 1);
    }

    TEST_CASE("party of seven is rejected") {
        std::string party;
        for (int i = 0; i < 7; ++i) {
            if (i) party += ",";
            party += R"({"species":"Pidgey","level":5,"dvs":{"hp":8,"attack":8,"defense":8,"speed":8,"special":8}})";
        }
        const auto path = write_temp("seven", R"({"schema_version":1,"party":[)" + party + R"(],"bag":[]})");
        CHECK(data_error([&] { load_checkpoint(path, *game_data()); }).find("party size must be 1-6") !=
              std::string::npos);
    }

    TEST_CASE("unknown species is named") {
        const auto path = write_temp(
            "unknown",
            R"({"schema_version":1,"party":[{"species":"Missingno","level":5,"dvs":{"hp":8,"attack":8,"defense":8,"speed":8,"special":8}}],"bag":[]})");
        CHECK(data_error([&] { load_checkpoint(path, *game_data()); }).find("Missingno") != std::string::npos);
    }

    TEST_CASE("out of range DV names the field") {
        const auto path = write_temp(
            "dv",
            R"({"schema_version":1,"party":[{"species":"Pidgey","level":5,"dvs":{"hp":16,"attack":8,"defense":8,"speed":8,"special":8}}],"bag":[]})");
        CHECK(data_error([&] { load_checkpoint(path, *game_data()); }).find("dvs.hp") != std::string::npos);
    }

    TEST_CASE("begin_battle starts from the first healthy member") {
        Checkpoint cp = testing_support::default_checkpoint();
        cp.party[0].current_hp = 0;
        cp.party[1].stages.set(battle::Stat::Attack, 2);
        cp.party[1].status = {battle::StatusKind::Confusion, 2};
        const auto s = begin_battle(cp.party, cp.bag, testing_support::monster("Zubat", 8));
        CHECK(s.active == 1);
        CHECK(s.party[1].stages == battle::StatStages{});
        CHECK(s.party[1].status.kind == battle::StatusKind::None);
        CHECK(s.turn_number == 0);
        CHECK(s.outcome == battle::Outcome::Ongoing);
    }
}
