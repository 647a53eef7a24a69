// Exercises the shared library through its C header only.

#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "pokeai/pokeai.h"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::string kData = POKEAI_DATA_DIR;
const std::string kPrompt = std::string(POKEAI_PROMPT_DIR) + "/battle_v1.txt";
const std::string kCheckpoint = kData + "/checkpoints/mt_moon_default.json";

std::string take(char* s) {
    std::string out = s ? s : "";
    pokeai_string_free(s);
    return out;
}

fs::path scratch(const std::string& name) {
    auto dir = fs::temp_directory_path() / ("pokeai_capi_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

json run_config(const fs::path& out) {
    return {{"seed", 3},
            {"battles_per_run", 10},
            {"repetitions", 2},
            {"policy", "heuristic"},
            {"data_dir", kData},
            {"checkpoint", kCheckpoint},
            {"encounters", kData + "/encounters/mt_moon.json"},
            {"prompt", kPrompt},
            {"output_dir", out.string()}};
}

struct Console {
    std::vector<std::string> lines;
    std::size_t next = 0;
    std::string written;
};

long console_read(void* user, char* buf, size_t capacity) {
    auto* c = static_cast<Console*>(user);
    if (c->next >= c->lines.size()) return -1;
    const std::string& l = c->lines[c->next++];
    const size_t n = std::min(l.size(), capacity);
    std::memcpy(buf, l.data(), n);
    return static_cast<long>(n);
}

void console_write(void* user, const char* text, size_t length) {
    static_cast<Console*>(user)->written.append(text, length);
}

}  // namespace

TEST_CASE("status names and errors") {
    CHECK(std::string(pokeai_version()).size() > 0);
    CHECK(std::string(pokeai_status_name(POKEAI_ERR_REPLAY_MISS)) == "replay_miss");
    pokeai_data* data = nullptr;
    CHECK(pokeai_data_load("/nonexistent/data", &data) != POKEAI_OK);
    CHECK(data == nullptr);
    CHECK(std::string(pokeai_last_error()).size() > 0);
    CHECK(pokeai_data_load(kData.c_str(), nullptr) == POKEAI_ERR_INVALID_ARGUMENT);
}

TEST_CASE("validate data") {
    char* report = nullptr;
    REQUIRE(pokeai_validate_data(kData.c_str(), kPrompt.c_str(), &report) == POKEAI_OK);
    const json r = json::parse(take(report));
    CHECK(r["ok"] == true);
    CHECK(r["checked"].size() >= 4);
}

TEST_CASE("battle handle plays to completion") {
    pokeai_data* data = nullptr;
    REQUIRE(pokeai_data_load(kData.c_str(), &data) == POKEAI_OK);
    pokeai_battle* b = nullptr;
    REQUIRE(pokeai_battle_new(data, kCheckpoint.c_str(), "Paras", 8, 17, &b) == POKEAI_OK);
    CHECK(pokeai_battle_new(data, kCheckpoint.c_str(), "Mewtwo", 8, 17, &b) != POKEAI_OK);

    char* state = nullptr;
    REQUIRE(pokeai_battle_state(b, &state) == POKEAI_OK);
    CHECK(json::parse(take(state))["enemy"]["species"] == "Paras");

    char* events = nullptr;
    CHECK(pokeai_battle_step(b, "full", R"({"action": "switch", "index": 1})", &events) == POKEAI_ERR_INVALID_ARGUMENT);
    CHECK(pokeai_battle_step(b, "full", "not json", &events) == POKEAI_ERR_INVALID_ARGUMENT);

    int turns = 0;
    while (pokeai_battle_outcome(b) == 0 && turns < 200) {
        char* actions = nullptr;
        REQUIRE(pokeai_battle_valid_actions(b, "no-escape", &actions) == POKEAI_OK);
        const json valid = json::parse(take(actions));
        REQUIRE(!valid.empty());
        for (const auto& a : valid) CHECK(a["action"] != "run");
        REQUIRE(pokeai_battle_step(b, "no-escape", valid[0].dump().c_str(), &events) == POKEAI_OK);
        CHECK(json::parse(take(events)).is_array());
        ++turns;
    }
    CHECK(pokeai_battle_outcome(b) != 0);
    pokeai_battle_free(b);
    pokeai_data_free(data);
}

TEST_CASE("memory handle") {
    const auto dir = scratch("memory");
    const std::string path = (dir / "m.jsonl").string();
    pokeai_memory* m = nullptr;
    REQUIRE(pokeai_memory_open(path.c_str(), &m) == POKEAI_OK);
    const json rec = {{"text", "Level 5 Squirtle was defeated by a Level 8 Pikachu in Viridian Forest."},
                      {"entities",
                       {{"ally_species", "Squirtle"},
                        {"ally_level", 5},
                        {"enemy_species", "Pikachu"},
                        {"enemy_level", 8},
                        {"location", "Viridian Forest"}}},
                      {"outcome", "lost"}};
    char* id = nullptr;
    REQUIRE(pokeai_memory_insert(m, rec.dump().c_str(), &id) == POKEAI_OK);
    CHECK(take(id) == "mem-1");
    CHECK(pokeai_memory_insert(m, "{\"text\": 3}", &id) != POKEAI_OK);

    char* results = nullptr;
    const json q = {{"ally_species", "Squirtle"}, {"ally_level", 6}, {"enemy_species", "Pikachu"}, {"enemy_level", 9}};
    REQUIRE(pokeai_memory_retrieve(m, q.dump().c_str(), 3, &results) == POKEAI_OK);
    const json hits = json::parse(take(results));
    REQUIRE(hits.size() == 1);
    CHECK(hits[0]["record"]["id"] == "mem-1");
    CHECK(pokeai_memory_retrieve(m, q.dump().c_str(), 0, &results) == POKEAI_ERR_INVALID_ARGUMENT);

    size_t size = 0, dropped = 99;
    CHECK(pokeai_memory_size(m, &size) == POKEAI_OK);
    CHECK(size == 1);
    CHECK(pokeai_memory_compact(m, &dropped) == POKEAI_OK);
    CHECK(dropped == 0);
    pokeai_memory_free(m);
}

TEST_CASE("run eval, ablate and compare") {
    const auto dir = scratch("runs");
    json cfg = run_config(dir);
    char* out = nullptr;
    cfg["run_id"] = "a";
    REQUIRE(pokeai_run_eval(cfg.dump().c_str(), &out) == POKEAI_OK);
    const json a = json::parse(take(out));
    CHECK(a["metrics"]["repetitions"] == 2);
    CHECK(a["summary"].get<std::string>().find("Win rate") != std::string::npos);
    cfg["run_id"] = "b";
    REQUIRE(pokeai_run_eval(cfg.dump().c_str(), &out) == POKEAI_OK);
    const json b = json::parse(take(out));

    int equal = 0;
    REQUIRE(pokeai_runs_equal(a["run_dir"].get<std::string>().c_str(), b["run_dir"].get<std::string>().c_str(),
                              &equal) == POKEAI_OK);
    CHECK(equal == 1);

    cfg["run_id"] = "abl";
    REQUIRE(pokeai_ablate(cfg.dump().c_str(), &out) == POKEAI_OK);
    CHECK(json::parse(take(out))["variants"].size() == 4);

    CHECK(pokeai_run_eval("{\"bogus\": 1}", &out) == POKEAI_ERR_DATA);
    json llm = run_config(dir);
    llm["policy"] = "llm";
    llm["transport"] = "replay";
    llm["cassette"] = (dir / "missing.jsonl").string();
    CHECK(pokeai_run_eval(llm.dump().c_str(), &out) == POKEAI_ERR_IO);
}

TEST_CASE("pilot memory") {
    const auto dir = scratch("pilot");
    const json cfg = {{"data_dir", kData}, {"prompt", kPrompt}, {"output_dir", dir.string()}};
    char* out = nullptr;
    REQUIRE(pokeai_pilot_memory(cfg.dump().c_str(), &out) == POKEAI_OK);
    const json r = json::parse(take(out));
    CHECK(r["pilot_ranked_first"] == true);
    CHECK(r["action"]["action"] == "run");
}

TEST_CASE("interactive play through callbacks") {
    const auto dir = scratch("play");
    json cfg = run_config(dir);
    cfg["battles_per_run"] = 2;
    cfg["repetitions"] = 1;

    Console scripted;
    scripted.lines.assign(500, "1");
    char* out = nullptr;
    REQUIRE(pokeai_play(cfg.dump().c_str(), console_read, console_write, &scripted, &out) == POKEAI_OK);
    CHECK(json::parse(take(out))["metrics"]["battles_per_run"] == 2);
    CHECK(scripted.written.find("Choose an action:") != std::string::npos);

    Console closed;
    closed.lines = {"7", "x"};
    cfg["run_id"] = "closed";
    CHECK(pokeai_play(cfg.dump().c_str(), console_read, console_write, &closed, &out) == POKEAI_ERR_INPUT_CLOSED);
    CHECK(closed.written.find("Please enter a number") != std::string::npos);
}
