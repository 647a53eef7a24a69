// Command-line front end. Talks to the engine only through the C API.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "pokeai/pokeai.h"

using nlohmann::json;

namespace {

constexpr int kExitUsage = 64;
constexpr int kExitMismatch = 10;

struct Owned {
    char* s = nullptr;
    ~Owned() { pokeai_string_free(s); }
    std::string str() const { return s ? s : ""; }
};

int report(pokeai_status status) {
    if (status != POKEAI_OK)
        std::cerr << "error (" << pokeai_status_name(status) << "): " << pokeai_last_error() << "\n";
    return static_cast<int>(status);
}

std::optional<json> read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        std::cerr << "error (io): cannot read " << path << "\n";
        return std::nullopt;
    }
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) {
        std::cerr << "error (data): " << path << " is not valid JSON\n";
        return std::nullopt;
    }
    return j;
}

// Flags shared by run-eval, ablate and play. Values only override the config
// file when given on the command line.
struct RunFlags {
    std::string config_file;
    std::uint64_t seed = 0;
    int battles = 0, repetitions = 0, jobs = 0, memory_k = 0;
    std::string policy, mask, output_dir, run_id, data_dir, checkpoint, encounters, prompt;
    std::string transport, cassette, model, base_url, memory_store;
    bool record_losses = false;
    std::vector<CLI::Option*> opts;

    void add(CLI::App* app, bool with_policy) {
        app->add_option("--config", config_file, "Run configuration file (JSON)")->check(CLI::ExistingFile);
        opts.push_back(app->add_option("--seed", seed, "Master seed"));
        opts.push_back(app->add_option("--battles", battles, "Battles per run")->check(CLI::PositiveNumber));
        opts.push_back(app->add_option("--repetitions", repetitions, "Repetitions")->check(CLI::PositiveNumber));
        opts.push_back(app->add_option("--jobs", jobs, "Repetitions run in parallel")->check(CLI::PositiveNumber));
        if (with_policy)
            opts.push_back(app->add_option("--policy", policy, "random, heuristic, memory-aware, human or llm"));
        opts.push_back(app->add_option("--mask", mask, "full, no-escape, no-switch or no-item"));
        opts.push_back(app->add_option("--output-dir", output_dir, "Directory that receives run folders"));
        opts.push_back(app->add_option("--run-id", run_id, "Run folder name"));
        opts.push_back(app->add_option("--data-dir", data_dir, "Game data directory"));
        opts.push_back(app->add_option("--checkpoint", checkpoint, "Starting party and bag"));
        opts.push_back(app->add_option("--encounters", encounters, "Encounter table"));
        opts.push_back(app->add_option("--prompt", prompt, "Prompt template"));
        opts.push_back(app->add_option("--transport", transport, "live, record or replay (llm policy)"));
        opts.push_back(app->add_option("--cassette", cassette, "Cassette file for record/replay"));
        opts.push_back(app->add_option("--model", model, "Chat model name"));
        opts.push_back(app->add_option("--base-url", base_url, "Chat endpoint base URL"));
        opts.push_back(app->add_option("--memory-store", memory_store, "Enable memory with this store file"));
        opts.push_back(app->add_option("--memory-k", memory_k, "Memories recalled per decision"));
        opts.push_back(app->add_flag("--record-losses", record_losses, "Write a memory after each loss"));
    }

    bool given(const char* name) const {
        for (auto* o : opts)
            if (o->check_lname(std::string(name).substr(2)) && o->count() > 0) return true;
        return false;
    }

    std::optional<json> build() const {
        json cfg = json::object();
        if (!config_file.empty()) {
            auto file = read_json_file(config_file);
            if (!file) return std::nullopt;
            cfg = *file;
        }
        if (given("--seed")) cfg["seed"] = seed;
        if (given("--battles")) cfg["battles_per_run"] = battles;
        if (given("--repetitions")) cfg["repetitions"] = repetitions;
        if (given("--jobs")) cfg["jobs"] = jobs;
        if (given("--policy")) cfg["policy"] = policy;
        if (given("--mask")) cfg["mask"] = mask;
        if (given("--output-dir")) cfg["output_dir"] = output_dir;
        if (given("--run-id")) cfg["run_id"] = run_id;
        if (given("--data-dir")) cfg["data_dir"] = data_dir;
        if (given("--checkpoint")) cfg["checkpoint"] = checkpoint;
        if (given("--encounters")) cfg["encounters"] = encounters;
        if (given("--prompt")) cfg["prompt"] = prompt;
        if (given("--transport")) cfg["transport"] = transport;
        if (given("--cassette")) cfg["cassette"] = cassette;
        if (given("--model")) cfg["llm"]["model"] = model;
        if (given("--base-url")) cfg["llm"]["base_url"] = base_url;
        if (given("--memory-store")) {
            cfg["memory"]["enabled"] = true;
            cfg["memory"]["store_path"] = memory_store;
        }
        if (given("--memory-k")) cfg["memory"]["k"] = memory_k;
        if (record_losses) cfg["memory"]["record_losses"] = true;
        return cfg;
    }
};

int cmd_run_eval(const RunFlags& flags) {
    const auto cfg = flags.build();
    if (!cfg) return POKEAI_ERR_IO;
    Owned out;
    if (const auto st = pokeai_run_eval(cfg->dump().c_str(), &out.s); st != POKEAI_OK) return report(st);
    std::cout << json::parse(out.str())["summary"].get<std::string>();
    return 0;
}

int cmd_ablate(const RunFlags& flags) {
    auto cfg = flags.build();
    if (!cfg) return POKEAI_ERR_IO;
    if (!cfg->contains("policy")) (*cfg)["policy"] = "heuristic";
    Owned out;
    if (const auto st = pokeai_ablate(cfg->dump().c_str(), &out.s); st != POKEAI_OK) return report(st);
    const json result = json::parse(out.str());
    std::cout << result["table"].get<std::string>() << "Output: " << result["run_dir"].get<std::string>() << "\n";
    return 0;
}

long read_stdin_line(void*, char* buf, size_t capacity) {
    std::string line;
    if (!std::getline(std::cin, line)) return -1;
    const size_t n = std::min(line.size(), capacity);
    std::copy_n(line.data(), n, buf);
    return static_cast<long>(n);
}

void write_stdout(void*, const char* text, size_t length) {
    std::cout.write(text, static_cast<std::streamsize>(length));
    std::cout.flush();
}

int cmd_play(const RunFlags& flags) {
    auto cfg = flags.build();
    if (!cfg) return POKEAI_ERR_IO;
    if (!cfg->contains("repetitions")) (*cfg)["repetitions"] = 1;
    if (!cfg->contains("run_id")) (*cfg)["run_id"] = "human-play";
    Owned out;
    const auto st = pokeai_play(cfg->dump().c_str(), read_stdin_line, write_stdout, nullptr, &out.s);
    if (st == POKEAI_ERR_INPUT_CLOSED) {
        std::cerr << "input closed; partial log kept in the run directory\n";
        return report(st);
    }
    if (st != POKEAI_OK) return report(st);
    std::cout << "\n" << json::parse(out.str())["summary"].get<std::string>();
    return 0;
}

int cmd_replay(const std::string& run_dir, const std::string& cassette, const std::string& output_dir,
               const std::string& run_id) {
    auto original = read_json_file(run_dir + "/config.json");
    if (!original) return POKEAI_ERR_IO;
    json cfg = *original;
    cfg["transport"] = "replay";
    if (!cassette.empty()) cfg["cassette"] = cassette;
    if (!output_dir.empty()) cfg["output_dir"] = output_dir;
    cfg["run_id"] = run_id.empty() ? cfg.value("run_id", std::string("run")) + "-replay" : run_id;
    cfg["jobs"] = 1;

    const std::uint64_t calls_before = pokeai_live_call_count();
    Owned out;
    if (const auto st = pokeai_run_eval(cfg.dump().c_str(), &out.s); st != POKEAI_OK) return report(st);
    const json result = json::parse(out.str());
    std::cout << result["summary"].get<std::string>();

    int equal = 0;
    if (const auto st = pokeai_runs_equal(run_dir.c_str(), result["run_dir"].get<std::string>().c_str(), &equal);
        st != POKEAI_OK)
        return report(st);
    const std::uint64_t live_calls = pokeai_live_call_count() - calls_before;
    std::cout << "Live network calls: " << live_calls << "\n";
    std::cout << "Matches original run: " << (equal ? "yes" : "no") << "\n";
    return equal && live_calls == 0 ? 0 : kExitMismatch;
}

int cmd_pilot(const json& cfg) {
    Owned out;
    if (const auto st = pokeai_pilot_memory(cfg.dump().c_str(), &out.s); st != POKEAI_OK) return report(st);
    const json r = json::parse(out.str());
    std::cout << "Retrieved memories:\n";
    int rank = 1;
    for (const auto& m : r["retrieved"])
        std::cout << "  " << rank++ << ". [" << m["id"].get<std::string>() << "] score " << m["score"].get<double>()
                  << "  " << m["text"].get<std::string>() << "\n";
    std::cout << "Retrieval hit: " << (r["pilot_ranked_first"].get<bool>() ? "yes" : "no") << "\n";
    std::cout << "Final action: " << r["action"]["action"].get<std::string>() << "\n";
    std::cout << "Battle state after the turn: " << r["outcome_after_turn"].get<std::string>() << "\n";

    const std::string dir = cfg.value("output_dir", std::string("runs")) + "/pilot-memory";
    std::ofstream(dir + "/result.json") << r.dump(2) << "\n";
    std::cout << "Output: " << dir << "\n";
    return r["pilot_ranked_first"].get<bool>() && r["action"]["action"] == "run" ? 0 : kExitMismatch;
}

int cmd_validate(const std::string& data_dir, const std::string& prompt) {
    Owned out;
    if (const auto st = pokeai_validate_data(data_dir.c_str(), prompt.empty() ? nullptr : prompt.c_str(), &out.s);
        st != POKEAI_OK)
        return report(st);
    const json r = json::parse(out.str());
    for (const auto& f : r["checked"]) std::cout << "ok  " << f.get<std::string>() << "\n";
    std::cout << "All data files are valid.\n";
    return 0;
}

int cmd_compact(const std::string& store) {
    pokeai_memory* mem = nullptr;
    if (const auto st = pokeai_memory_open(store.c_str(), &mem); st != POKEAI_OK) return report(st);
    size_t dropped = 0, size = 0;
    auto st = pokeai_memory_compact(mem, &dropped);
    if (st == POKEAI_OK) st = pokeai_memory_size(mem, &size);
    pokeai_memory_free(mem);
    if (st != POKEAI_OK) return report(st);
    std::cout << "Compacted " << store << ": " << size << " records kept, " << dropped << " stale lines dropped.\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Wild-battle evaluation harness for Pokemon-playing agents"};
    app.require_subcommand(1);
    app.set_version_flag("--version", pokeai_version());

    RunFlags eval_flags, ablate_flags, play_flags;
    auto* run_eval = app.add_subcommand("run-eval", "Run the gauntlet and write metrics");
    eval_flags.add(run_eval, true);
    auto* ablate = app.add_subcommand("ablate", "Sweep full, no-escape, no-switch and no-item masks");
    ablate_flags.add(ablate, true);
    auto* play = app.add_subcommand("play", "Play the gauntlet yourself in the terminal");
    play_flags.add(play, false);

    std::string replay_dir, replay_cassette, replay_output, replay_id;
    auto* replay = app.add_subcommand("replay", "Rerun a recorded LLM run from its cassette");
    replay->add_option("--run-dir", replay_dir, "Directory of the recorded run")->required()->check(CLI::ExistingDirectory);
    replay->add_option("--cassette", replay_cassette, "Cassette file (default: the one named in config.json)");
    replay->add_option("--output-dir", replay_output, "Directory for the replayed run");
    replay->add_option("--run-id", replay_id, "Folder name for the replayed run");

    std::string pilot_data = "data", pilot_prompt = "prompts/battle_v1.txt", pilot_store, pilot_output = "runs";
    std::uint64_t pilot_seed = 0;
    auto* pilot = app.add_subcommand("pilot-memory", "Recall a past loss and decide to run");
    pilot->add_option("--data-dir", pilot_data, "Game data directory");
    pilot->add_option("--prompt", pilot_prompt, "Prompt template");
    pilot->add_option("--store", pilot_store, "Memory store file (default: fresh store in the output directory)");
    pilot->add_option("--output-dir", pilot_output, "Output directory");
    pilot->add_option("--seed", pilot_seed, "Seed");

    std::string validate_data = "data", validate_prompt = "prompts/battle_v1.txt";
    auto* validate = app.add_subcommand("validate-data", "Check every data file against its schema");
    validate->add_option("--data-dir", validate_data, "Game data directory");
    validate->add_option("--prompt", validate_prompt, "Prompt template");

    std::string compact_store;
    auto* compact = app.add_subcommand("compact-memory", "Rewrite a memory store without stale lines");
    compact->add_option("--store", compact_store, "Memory store file")->required()->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitUsage;
    }

    if (*run_eval) return cmd_run_eval(eval_flags);
    if (*ablate) return cmd_ablate(ablate_flags);
    if (*play) return cmd_play(play_flags);
    if (*replay) return cmd_replay(replay_dir, replay_cassette, replay_output, replay_id);
    if (*pilot)
        return cmd_pilot({{"data_dir", pilot_data},
                          {"prompt", pilot_prompt},
                          {"store_path", pilot_store},
                          {"output_dir", pilot_output},
                          {"seed", pilot_seed}});
    if (*validate) return cmd_validate(validate_data, validate_prompt);
    if (*compact) return cmd_compact(compact_store);
    return kExitUsage;
}
