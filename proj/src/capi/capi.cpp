#include "pokeai/pokeai.h"

#include <cstring>
#include <istream>
#include <ostream>
#include <streambuf>

#include <json.hpp>

#include "agent_io/agent_io.hpp"
#include "battle/serialize.hpp"
#include "harness/harness.hpp"
#include "memory/memory.hpp"
#include "policies/transport.hpp"

using namespace pokeai;
using nlohmann::json;
namespace fs = std::filesystem;

struct pokeai_data {
    battle::GameDataPtr data;
    std::shared_ptr<const battle::BattleEngine> engine;
};

struct pokeai_battle {
    battle::GameDataPtr data;
    std::shared_ptr<const battle::BattleEngine> engine;
    battle::BattleState state;
    Rng rng{0};
};

struct pokeai_memory {
    std::unique_ptr<memory::MemoryStore> store;
};

namespace {

thread_local std::string g_last_error;

pokeai_status fail(pokeai_status status, const std::string& message) {
    g_last_error = message;
    return status;
}

template <class F>
pokeai_status guard(F&& fn) {
    try {
        fn();
        return POKEAI_OK;
    } catch (const Error& e) {
        return fail(static_cast<pokeai_status>(e.code()), e.what());
    } catch (const json::exception& e) {
        return fail(POKEAI_ERR_INVALID_ARGUMENT, std::string("malformed JSON: ") + e.what());
    } catch (const std::bad_alloc&) {
        return fail(POKEAI_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(POKEAI_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(POKEAI_ERR_INTERNAL, "unknown error");
    }
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

void require_arg(const void* p, const char* name) {
    if (!p) throw Error(ErrorCode::InvalidArgument, std::string(name) + " must not be null");
}

json parse_json_arg(const char* text, const char* name) {
    require_arg(text, name);
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw Error(ErrorCode::InvalidArgument, std::string(name) + " is not valid JSON");
    return j;
}

harness::RunConfig run_config(const char* config_json) {
    const json j = parse_json_arg(config_json, "config_json");
    return harness::config_from_json(j);
}

json run_result(const harness::RunOutput& out, const harness::RunConfig& config) {
    return {{"run_dir", out.run_dir.string()},
            {"metrics", out.metrics.to_json()},
            {"summary", harness::summary_text(out, config)}};
}

json entities_json(const json& j, const char* ctx) {
    // Reuse the record parser by wrapping the entities in a dummy record.
    json wrapper = {{"id", "query"}, {"text", "query"}, {"outcome", "lost"}, {"created_at", ""}, {"entities", j}};
    memory::record_from_json(wrapper, ctx);
    return wrapper;
}

class CallbackInBuf : public std::streambuf {
public:
    CallbackInBuf(pokeai_read_line_fn fn, void* user) : fn_(fn), user_(user) {}

protected:
    int_type underflow() override {
        if (gptr() < egptr()) return traits_type::to_int_type(*gptr());
        std::vector<char> tmp(4096);
        const long n = fn_(user_, tmp.data(), tmp.size());
        if (n < 0) return traits_type::eof();
        line_.assign(tmp.data(), static_cast<std::size_t>(std::min<long>(n, static_cast<long>(tmp.size()))));
        line_ += '\n';
        setg(line_.data(), line_.data(), line_.data() + line_.size());
        return traits_type::to_int_type(*gptr());
    }

private:
    pokeai_read_line_fn fn_;
    void* user_;
    std::string line_;
};

class CallbackOutBuf : public std::streambuf {
public:
    CallbackOutBuf(pokeai_write_fn fn, void* user) : fn_(fn), user_(user) {}
    ~CallbackOutBuf() override { sync(); }

protected:
    int_type overflow(int_type ch) override {
        if (ch != traits_type::eof()) buffer_ += static_cast<char>(ch);
        if (ch == '\n') sync();
        return ch;
    }
    std::streamsize xsputn(const char* s, std::streamsize n) override {
        buffer_.append(s, static_cast<std::size_t>(n));
        return n;
    }
    int sync() override {
        if (!buffer_.empty()) fn_(user_, buffer_.data(), buffer_.size());
        buffer_.clear();
        return 0;
    }

private:
    pokeai_write_fn fn_;
    void* user_;
    std::string buffer_;
};

}  // namespace

extern "C" {

const char* pokeai_version(void) { return "0.1.0"; }

const char* pokeai_last_error(void) { return g_last_error.c_str(); }

const char* pokeai_status_name(pokeai_status status) {
    switch (status) {
        case POKEAI_OK: return "ok";
        case POKEAI_ERR_INTERNAL: return "internal";
        case POKEAI_ERR_INVALID_ARGUMENT: return "invalid_argument";
        case POKEAI_ERR_DATA: return "data";
        case POKEAI_ERR_IO: return "io";
        case POKEAI_ERR_ENDPOINT: return "endpoint";
        case POKEAI_ERR_REPLAY_MISS: return "replay_miss";
        case POKEAI_ERR_INPUT_CLOSED: return "input_closed";
        case POKEAI_ERR_CONTRACT: return "contract";
        case POKEAI_ERR_DEADLOCK: return "deadlock";
    }
    return "unknown";
}

void pokeai_string_free(char* s) { std::free(s); }

uint64_t pokeai_live_call_count(void) { return policies::LiveTransport::total_calls(); }

pokeai_status pokeai_data_load(const char* data_dir, pokeai_data** out) {
    return guard([&] {
        require_arg(data_dir, "data_dir");
        require_arg(out, "out");
        auto d = std::make_unique<pokeai_data>();
        d->data = battle::GameData::load(data_dir);
        d->engine = std::make_shared<const battle::BattleEngine>(d->data);
        *out = d.release();
    });
}

void pokeai_data_free(pokeai_data* data) { delete data; }

pokeai_status pokeai_validate_data(const char* data_dir, const char* prompt_path, char** report) {
    return guard([&] {
        require_arg(data_dir, "data_dir");
        require_arg(report, "report");
        const fs::path dir = data_dir;
        json checked = json::array();
        const auto data = battle::GameData::load(dir);
        checked.push_back("type_chart.json, stage_tables.json, mechanics.json, moves.json, species.json");
        for (const char* sub : {"encounters", "checkpoints"}) {
            if (!fs::is_directory(dir / sub)) throw DataError(std::string(sub) + " directory missing under " + dir.string());
            std::vector<fs::path> files;
            for (const auto& entry : fs::directory_iterator(dir / sub))
                if (entry.path().extension() == ".json") files.push_back(entry.path());
            std::sort(files.begin(), files.end());
            for (const auto& f : files) {
                if (std::string(sub) == "encounters") scenario::load_encounter_table(f, *data);
                else scenario::load_checkpoint(f, *data);
                checked.push_back(std::string(sub) + "/" + f.filename().string());
            }
        }
        if (prompt_path) {
            agent_io::PromptTemplate::load(prompt_path);
            checked.push_back(fs::path(prompt_path).filename().string());
        }
        *report = dup_string(json{{"ok", true}, {"checked", checked}}.dump());
    });
}

pokeai_status pokeai_battle_new(const pokeai_data* data, const char* checkpoint_path, const char* species, int level,
                                uint64_t seed, pokeai_battle** out) {
    return guard([&] {
        require_arg(data, "data");
        require_arg(checkpoint_path, "checkpoint_path");
        require_arg(species, "species");
        require_arg(out, "out");
        if (level < 1 || level > 100) throw Error(ErrorCode::InvalidArgument, "level must be in [1, 100]");
        const auto* spec = data->data->find_species(species);
        if (!spec) throw Error(ErrorCode::InvalidArgument, std::string("unknown species '") + species + "'");
        const auto cp = scenario::load_checkpoint(checkpoint_path, *data->data);
        Rng encounter(Rng::derive_seed(seed, streams::kEncounter, 0));
        auto b = std::make_unique<pokeai_battle>();
        b->data = data->data;
        b->engine = data->engine;
        b->state = scenario::begin_battle(cp.party, cp.bag, scenario::spawn_wild(*spec, level, encounter));
        b->rng = Rng(Rng::derive_seed(seed, streams::kBattle, 0));
        *out = b.release();
    });
}

void pokeai_battle_free(pokeai_battle* battle) { delete battle; }

pokeai_status pokeai_battle_state(const pokeai_battle* b, char** state_json) {
    return guard([&] {
        require_arg(b, "battle");
        require_arg(state_json, "state_json");
        *state_json = dup_string(battle::to_json(b->state).dump());
    });
}

pokeai_status pokeai_battle_valid_actions(const pokeai_battle* b, const char* mask, char** actions_json) {
    return guard([&] {
        require_arg(b, "battle");
        require_arg(actions_json, "actions_json");
        const auto m = harness::mask_from_name(mask ? mask : "full");
        json arr = json::array();
        if (b->state.outcome == battle::Outcome::Ongoing) {
            for (const auto& a : b->engine->valid_actions(b->state, m))
                arr.push_back(json::parse(agent_io::to_wire(agent_io::to_request(a, b->state))));
        }
        *actions_json = dup_string(arr.dump());
    });
}

pokeai_status pokeai_battle_step(pokeai_battle* b, const char* mask, const char* action_json, char** events_json) {
    return guard([&] {
        require_arg(b, "battle");
        require_arg(action_json, "action_json");
        require_arg(events_json, "events_json");
        if (b->state.outcome != battle::Outcome::Ongoing)
            throw Error(ErrorCode::InvalidArgument, "the battle is already over");
        const auto m = harness::mask_from_name(mask ? mask : "full");
        const auto valid = b->engine->valid_actions(b->state, m);
        const auto req = agent_io::parse_action(action_json);
        const auto action = agent_io::validate_action(req, valid, b->state);
        const battle::Action enemy = b->state.forced_switch_pending ? battle::Action{battle::action::Struggle{}}
                                                                    : b->engine->enemy_policy(b->state, b->rng);
        const auto events = b->engine->resolve_turn(b->state, action, enemy, b->rng);
        *events_json = dup_string(battle::to_json(events).dump());
    });
}

int pokeai_battle_outcome(const pokeai_battle* b) { return b ? static_cast<int>(b->state.outcome) : -1; }

pokeai_status pokeai_memory_open(const char* path, pokeai_memory** out) {
    return guard([&] {
        require_arg(path, "path");
        require_arg(out, "out");
        auto m = std::make_unique<pokeai_memory>();
        m->store = std::make_unique<memory::MemoryStore>(path);
        *out = m.release();
    });
}

void pokeai_memory_free(pokeai_memory* memory) { delete memory; }

pokeai_status pokeai_memory_insert(pokeai_memory* m, const char* record_json, char** id) {
    return guard([&] {
        require_arg(m, "memory");
        require_arg(id, "id");
        json j = parse_json_arg(record_json, "record_json");
        if (!j.is_object()) throw Error(ErrorCode::InvalidArgument, "record_json must be an object");
        j["id"] = "pending";
        if (!j.contains("created_at")) j["created_at"] = "";
        if (!j.contains("entities")) j["entities"] = json::object();
        memory::MemoryRecord r = memory::record_from_json(j, "record");
        r.id.clear();
        *id = dup_string(m->store->insert(std::move(r)));
    });
}

pokeai_status pokeai_memory_retrieve(const pokeai_memory* m, const char* query_json, int k, char** results_json) {
    return guard([&] {
        require_arg(m, "memory");
        require_arg(results_json, "results_json");
        const json q = parse_json_arg(query_json, "query_json");
        const auto parsed = memory::record_from_json(entities_json(q, "query"), "query");
        json arr = json::array();
        for (const auto& s : m->store->retrieve({parsed.entities, k}))
            arr.push_back({{"record", memory::to_json(s.record)}, {"score", s.score}});
        *results_json = dup_string(arr.dump());
    });
}

pokeai_status pokeai_memory_size(const pokeai_memory* m, size_t* size) {
    return guard([&] {
        require_arg(m, "memory");
        require_arg(size, "size");
        *size = m->store->size();
    });
}

pokeai_status pokeai_memory_compact(pokeai_memory* m, size_t* dropped) {
    return guard([&] {
        require_arg(m, "memory");
        const std::size_t n = m->store->compact();
        if (dropped) *dropped = n;
    });
}

pokeai_status pokeai_run_eval(const char* config_json, char** result_json) {
    return guard([&] {
        require_arg(result_json, "result_json");
        const auto config = run_config(config_json);
        const auto out = harness::run_eval(config);
        *result_json = dup_string(run_result(out, config).dump());
    });
}

pokeai_status pokeai_ablate(const char* config_json, char** result_json) {
    return guard([&] {
        require_arg(result_json, "result_json");
        const auto config = run_config(config_json);
        const auto rows = harness::ablation_sweep(config);
        json variants = json::array();
        for (const auto& r : rows) variants.push_back({{"variant", r.variant}, {"metrics", r.metrics.to_json()}});
        *result_json = dup_string(
            json{{"run_dir", config.run_dir().string()}, {"variants", variants}, {"table", harness::ablation_table(rows)}}
                .dump());
    });
}

pokeai_status pokeai_pilot_memory(const char* config_json, char** result_json) {
    return guard([&] {
        require_arg(result_json, "result_json");
        harness::PilotConfig pc;
        if (config_json) {
            const json j = parse_json_arg(config_json, "config_json");
            pc.data_dir = j.value("data_dir", pc.data_dir);
            pc.prompt = j.value("prompt", pc.prompt);
            pc.store_path = j.value("store_path", pc.store_path);
            pc.output_dir = j.value("output_dir", pc.output_dir);
            pc.seed = j.value("seed", pc.seed);
        }
        const auto r = harness::run_pilot_memory(pc);
        json retrieved = json::array();
        for (const auto& s : r.retrieved)
            retrieved.push_back({{"id", s.record.id}, {"text", s.record.text}, {"score", s.score}});
        *result_json = dup_string(json{{"pilot_id", r.pilot_id},
                                       {"pilot_ranked_first", r.pilot_ranked_first},
                                       {"retrieved", retrieved},
                                       {"snippets", r.snippets},
                                       {"action", json::parse(r.action_wire)},
                                       {"outcome_after_turn", battle::outcome_name(r.outcome_after_turn)},
                                       {"prompt", r.prompt_user}}
                                      .dump());
    });
}

pokeai_status pokeai_play(const char* config_json, pokeai_read_line_fn read_line, pokeai_write_fn write, void* user,
                          char** result_json) {
    return guard([&] {
        require_arg(reinterpret_cast<const void*>(read_line), "read_line");
        require_arg(reinterpret_cast<const void*>(write), "write");
        require_arg(result_json, "result_json");
        auto config = run_config(config_json);
        config.policy = harness::PolicyKind::Human;
        config.jobs = 1;
        const auto ctx = harness::RunContext::load(config);
        CallbackInBuf inbuf(read_line, user);
        CallbackOutBuf outbuf(write, user);
        std::istream in(&inbuf);
        std::ostream out(&outbuf);
        const auto result = harness::repeat_and_aggregate(config, ctx, [&](int) {
            return std::make_unique<policies::HumanPolicy>(in, out);
        });
        out.flush();
        *result_json = dup_string(run_result(result, config).dump());
    });
}

pokeai_status pokeai_runs_equal(const char* run_dir_a, const char* run_dir_b, int* equal) {
    return guard([&] {
        require_arg(run_dir_a, "run_dir_a");
        require_arg(run_dir_b, "run_dir_b");
        require_arg(equal, "equal");
        const fs::path a = run_dir_a, b = run_dir_b;
        *equal = harness::canonical_jsonl(a / "turns.jsonl") == harness::canonical_jsonl(b / "turns.jsonl") &&
                 harness::canonical_json_file(a / "metrics.json") == harness::canonical_json_file(b / "metrics.json");
    });
}

}  // extern "C"
