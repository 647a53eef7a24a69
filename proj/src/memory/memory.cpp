#include "memory/memory.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <mutex>

#include "common/clock.hpp"
#include "common/errors.hpp"
#include "common/json_util.hpp"

namespace pokeai::memory {

using nlohmann::json;
namespace ju = json_util;

namespace {

constexpr const char* kIdPrefix = "mem-";

void put_optional(json& j, const char* key, const auto& value) {
    if (value) j[key] = *value;
    else j[key] = nullptr;
}

std::optional<std::string> opt_string(const json& obj, const char* key, const std::string& ctx) {
    if (!obj.contains(key) || obj[key].is_null()) return std::nullopt;
    if (!obj[key].is_string()) throw DataError(ctx + "." + key + ": expected a string");
    return obj[key].get<std::string>();
}

std::optional<int> opt_level(const json& obj, const char* key, const std::string& ctx) {
    if (!obj.contains(key) || obj[key].is_null()) return std::nullopt;
    return ju::require_int(obj, key, ctx, 1, 100);
}

long id_number(const std::string& id) {
    if (id.rfind(kIdPrefix, 0) != 0) return 0;
    try {
        return std::stol(id.substr(std::char_traits<char>::length(kIdPrefix)));
    } catch (const std::exception&) {
        return 0;
    }
}

void validate(const MemoryRecord& r) {
    if (r.text.empty()) throw Error(ErrorCode::InvalidArgument, "memory record text must be non-empty");
    for (const auto& level : {r.entities.ally_level, r.entities.enemy_level}) {
        if (level && (*level < 1 || *level > 100))
            throw Error(ErrorCode::InvalidArgument, "memory record level must be in [1, 100]");
    }
}

double level_term(const std::optional<int>& a, const std::optional<int>& b) {
    if (!a || !b) return 0.0;
    return std::max(0.0, 1.0 - std::abs(*a - *b) / 5.0);
}

}  // namespace

std::string_view outcome_name(RecordOutcome outcome) {
    switch (outcome) {
        case RecordOutcome::Won: return "won";
        case RecordOutcome::Lost: return "lost";
        case RecordOutcome::Escaped: return "escaped";
    }
    return "lost";
}

std::optional<RecordOutcome> parse_outcome(std::string_view name) {
    if (name == "won") return RecordOutcome::Won;
    if (name == "lost") return RecordOutcome::Lost;
    if (name == "escaped") return RecordOutcome::Escaped;
    return std::nullopt;
}

json to_json(const MemoryRecord& r) {
    json e = json::object();
    put_optional(e, "ally_species", r.entities.ally_species);
    put_optional(e, "ally_level", r.entities.ally_level);
    put_optional(e, "enemy_species", r.entities.enemy_species);
    put_optional(e, "enemy_level", r.entities.enemy_level);
    put_optional(e, "location", r.entities.location);
    return {{"id", r.id},
            {"text", r.text},
            {"entities", e},
            {"outcome", outcome_name(r.outcome)},
            {"created_at", r.created_at}};
}

MemoryRecord record_from_json(const json& j, const std::string& ctx) {
    if (!j.is_object()) throw DataError(ctx + ": expected an object");
    MemoryRecord r;
    r.id = ju::require_string(j, "id", ctx);
    r.text = ju::require_string(j, "text", ctx);
    if (r.text.empty()) throw DataError(ctx + ".text: must be non-empty");
    const json& e = ju::require(j, "entities", ctx);
    const std::string ectx = ctx + ".entities";
    r.entities.ally_species = opt_string(e, "ally_species", ectx);
    r.entities.ally_level = opt_level(e, "ally_level", ectx);
    r.entities.enemy_species = opt_string(e, "enemy_species", ectx);
    r.entities.enemy_level = opt_level(e, "enemy_level", ectx);
    r.entities.location = opt_string(e, "location", ectx);
    const std::string outcome = ju::require_string(j, "outcome", ctx);
    const auto parsed = parse_outcome(outcome);
    if (!parsed) throw DataError(ctx + ".outcome: unknown outcome '" + outcome + "'");
    r.outcome = *parsed;
    r.created_at = ju::require_string(j, "created_at", ctx);
    return r;
}

double score(const Entities& rec, const Entities& q) {
    double s = 0.0;
    if (rec.ally_species && rec.enemy_species && rec.ally_species == q.ally_species &&
        rec.enemy_species == q.enemy_species)
        s += 2.0;
    if (rec.location && rec.location == q.location) s += 1.0;
    s += level_term(rec.ally_level, q.ally_level);
    s += level_term(rec.enemy_level, q.enemy_level);
    return s;
}

MemoryStore::MemoryStore(std::filesystem::path path) : path_(std::move(path)) { load(); }

void MemoryStore::load() {
    records_.clear();
    file_lines_ = 0;
    next_id_ = 1;
    std::ifstream in(path_);
    if (!in) {
        if (std::filesystem::exists(path_)) throw IoError("cannot read memory store " + path_.string());
        return;
    }
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        ++file_lines_;
        const std::string ctx = path_.filename().string() + ":" + std::to_string(lineno);
        const json j = json::parse(line, nullptr, false);
        if (j.is_discarded()) throw DataError(ctx + ": malformed JSON line");
        MemoryRecord r = record_from_json(j, ctx);
        next_id_ = std::max(next_id_, id_number(r.id) + 1);
        auto existing = std::find_if(records_.begin(), records_.end(), [&](const auto& x) { return x.id == r.id; });
        if (existing != records_.end()) *existing = std::move(r);
        else records_.push_back(std::move(r));
    }
}

std::string MemoryStore::insert(MemoryRecord record) {
    validate(record);
    std::unique_lock lock(mutex_);
    record.id = kIdPrefix + std::to_string(next_id_);
    if (record.created_at.empty()) record.created_at = utc_timestamp();

    if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
    std::ofstream out(path_, std::ios::app);
    out << to_json(record).dump() << "\n";
    out.flush();
    if (!out) throw IoError("cannot append to memory store " + path_.string());

    ++next_id_;
    ++file_lines_;
    records_.push_back(record);
    return record.id;
}

std::vector<ScoredRecord> MemoryStore::retrieve(const MemoryQuery& query) const {
    if (query.k < 1) throw Error(ErrorCode::InvalidArgument, "memory query k must be at least 1");
    std::shared_lock lock(mutex_);
    std::vector<ScoredRecord> scored;
    scored.reserve(records_.size());
    // Walk newest first so the stable sort leaves ties in recency order.
    for (auto it = records_.rbegin(); it != records_.rend(); ++it)
        scored.push_back({*it, score(it->entities, query.entities)});
    std::stable_sort(scored.begin(), scored.end(),
                     [](const ScoredRecord& a, const ScoredRecord& b) { return a.score > b.score; });
    if (scored.size() > static_cast<std::size_t>(query.k)) scored.resize(static_cast<std::size_t>(query.k));
    return scored;
}

std::vector<MemoryRecord> MemoryStore::records() const {
    std::shared_lock lock(mutex_);
    return records_;
}

std::size_t MemoryStore::size() const {
    std::shared_lock lock(mutex_);
    return records_.size();
}

std::size_t MemoryStore::compact() {
    std::unique_lock lock(mutex_);
    const auto tmp = path_.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        for (const auto& r : records_) out << to_json(r).dump() << "\n";
        out.flush();
        if (!out) throw IoError("cannot write " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path_, ec);
    if (ec) throw IoError("cannot replace memory store " + path_.string() + ": " + ec.message());
    const std::size_t dropped = file_lines_ - records_.size();
    file_lines_ = records_.size();
    return dropped;
}

std::vector<std::string> format_snippets(const std::vector<MemoryRecord>& records) {
    std::vector<std::string> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back("[" + std::string(outcome_name(r.outcome)) + "] " + r.text);
    return out;
}

bool memory_aware_rule(const battle::BattleState& state, const std::vector<MemoryRecord>& recalled,
                       bool run_allowed) {
    if (!run_allowed) return false;
    const auto& enemy = state.enemy;
    return std::any_of(recalled.begin(), recalled.end(), [&](const MemoryRecord& r) {
        return r.outcome == RecordOutcome::Lost && r.entities.enemy_species == enemy.name() &&
               (!r.entities.enemy_level || *r.entities.enemy_level <= enemy.level + 2);
    });
}

Entities entities_for(const battle::BattleState& state, const std::string& location) {
    Entities e;
    e.ally_species = state.active_monster().name();
    e.ally_level = state.active_monster().level;
    e.enemy_species = state.enemy.name();
    e.enemy_level = state.enemy.level;
    if (!location.empty()) e.location = location;
    return e;
}

}  // namespace pokeai::memory
