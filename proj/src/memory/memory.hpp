#pragma once

// Append-only JSONL memory bank with entity-overlap retrieval.

#include <filesystem>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "battle/types.hpp"

namespace pokeai::memory {

enum class RecordOutcome { Won, Lost, Escaped };

std::string_view outcome_name(RecordOutcome outcome);
std::optional<RecordOutcome> parse_outcome(std::string_view name);

struct Entities {
    std::optional<std::string> ally_species;
    std::optional<int> ally_level;
    std::optional<std::string> enemy_species;
    std::optional<int> enemy_level;
    std::optional<std::string> location;

    friend bool operator==(const Entities&, const Entities&) = default;
};

struct MemoryRecord {
    std::string id;  // assigned by the store
    std::string text;
    Entities entities;
    RecordOutcome outcome = RecordOutcome::Lost;
    std::string created_at;  // ISO-8601 UTC, assigned by the store when empty

    friend bool operator==(const MemoryRecord&, const MemoryRecord&) = default;
};

struct MemoryQuery {
    Entities entities;
    int k = 3;
};

struct ScoredRecord {
    MemoryRecord record;
    double score = 0.0;
};

nlohmann::json to_json(const MemoryRecord& record);
MemoryRecord record_from_json(const nlohmann::json& j, const std::string& context);

double score(const Entities& record, const Entities& query);

class MemoryStore {
public:
    // Opens (creating if absent) the store file and loads existing records.
    explicit MemoryStore(std::filesystem::path path);

    std::string insert(MemoryRecord record);
    std::vector<ScoredRecord> retrieve(const MemoryQuery& query) const;
    std::vector<MemoryRecord> records() const;
    std::size_t size() const;

    // Rewrites the file keeping the latest line per id; returns lines dropped.
    std::size_t compact();

    const std::filesystem::path& path() const { return path_; }

private:
    void load();

    std::filesystem::path path_;
    mutable std::shared_mutex mutex_;
    std::vector<MemoryRecord> records_;  // insertion order
    std::size_t file_lines_ = 0;
    long next_id_ = 1;
};

std::vector<std::string> format_snippets(const std::vector<MemoryRecord>& records);

// Pilot rule: recommend running when a recalled loss came against the same
// species at a level no higher than the current enemy's level + 2 and
// running is currently allowed.
bool memory_aware_rule(const battle::BattleState& state, const std::vector<MemoryRecord>& recalled,
                       bool run_allowed);

// Entities describing the current matchup.
Entities entities_for(const battle::BattleState& state, const std::string& location);

}  // namespace pokeai::memory
