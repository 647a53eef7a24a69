#include "scenario/scenario.hpp"

#include <cmath>
#include <set>

#include "common/errors.hpp"
#include "common/json_util.hpp"

namespace pokeai::scenario {

namespace ju = json_util;
using battle::Monster;
using nlohmann::json;

namespace {

constexpr int kSchemaVersion = 1;
constexpr double kWeightTolerance = 1e-9;

battle::Dvs read_dvs(const json& object, const std::string& ctx) {
    const json& d = ju::require(object, "dvs", ctx);
    const std::string dctx = ctx + ".dvs";
    battle::Dvs dvs;
    dvs.hp = ju::require_int(d, "hp", dctx, 0, 15);
    dvs.attack = ju::require_int(d, "attack", dctx, 0, 15);
    dvs.defense = ju::require_int(d, "defense", dctx, 0, 15);
    dvs.speed = ju::require_int(d, "speed", dctx, 0, 15);
    dvs.special = ju::require_int(d, "special", dctx, 0, 15);
    return dvs;
}

}  // namespace

double EncounterTable::expected_level() const {
    double total = 0.0;
    for (const auto& e : entries) {
        double sum = 0.0;
        for (int level : e.level_set) sum += level;
        total += e.weight * sum / static_cast<double>(e.level_set.size());
    }
    return total;
}

Encounter sample_encounter(const EncounterTable& table, Rng& rng) {
    if (table.entries.empty()) throw DataError("encounter table '" + table.location + "' is empty");
    const double u = rng.uniform01();
    const EncounterEntry* chosen = &table.entries.back();
    double cumulative = 0.0;
    for (const auto& e : table.entries) {
        cumulative += e.weight;
        if (u < cumulative) {
            chosen = &e;
            break;
        }
    }
    const int idx = rng.uniform_int(0, static_cast<int>(chosen->level_set.size()) - 1);
    return {chosen->species, chosen->level_set[static_cast<std::size_t>(idx)]};
}

Monster spawn_wild(const battle::SpeciesSpec& species, int level, Rng& rng) {
    battle::Dvs dvs;
    dvs.hp = rng.uniform_int(0, 15);
    dvs.attack = rng.uniform_int(0, 15);
    dvs.defense = rng.uniform_int(0, 15);
    dvs.speed = rng.uniform_int(0, 15);
    dvs.special = rng.uniform_int(0, 15);
    return battle::make_monster(species, level, dvs, battle::default_moveset(species, level));
}

EncounterTable load_encounter_table(const std::filesystem::path& path, const battle::GameData& data) {
    const json doc = ju::read_file(path);
    const std::string ctx = path.filename().string();
    ju::require_schema_version(doc, ctx, kSchemaVersion);
    EncounterTable table;
    table.location = ju::require_string(doc, "location", ctx);
    const json& entries = ju::require_array(doc, "entries", ctx);
    if (entries.empty()) throw DataError(ctx + ".entries: table is empty");
    double total = 0.0;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const std::string ectx = ctx + ".entries[" + std::to_string(i) + "]";
        EncounterEntry entry;
        const std::string name = ju::require_string(entries[i], "species", ectx);
        entry.species = data.find_species(name);
        if (!entry.species) throw DataError(ectx + ".species: unknown species '" + name + "'");
        const json& levels = ju::require_array(entries[i], "level_set", ectx);
        if (levels.empty()) throw DataError(ectx + ".level_set: must be non-empty");
        for (std::size_t l = 0; l < levels.size(); ++l) {
            if (!levels[l].is_number_integer() || levels[l].get<int>() < 1 || levels[l].get<int>() > 100)
                throw DataError(ectx + ".level_set[" + std::to_string(l) + "]: level must be in [1, 100]");
            entry.level_set.push_back(levels[l].get<int>());
        }
        entry.weight = ju::require_number(entries[i], "weight", ectx);
        if (entry.weight <= 0.0) throw DataError(ectx + ".weight: must be positive");
        total += entry.weight;
        table.entries.push_back(std::move(entry));
    }
    if (std::fabs(total - 1.0) > kWeightTolerance)
        throw DataError(ctx + ".entries: weights sum to " + std::to_string(total) + ", expected 1");
    return table;
}

Checkpoint load_checkpoint(const std::filesystem::path& path, const battle::GameData& data) {
    const json doc = ju::read_file(path);
    const std::string ctx = path.filename().string();
    ju::require_schema_version(doc, ctx, kSchemaVersion);
    Checkpoint cp;

    const json& party = ju::require_array(doc, "party", ctx);
    if (party.empty() || party.size() > 6) {
        throw DataError(ctx + ".party: party size must be 1-6, found " + std::to_string(party.size()));
    }
    for (std::size_t i = 0; i < party.size(); ++i) {
        const std::string mctx = ctx + ".party[" + std::to_string(i) + "]";
        const std::string name = ju::require_string(party[i], "species", mctx);
        const auto* species = data.find_species(name);
        if (!species) throw DataError(mctx + ".species: unknown species '" + name + "'");
        const int level = ju::require_int(party[i], "level", mctx, 1, 100);
        const battle::Dvs dvs = read_dvs(party[i], mctx);

        std::vector<const battle::MoveSpec*> moves;
        if (party[i].contains("moves")) {
            const json& names = ju::require_array(party[i], "moves", mctx);
            if (names.empty() || names.size() > 4)
                throw DataError(mctx + ".moves: expected 1-4 moves");
            std::set<std::string> seen;
            for (const auto& n : names) {
                if (!n.is_string()) throw DataError(mctx + ".moves: expected move names");
                const auto* move = data.find_move(n.get<std::string>());
                if (!move) throw DataError(mctx + ".moves: unknown move '" + n.get<std::string>() + "'");
                if (!seen.insert(move->name).second)
                    throw DataError(mctx + ".moves: duplicate move '" + move->name + "'");
                moves.push_back(move);
            }
        } else {
            moves = battle::default_moveset(*species, level);
        }
        Monster m = battle::make_monster(*species, level, dvs, moves);
        if (party[i].contains("current_hp"))
            m.current_hp = ju::require_int(party[i], "current_hp", mctx, 0, m.max_hp());
        cp.party.push_back(std::move(m));
    }

    const json& bag = ju::require_array(doc, "bag", ctx);
    for (std::size_t i = 0; i < bag.size(); ++i) {
        const std::string bctx = ctx + ".bag[" + std::to_string(i) + "]";
        const std::string item = ju::require_string(bag[i], "item", bctx);
        const auto kind = battle::parse_item(item);
        if (!kind) throw DataError(bctx + ".item: unknown item '" + item + "'");
        cp.bag.slots.push_back({*kind, ju::require_int(bag[i], "count", bctx, 0, 99)});
    }
    return cp;
}

battle::BattleState begin_battle(std::vector<Monster> party, battle::Bag bag, Monster enemy) {
    battle::BattleState state;
    state.party = std::move(party);
    state.bag = std::move(bag);
    state.enemy = std::move(enemy);
    for (auto& m : state.party) {
        m.stages.reset();
        if (m.status.kind == battle::StatusKind::Confusion) m.status = {};
    }
    state.active = 0;
    for (int i = 0; i < static_cast<int>(state.party.size()); ++i) {
        if (!state.party[static_cast<std::size_t>(i)].fainted()) {
            state.active = i;
            break;
        }
    }
    if (state.party_wiped()) state.outcome = battle::Outcome::Loss;
    return state;
}

}  // namespace pokeai::scenario
