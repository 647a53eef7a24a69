#include "battle/data.hpp"

#include <algorithm>
#include <set>

#include "common/errors.hpp"
#include "common/json_util.hpp"

namespace pokeai::battle {

namespace ju = json_util;
using nlohmann::json;

namespace {

constexpr int kSchemaVersion = 1;

TypeId require_type(const json& object, std::string_view key, const std::string& context) {
    const std::string name = ju::require_string(object, key, context);
    auto type = parse_type(name);
    if (!type) throw DataError(context + "." + std::string(key) + ": unknown type '" + name + "'");
    return *type;
}

int chart_tenths_from(double multiplier, const std::string& context) {
    if (multiplier == 0.0) return 0;
    if (multiplier == 0.5) return 5;
    if (multiplier == 1.0) return 10;
    if (multiplier == 2.0) return 20;
    throw DataError(context + ".multiplier: must be one of 0, 0.5, 1, 2");
}

void load_type_chart(const json& doc, std::array<std::array<int, kTypeCount>, kTypeCount>& chart,
                     std::array<bool, kTypeCount>& special) {
    const std::string ctx = "type_chart";
    ju::require_schema_version(doc, ctx, kSchemaVersion);
    const json& types = ju::require_array(doc, "types", ctx);
    if (types.size() != kTypeCount) {
        throw DataError(ctx + ".types: expected exactly " + std::to_string(kTypeCount) +
                        " types, found " + std::to_string(types.size()));
    }
    std::set<TypeId> seen;
    for (std::size_t i = 0; i < types.size(); ++i) {
        const std::string ectx = ctx + ".types[" + std::to_string(i) + "]";
        const TypeId t = require_type(types[i], "name", ectx);
        if (!seen.insert(t).second) throw DataError(ectx + ".name: duplicate type");
        const json& sp = ju::require(types[i], "special", ectx);
        if (!sp.is_boolean()) throw DataError(ectx + ".special: expected a boolean");
        special[static_cast<int>(t)] = sp.get<bool>();
    }

    for (auto& row : chart) row.fill(10);
    std::set<std::pair<TypeId, TypeId>> pairs;
    const json& matchups = ju::require_array(doc, "matchups", ctx);
    for (std::size_t i = 0; i < matchups.size(); ++i) {
        const std::string ectx = ctx + ".matchups[" + std::to_string(i) + "]";
        const TypeId a = require_type(matchups[i], "attack", ectx);
        const TypeId d = require_type(matchups[i], "defend", ectx);
        if (!pairs.insert({a, d}).second) throw DataError(ectx + ": duplicate matchup");
        chart[static_cast<int>(a)][static_cast<int>(d)] =
            chart_tenths_from(ju::require_number(matchups[i], "multiplier", ectx), ectx);
    }
}

std::array<int, 13> load_stage_row(const json& doc, std::string_view key, const std::string& ctx,
                                   int denominator) {
    const json& row = ju::require_array(doc, key, ctx);
    const std::string rctx = ctx + "." + std::string(key);
    if (row.size() != 13) throw DataError(rctx + ": expected 13 entries for stages -6..+6");
    std::array<int, 13> out{};
    for (std::size_t i = 0; i < 13; ++i) {
        if (!row[i].is_number_integer() || row[i].get<int>() <= 0)
            throw DataError(rctx + "[" + std::to_string(i) + "]: expected a positive integer");
        out[i] = row[i].get<int>();
        if (i > 0 && out[i] <= out[i - 1])
            throw DataError(rctx + ": table must be strictly increasing");
    }
    if (out[6] != denominator) throw DataError(rctx + "[6]: stage 0 must equal the denominator");
    return out;
}

StageTables load_stage_tables(const json& doc) {
    const std::string ctx = "stage_tables";
    ju::require_schema_version(doc, ctx, kSchemaVersion);
    StageTables t;
    t.denominator = ju::require_int(doc, "denominator", ctx, 1, 1 << 20);
    t.battle_stat = load_stage_row(doc, "battle_stat", ctx, t.denominator);
    t.accuracy_evasion = load_stage_row(doc, "accuracy_evasion", ctx, t.denominator);
    return t;
}

Mechanics load_mechanics(const json& doc) {
    const std::string ctx = "mechanics";
    ju::require_schema_version(doc, ctx, kSchemaVersion);
    Mechanics m;
    auto get = [&](std::string_view key, int lo, int hi) { return ju::require_int(doc, key, ctx, lo, hi); };
    m.damage_roll_min = get("damage_roll_min", 1, 255);
    m.damage_roll_max = get("damage_roll_max", m.damage_roll_min, 255);
    m.stab_numerator = get("stab_numerator", 1, 100);
    m.stab_denominator = get("stab_denominator", 1, 100);
    m.crit_speed_divisor = get("crit_speed_divisor", 1, 255);
    m.crit_roll_range = get("crit_roll_range", 1, 65536);
    m.escape_speed_factor = get("escape_speed_factor", 1, 1000);
    m.escape_attempt_bonus = get("escape_attempt_bonus", 0, 1000);
    m.escape_roll_range = get("escape_roll_range", 1, 65536);
    m.paralysis_speed_divisor = get("paralysis_speed_divisor", 1, 100);
    m.status_roll_range = get("status_roll_range", 1, 65536);
    m.full_paralysis_chance = get("full_paralysis_chance", 0, m.status_roll_range);
    m.confusion_self_hit_chance = get("confusion_self_hit_chance", 0, m.status_roll_range);
    m.confusion_self_hit_power = get("confusion_self_hit_power", 1, 255);
    m.sleep_turns_min = get("sleep_turns_min", 1, 100);
    m.sleep_turns_max = get("sleep_turns_max", m.sleep_turns_min, 100);
    m.confusion_turns_min = get("confusion_turns_min", 1, 100);
    m.confusion_turns_max = get("confusion_turns_max", m.confusion_turns_min, 100);
    m.potion_heal = get("potion_heal", 1, 999);
    m.struggle_power = get("struggle_power", 1, 255);
    m.struggle_recoil_divisor = get("struggle_recoil_divisor", 1, 100);
    m.turn_limit = get("turn_limit", 1, 1000000);
    return m;
}

MoveEffect load_effect(const json& object, const std::string& ctx) {
    const json& e = ju::require(object, "effect", ctx);
    const std::string ectx = ctx + ".effect";
    const std::string kind = ju::require_string(e, "kind", ectx);
    MoveEffect effect;
    if (kind == "none") {
        effect.kind = EffectKind::None;
    } else if (kind == "lower_stat" || kind == "raise_stat") {
        effect.kind = kind == "lower_stat" ? EffectKind::LowerStat : EffectKind::RaiseStat;
        const std::string stat = ju::require_string(e, "stat", ectx);
        auto parsed = parse_stat(stat);
        if (!parsed) throw DataError(ectx + ".stat: unknown stat '" + stat + "'");
        effect.stat = *parsed;
        effect.stages = ju::require_int(e, "stages", ectx, 1, 6);
    } else if (kind == "drain") {
        effect.kind = EffectKind::Drain;
        effect.drain_numerator = ju::require_int(e, "numerator", ectx, 1, 100);
        effect.drain_denominator = ju::require_int(e, "denominator", ectx, effect.drain_numerator, 100);
    } else if (kind == "sleep") {
        effect.kind = EffectKind::Sleep;
    } else if (kind == "paralyze") {
        effect.kind = EffectKind::Paralyze;
    } else if (kind == "confuse") {
        effect.kind = EffectKind::Confuse;
    } else {
        throw DataError(ectx + ".kind: unknown effect '" + kind + "'");
    }
    return effect;
}

MoveCategory parse_category(const std::string& name, const std::string& ctx) {
    if (name == "physical") return MoveCategory::Physical;
    if (name == "special") return MoveCategory::Special;
    if (name == "status") return MoveCategory::Status;
    throw DataError(ctx + ".category: unknown category '" + name + "'");
}

}  // namespace

std::shared_ptr<const GameData> GameData::load(const std::filesystem::path& data_dir) {
    std::shared_ptr<GameData> data(new GameData());
    data->dir_ = data_dir;

    load_type_chart(ju::read_file(data_dir / "type_chart.json"), data->chart_, data->special_);
    data->stages_ = load_stage_tables(ju::read_file(data_dir / "stage_tables.json"));
    data->mechanics_ = load_mechanics(ju::read_file(data_dir / "mechanics.json"));

    const json moves_doc = ju::read_file(data_dir / "moves.json");
    ju::require_schema_version(moves_doc, "moves", kSchemaVersion);
    const json& moves = ju::require_array(moves_doc, "moves", "moves");
    for (std::size_t i = 0; i < moves.size(); ++i) {
        std::string ctx = "moves[" + std::to_string(i) + "]";
        auto move = std::make_unique<MoveSpec>();
        move->name = ju::require_string(moves[i], "name", ctx);
        ctx = "moves['" + move->name + "']";
        if (move->name.empty()) throw DataError(ctx + ".name: must be non-empty");
        move->type = require_type(moves[i], "type", ctx);
        move->category = parse_category(ju::require_string(moves[i], "category", ctx), ctx);
        if (move->category == MoveCategory::Status) {
            move->power = ju::require_int(moves[i], "power", ctx, 0, 0);
        } else {
            move->power = ju::require_int(moves[i], "power", ctx, 1, 255);
            const bool expect_special = data->special_[static_cast<int>(move->type)];
            if ((move->category == MoveCategory::Special) != expect_special) {
                throw DataError(ctx + ".category: " + std::string(type_name(move->type)) +
                                " moves are " + (expect_special ? "special" : "physical"));
            }
        }
        const json& acc = ju::require(moves[i], "accuracy", ctx);
        if (acc.is_string() && acc.get<std::string>() == "always") {
            move->accuracy = std::nullopt;
        } else {
            move->accuracy = ju::require_int(moves[i], "accuracy", ctx, 0, 100);
        }
        move->max_pp = ju::require_int(moves[i], "max_pp", ctx, 1, 40);
        move->priority = ju::require_int(moves[i], "priority", ctx, 0, 1);
        move->effect = load_effect(moves[i], ctx);
        if (move->category == MoveCategory::Status &&
            (move->effect.kind == EffectKind::None || move->effect.kind == EffectKind::Drain)) {
            throw DataError(ctx + ".effect: status moves need a non-damage effect");
        }
        if (data->move_index_.count(move->name)) throw DataError(ctx + ": duplicate move");
        data->move_index_[move->name] = move.get();
        data->moves_.push_back(std::move(move));
    }

    const json species_doc = ju::read_file(data_dir / "species.json");
    ju::require_schema_version(species_doc, "species", kSchemaVersion);
    const json& species = ju::require_array(species_doc, "species", "species");
    for (std::size_t i = 0; i < species.size(); ++i) {
        std::string ctx = "species[" + std::to_string(i) + "]";
        auto sp = std::make_unique<SpeciesSpec>();
        sp->name = ju::require_string(species[i], "name", ctx);
        ctx = "species['" + sp->name + "']";
        const json& types = ju::require_array(species[i], "types", ctx);
        if (types.empty() || types.size() > 2) throw DataError(ctx + ".types: expected 1 or 2 types");
        for (std::size_t t = 0; t < types.size(); ++t) {
            if (!types[t].is_string()) throw DataError(ctx + ".types: expected strings");
            auto parsed = parse_type(types[t].get<std::string>());
            if (!parsed) throw DataError(ctx + ".types: unknown type '" + types[t].get<std::string>() + "'");
            if (t == 0) sp->type1 = *parsed;
            else sp->type2 = *parsed;
        }
        if (sp->type2 && *sp->type2 == sp->type1) throw DataError(ctx + ".types: duplicate type");
        const json& base = ju::require(species[i], "base", ctx);
        const std::string bctx = ctx + ".base";
        sp->base.hp = ju::require_int(base, "hp", bctx, 1, 255);
        sp->base.attack = ju::require_int(base, "attack", bctx, 1, 255);
        sp->base.defense = ju::require_int(base, "defense", bctx, 1, 255);
        sp->base.speed = ju::require_int(base, "speed", bctx, 1, 255);
        sp->base.special = ju::require_int(base, "special", bctx, 1, 255);
        const json& learnset = ju::require_array(species[i], "learnset", ctx);
        if (learnset.empty()) throw DataError(ctx + ".learnset: must be non-empty");
        for (std::size_t l = 0; l < learnset.size(); ++l) {
            const std::string lctx = ctx + ".learnset[" + std::to_string(l) + "]";
            LearnsetEntry entry;
            entry.level = ju::require_int(learnset[l], "level", lctx, 1, 100);
            const std::string move_name = ju::require_string(learnset[l], "move", lctx);
            entry.move = data->find_move(move_name);
            if (!entry.move) throw DataError(lctx + ".move: unknown move '" + move_name + "'");
            if (!sp->learnset.empty() && entry.level < sp->learnset.back().level)
                throw DataError(lctx + ".level: learnset must be sorted by level");
            sp->learnset.push_back(entry);
        }
        if (sp->learnset.front().level != 1)
            throw DataError(ctx + ".learnset: needs at least one level-1 move");
        if (data->species_index_.count(sp->name)) throw DataError(ctx + ": duplicate species");
        data->species_index_[sp->name] = sp.get();
        data->species_.push_back(std::move(sp));
    }

    data->struggle_.name = "Struggle";
    data->struggle_.type = TypeId::Normal;
    data->struggle_.category = MoveCategory::Physical;
    data->struggle_.power = data->mechanics_.struggle_power;
    data->struggle_.accuracy = 100;
    data->struggle_.max_pp = 1;
    data->struggle_.priority = 0;
    return data;
}

const MoveSpec* GameData::find_move(std::string_view name) const {
    auto it = move_index_.find(name);
    return it == move_index_.end() ? nullptr : it->second;
}

const SpeciesSpec* GameData::find_species(std::string_view name) const {
    auto it = species_index_.find(name);
    return it == species_index_.end() ? nullptr : it->second;
}

const MoveSpec& GameData::move(std::string_view name) const {
    if (const auto* m = find_move(name)) return *m;
    throw DataError("unknown move '" + std::string(name) + "'");
}

const SpeciesSpec& GameData::species(std::string_view name) const {
    if (const auto* s = find_species(name)) return *s;
    throw DataError("unknown species '" + std::string(name) + "'");
}

}  // namespace pokeai::battle
