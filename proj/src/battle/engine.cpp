#include "battle/engine.hpp"

#include <algorithm>

#include "common/errors.hpp"

namespace pokeai::battle {

namespace {

void emit(BattleState& state, TurnEvents& out, Event event) {
    apply_event(state, event);
    out.push_back(std::move(event));
}

Monster& side_monster(BattleState& state, Side side) {
    return side == Side::Player ? state.active_monster() : state.enemy;
}

const Monster& side_monster(const BattleState& state, Side side) {
    return side == Side::Player ? state.active_monster() : state.enemy;
}

Side other(Side side) { return side == Side::Player ? Side::Enemy : Side::Player; }

bool is_move_action(const Action& a) {
    return std::holds_alternative<action::UseMove>(a) || std::holds_alternative<action::Struggle>(a);
}

}  // namespace

Stats compute_stats(const SpeciesSpec& species, int level, const Dvs& dvs) {
    expects(level >= 1 && level <= 100, "compute_stats: level out of range");
    auto stat = [level](int base, int dv) { return (base + dv) * 2 * level / 100 + 5; };
    Stats s;
    s.hp = stat(species.base.hp, dvs.hp) + level + 5;
    s.attack = stat(species.base.attack, dvs.attack);
    s.defense = stat(species.base.defense, dvs.defense);
    s.speed = stat(species.base.speed, dvs.speed);
    s.special = stat(species.base.special, dvs.special);
    return s;
}

std::vector<const MoveSpec*> default_moveset(const SpeciesSpec& species, int level) {
    std::vector<const MoveSpec*> moves;
    for (const auto& entry : species.learnset) {
        if (entry.level > level) break;
        if (std::find(moves.begin(), moves.end(), entry.move) != moves.end()) continue;
        moves.push_back(entry.move);
        if (moves.size() > 4) moves.erase(moves.begin());
    }
    return moves;
}

Monster make_monster(const SpeciesSpec& species, int level, const Dvs& dvs,
                     const std::vector<const MoveSpec*>& moves) {
    expects(!moves.empty() && moves.size() <= 4, "make_monster: needs 1-4 moves");
    Monster m;
    m.species = &species;
    m.level = level;
    m.dvs = dvs;
    m.stats = compute_stats(species, level, dvs);
    m.current_hp = m.stats.hp;
    for (const auto* move : moves) m.moves.push_back({move, move->max_pp});
    return m;
}

BattleEngine::BattleEngine(GameDataPtr data) : data_(std::move(data)) {
    expects(data_ != nullptr, "BattleEngine: null data");
}

Ratio BattleEngine::stage_multiplier(int stage) const {
    expects(stage >= StatStages::kMin && stage <= StatStages::kMax,
            "stage_multiplier: stage outside [-6, 6]");
    const auto& t = data_->stage_tables();
    return {t.battle_stat[static_cast<std::size_t>(stage + 6)], t.denominator};
}

Ratio BattleEngine::accuracy_stage_multiplier(int stage) const {
    expects(stage >= StatStages::kMin && stage <= StatStages::kMax,
            "accuracy_stage_multiplier: stage outside [-6, 6]");
    const auto& t = data_->stage_tables();
    return {t.accuracy_evasion[static_cast<std::size_t>(stage + 6)], t.denominator};
}

double BattleEngine::type_effectiveness(TypeId attack, TypeId defend1,
                                        std::optional<TypeId> defend2) const {
    double m = data_->chart_tenths(attack, defend1) / 10.0;
    if (defend2) m *= data_->chart_tenths(attack, *defend2) / 10.0;
    return m;
}

int BattleEngine::effective_stat(const Monster& monster, Stat stat) const {
    int raw = 0;
    switch (stat) {
        case Stat::Attack: raw = monster.stats.attack; break;
        case Stat::Defense: raw = monster.stats.defense; break;
        case Stat::Speed: raw = monster.stats.speed; break;
        case Stat::Special: raw = monster.stats.special; break;
        default: throw ContractViolation("effective_stat: accuracy/evasion have no base value");
    }
    const Ratio r = stage_multiplier(monster.stages.get(stat));
    int value = raw * r.numerator / r.denominator;
    if (stat == Stat::Speed && monster.status.kind == StatusKind::Paralysis)
        value /= data_->mechanics().paralysis_speed_divisor;
    return std::max(value, 1);
}

int BattleEngine::compute_damage_with_roll(const Monster& attacker, const Monster& defender,
                                           const MoveSpec& move, bool crit, int roll) const {
    expects(move.is_damaging(), "compute_damage: status moves deal no damage");
    const auto& mech = data_->mechanics();
    expects(roll >= mech.damage_roll_min && roll <= mech.damage_roll_max,
            "compute_damage: roll outside damage range");

    const int e1 = data_->chart_tenths(move.type, defender.species->type1);
    const int e2 = defender.species->type2 ? data_->chart_tenths(move.type, *defender.species->type2)
                                           : 10;
    if (e1 == 0 || e2 == 0) return 0;

    const bool special = move.category == MoveCategory::Special;
    const Stat atk_stat = special ? Stat::Special : Stat::Attack;
    const Stat def_stat = special ? Stat::Special : Stat::Defense;
    const int level = attacker.level * (crit ? 2 : 1);
    int a = 0;
    int d = 0;
    if (crit) {
        a = special ? attacker.stats.special : attacker.stats.attack;
        d = special ? defender.stats.special : defender.stats.defense;
    } else {
        a = effective_stat(attacker, atk_stat);
        d = effective_stat(defender, def_stat);
    }

    long long damage = (2LL * level / 5 + 2) * move.power * a / d / 50 + 2;
    if (attacker.species->has_type(move.type))
        damage = damage * mech.stab_numerator / mech.stab_denominator;
    damage = damage * e1 / 10;
    if (defender.species->type2) damage = damage * e2 / 10;
    damage = damage * roll / 255;
    return static_cast<int>(std::max(damage, 1LL));
}

int BattleEngine::compute_damage(const Monster& attacker, const Monster& defender,
                                 const MoveSpec& move, bool crit, Rng& rng) const {
    const auto& mech = data_->mechanics();
    const int roll = rng.uniform_int(mech.damage_roll_min, mech.damage_roll_max);
    return compute_damage_with_roll(attacker, defender, move, crit, roll);
}

Ratio BattleEngine::hit_chance(const MoveSpec& move, const Monster& attacker,
                               const Monster& defender) const {
    if (!move.accuracy) return {1, 1};
    const Ratio acc = accuracy_stage_multiplier(attacker.stages.get(Stat::Accuracy));
    const Ratio eva = accuracy_stage_multiplier(defender.stages.get(Stat::Evasion));
    // (accuracy / 100) * (acc.n / acc.d) / (eva.n / eva.d)
    Ratio r{*move.accuracy * acc.numerator * eva.denominator,
            100 * acc.denominator * eva.numerator};
    if (r.numerator > r.denominator) r.numerator = r.denominator;
    return r;
}

bool BattleEngine::accuracy_check(const MoveSpec& move, const Monster& attacker,
                                  const Monster& defender, Rng& rng) const {
    const Ratio p = hit_chance(move, attacker, defender);
    return rng.uniform_int(0, p.denominator - 1) < p.numerator;
}

Ratio BattleEngine::crit_chance(const SpeciesSpec& species) const {
    const auto& mech = data_->mechanics();
    const int threshold = std::min(species.base.speed / mech.crit_speed_divisor, mech.crit_roll_range);
    return {threshold, mech.crit_roll_range};
}

bool BattleEngine::critical_check(const SpeciesSpec& species, Rng& rng) const {
    const Ratio p = crit_chance(species);
    return rng.uniform_int(0, p.denominator - 1) < p.numerator;
}

std::optional<int> BattleEngine::escape_threshold(const BattleState& state) const {
    const auto& mech = data_->mechanics();
    const int a = effective_stat(state.active_monster(), Stat::Speed);
    const int b = (effective_stat(state.enemy, Stat::Speed) / 4) % 256;
    if (b == 0) return std::nullopt;
    const int c = state.escape_attempts + 1;
    const int f = a * mech.escape_speed_factor / b + mech.escape_attempt_bonus * c;
    if (f >= mech.escape_roll_range) return std::nullopt;
    return f;
}

bool BattleEngine::attempt_escape(BattleState& state, Rng& rng) const {
    expects(state.outcome == Outcome::Ongoing, "attempt_escape: battle is over");
    const auto threshold = escape_threshold(state);
    const bool success =
        !threshold || rng.uniform_int(0, data_->mechanics().escape_roll_range - 1) < *threshold;
    TurnEvents scratch;
    emit(state, scratch,
         event::EscapeAttempt{success, success ? state.escape_attempts : state.escape_attempts + 1});
    if (success) emit(state, scratch, event::BattleEnded{Outcome::Escaped});
    return success;
}

ActionSet BattleEngine::valid_actions(const BattleState& state, const AblationMask& mask) const {
    ActionSet out;
    if (state.outcome != Outcome::Ongoing) return out;

    auto add_switches = [&] {
        for (int i = 0; i < static_cast<int>(state.party.size()); ++i) {
            if (i != state.active && !state.party[static_cast<std::size_t>(i)].fainted())
                out.push_back(action::Switch{i});
        }
    };

    if (state.forced_switch_pending) {
        add_switches();
        return out;
    }

    const Monster& active = state.active_monster();
    for (int i = 0; i < static_cast<int>(active.moves.size()); ++i) {
        if (active.moves[static_cast<std::size_t>(i)].pp > 0) out.push_back(action::UseMove{i});
    }
    if (out.empty()) out.push_back(action::Struggle{});
    if (mask.allow_strategic_switch) add_switches();
    if (mask.allow_item) {
        for (int s = 0; s < static_cast<int>(state.bag.slots.size()); ++s) {
            const BagSlot& slot = state.bag.slots[static_cast<std::size_t>(s)];
            if (slot.item != ItemKind::Potion || slot.count <= 0) continue;
            for (int t = 0; t < static_cast<int>(state.party.size()); ++t) {
                if (!state.party[static_cast<std::size_t>(t)].fainted())
                    out.push_back(action::UseItem{s, t});
            }
        }
    }
    if (mask.allow_escape) out.push_back(action::Run{});
    return out;
}

bool BattleEngine::is_valid(const BattleState& state, const Action& action,
                            const AblationMask& mask) const {
    const ActionSet valid = valid_actions(state, mask);
    return std::find(valid.begin(), valid.end(), action) != valid.end();
}

TurnEvents BattleEngine::apply_item(BattleState& state, int bag_slot, int target) const {
    expects(bag_slot >= 0 && bag_slot < static_cast<int>(state.bag.slots.size()),
            "apply_item: bag slot out of range");
    expects(target >= 0 && target < static_cast<int>(state.party.size()),
            "apply_item: target out of range");
    const BagSlot& slot = state.bag.slots[static_cast<std::size_t>(bag_slot)];
    const Monster& m = state.party[static_cast<std::size_t>(target)];
    expects(slot.item == ItemKind::Potion && slot.count > 0, "apply_item: no potion in slot");
    expects(!m.fainted(), "apply_item: target fainted");

    const int healed = std::min(data_->mechanics().potion_heal, m.max_hp() - m.current_hp);
    TurnEvents out;
    emit(state, out,
         event::ItemUsed{slot.item, bag_slot, target, healed, m.current_hp + healed, slot.count - 1});
    return out;
}

Action BattleEngine::enemy_policy(const BattleState& state, Rng& rng) const {
    expects(!state.enemy.fainted(), "enemy_policy: enemy fainted");
    std::vector<int> usable;
    for (int i = 0; i < static_cast<int>(state.enemy.moves.size()); ++i) {
        if (state.enemy.moves[static_cast<std::size_t>(i)].pp > 0) usable.push_back(i);
    }
    if (usable.empty()) return action::Struggle{};
    return action::UseMove{usable[static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<int>(usable.size()) - 1))]};
}

int BattleEngine::action_priority(const BattleState& state, Side side, const Action& a) const {
    if (const auto* m = std::get_if<action::UseMove>(&a))
        return side_monster(state, side).moves.at(static_cast<std::size_t>(m->slot)).move->priority;
    return data_->struggle().priority;
}

bool BattleEngine::check_battle_end(BattleState& state, TurnEvents& out) const {
    if (state.outcome != Outcome::Ongoing) return true;
    if (state.enemy.fainted()) {
        emit(state, out, event::BattleEnded{Outcome::Win});
        return true;
    }
    if (state.party_wiped()) {
        emit(state, out, event::BattleEnded{Outcome::Loss});
        return true;
    }
    return false;
}

void BattleEngine::execute_move(BattleState& state, Side side, const MoveSpec& move, int slot,
                                TurnEvents& out, Rng& rng) const {
    const auto& mech = data_->mechanics();
    const Side target_side = other(side);
    const int player_index = state.active;

    auto faint_check = [&](Side s) {
        if (side_monster(state, s).fainted())
            emit(state, out, event::Fainted{s, s == Side::Player ? player_index : 0});
    };

    // Status gates before the move is chosen to execute.
    {
        const Monster& user = side_monster(state, side);
        switch (user.status.kind) {
            case StatusKind::Sleep: {
                Status after = user.status;
                --after.turns;
                if (after.turns <= 0) {
                    emit(state, out, event::StatusTick{side, "woke_up", Status{}});
                } else {
                    emit(state, out, event::StatusTick{side, "fast_asleep", after});
                }
                return;
            }
            case StatusKind::Paralysis:
                if (rng.uniform_int(0, mech.status_roll_range - 1) < mech.full_paralysis_chance) {
                    emit(state, out, event::StatusTick{side, "fully_paralyzed", user.status});
                    return;
                }
                break;
            case StatusKind::Confusion: {
                Status after = user.status;
                --after.turns;
                if (after.turns <= 0) {
                    emit(state, out, event::StatusTick{side, "snapped_out", Status{}});
                    break;
                }
                emit(state, out, event::StatusTick{side, "confused", after});
                if (rng.uniform_int(0, mech.status_roll_range - 1) < mech.confusion_self_hit_chance) {
                    const Monster& self = side_monster(state, side);
                    const int a = effective_stat(self, Stat::Attack);
                    const int d = effective_stat(self, Stat::Defense);
                    const int raw =
                        (2 * self.level / 5 + 2) * mech.confusion_self_hit_power * a / d / 50 + 2;
                    const int amount = std::min(raw, self.current_hp);
                    emit(state, out, event::SelfHit{side, amount, self.current_hp - amount});
                    faint_check(side);
                    return;
                }
                break;
            }
            case StatusKind::None: break;
        }
    }

    const bool struggle = slot < 0;
    if (struggle) {
        emit(state, out, event::StruggleUsed{side});
    } else {
        const int pp = side_monster(state, side).moves.at(static_cast<std::size_t>(slot)).pp;
        expects(pp > 0, "execute_move: move has no PP");
        emit(state, out, event::MoveUsed{side, move.name, slot, pp - 1});
    }

    const Monster& user = side_monster(state, side);
    const Monster& target = side_monster(state, target_side);
    if (!accuracy_check(move, user, target, rng)) {
        emit(state, out, event::Missed{side, move.name});
        return;
    }

    if (move.is_damaging()) {
        const bool crit = critical_check(*user.species, rng);
        const int raw = compute_damage(user, target, move, crit, rng);
        const int amount = std::min(raw, target.current_hp);
        const double eff = type_effectiveness(move.type, target.species->type1, target.species->type2);
        emit(state, out, event::Damage{target_side, move.name, amount, crit, eff, target.current_hp - amount});

        if (move.effect.kind == EffectKind::Drain && amount > 0) {
            const Monster& u = side_monster(state, side);
            const int gain = (amount * move.effect.drain_numerator + move.effect.drain_denominator - 1) /
                             move.effect.drain_denominator;
            const int healed = std::min(gain, u.max_hp() - u.current_hp);
            emit(state, out, event::Drained{side, healed, u.current_hp + healed});
        }
        faint_check(target_side);
        if (struggle && amount > 0) {
            const Monster& u = side_monster(state, side);
            const int recoil = std::min(std::max(amount / mech.struggle_recoil_divisor, 1), u.current_hp);
            emit(state, out, event::Recoil{side, recoil, u.current_hp - recoil});
            faint_check(side);
        }
        return;
    }

    switch (move.effect.kind) {
        case EffectKind::LowerStat:
        case EffectKind::RaiseStat: {
            const bool lower = move.effect.kind == EffectKind::LowerStat;
            const Side affected = lower ? target_side : side;
            const Monster& m = side_monster(state, affected);
            const int current = m.stages.get(move.effect.stat);
            const int desired = lower ? current - move.effect.stages : current + move.effect.stages;
            const int after = std::clamp(desired, StatStages::kMin, StatStages::kMax);
            if (after == current) {
                emit(state, out, event::MoveFailed{side, move.name, "stat_limit"});
            } else {
                emit(state, out, event::StatChanged{affected, move.effect.stat, after - current, after});
            }
            break;
        }
        case EffectKind::Sleep:
        case EffectKind::Paralyze:
        case EffectKind::Confuse: {
            if (target.status.kind != StatusKind::None) {
                emit(state, out, event::MoveFailed{side, move.name, "already_statused"});
                break;
            }
            Status s;
            if (move.effect.kind == EffectKind::Sleep) {
                s = {StatusKind::Sleep, rng.uniform_int(mech.sleep_turns_min, mech.sleep_turns_max)};
            } else if (move.effect.kind == EffectKind::Confuse) {
                s = {StatusKind::Confusion,
                     rng.uniform_int(mech.confusion_turns_min, mech.confusion_turns_max)};
            } else {
                s = {StatusKind::Paralysis, 0};
            }
            emit(state, out, event::StatusApplied{target_side, s});
            break;
        }
        case EffectKind::None:
        case EffectKind::Drain: break;
    }
}

void BattleEngine::execute_action(BattleState& state, Side side, const Action& a, TurnEvents& out,
                                  Rng& rng) const {
    if (side_monster(state, side).fainted()) return;
    if (const auto* m = std::get_if<action::UseMove>(&a)) {
        const MoveSpec& spec = *side_monster(state, side).moves.at(static_cast<std::size_t>(m->slot)).move;
        execute_move(state, side, spec, m->slot, out, rng);
    } else if (std::holds_alternative<action::Struggle>(a)) {
        execute_move(state, side, data_->struggle(), -1, out, rng);
    } else {
        throw ContractViolation("execute_action: not a move action");
    }
}

TurnEvents BattleEngine::resolve_turn(BattleState& state, const Action& player_action,
                                      const Action& enemy_action, Rng& rng) const {
    expects(state.outcome == Outcome::Ongoing, "resolve_turn: battle is over");
    if (!is_valid(state, player_action, AblationMask::full()))
        throw ContractViolation("resolve_turn: invalid player action " + describe(player_action));

    TurnEvents out;
    if (state.forced_switch_pending) {
        const auto& sw = std::get<action::Switch>(player_action);
        emit(state, out, event::Switched{state.active, sw.party_index, true});
        return out;
    }

    expects(is_move_action(enemy_action), "resolve_turn: wild enemies only use moves");
    if (const auto* m = std::get_if<action::UseMove>(&enemy_action)) {
        expects(m->slot >= 0 && m->slot < static_cast<int>(state.enemy.moves.size()) &&
                    state.enemy.moves[static_cast<std::size_t>(m->slot)].pp > 0,
                "resolve_turn: invalid enemy move");
    } else {
        expects(!state.enemy.has_usable_move(), "resolve_turn: enemy Struggle with PP left");
    }

    emit(state, out, event::TurnStarted{state.turn_number + 1});

    if (!is_move_action(player_action)) {
        if (const auto* sw = std::get_if<action::Switch>(&player_action)) {
            emit(state, out, event::Switched{state.active, sw->party_index, false});
        } else if (const auto* item = std::get_if<action::UseItem>(&player_action)) {
            for (auto& e : apply_item(state, item->bag_slot, item->target)) out.push_back(std::move(e));
        } else {
            const auto threshold = escape_threshold(state);
            const bool success =
                !threshold || rng.uniform_int(0, data_->mechanics().escape_roll_range - 1) < *threshold;
            emit(state, out, event::EscapeAttempt{success, success ? state.escape_attempts
                                                                   : state.escape_attempts + 1});
            if (success) {
                emit(state, out, event::BattleEnded{Outcome::Escaped});
                return out;
            }
        }
        execute_action(state, Side::Enemy, enemy_action, out, rng);
        check_battle_end(state, out);
        return out;
    }

    bool player_first = false;
    const int pp = action_priority(state, Side::Player, player_action);
    const int ep = action_priority(state, Side::Enemy, enemy_action);
    if (pp != ep) {
        player_first = pp > ep;
    } else {
        const int ps = effective_stat(state.active_monster(), Stat::Speed);
        const int es = effective_stat(state.enemy, Stat::Speed);
        player_first = ps != es ? ps > es : rng.uniform_int(0, 1) == 0;
    }

    const std::pair<Side, const Action*> order[2] = {
        player_first ? std::pair{Side::Player, &player_action} : std::pair{Side::Enemy, &enemy_action},
        player_first ? std::pair{Side::Enemy, &enemy_action} : std::pair{Side::Player, &player_action},
    };
    for (const auto& [side, act] : order) {
        execute_action(state, side, *act, out, rng);
        if (check_battle_end(state, out) || state.forced_switch_pending) break;
    }
    return out;
}

}  // namespace pokeai::battle
