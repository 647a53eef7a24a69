#include "agent_io/agent_io.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "common/hash.hpp"

namespace pokeai::agent_io {

using namespace battle;
using nlohmann::json;

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string types_text(const SpeciesSpec& s) {
    std::string out(type_name(s.type1));
    if (s.type2) out += "/" + std::string(type_name(*s.type2));
    return out;
}

std::string status_text(const Status& s, bool show_turns) {
    switch (s.kind) {
        case StatusKind::None: return "none";
        case StatusKind::Paralysis: return "paralyzed";
        case StatusKind::Sleep:
            return show_turns ? "asleep (" + std::to_string(s.turns) + " turns left at most)" : "asleep";
        case StatusKind::Confusion: return "confused";
    }
    return "none";
}

std::string stages_text(const StatStages& stages) {
    std::string out;
    for (int i = 0; i < kStageStatCount; ++i) {
        const Stat st = static_cast<Stat>(i);
        if (stages.get(st) == 0) continue;
        if (!out.empty()) out += ", ";
        out += std::string(stat_name(st)) + " " + (stages.get(st) > 0 ? "+" : "") + std::to_string(stages.get(st));
    }
    return out.empty() ? "all unchanged" : out;
}

std::string effect_text(const MoveEffect& e) {
    switch (e.kind) {
        case EffectKind::None: return "";
        case EffectKind::LowerStat:
            return "lowers target " + std::string(stat_name(e.stat)) + " by " + std::to_string(e.stages);
        case EffectKind::RaiseStat:
            return "raises own " + std::string(stat_name(e.stat)) + " by " + std::to_string(e.stages);
        case EffectKind::Drain:
            return "heals user by " + std::to_string(e.drain_numerator) + "/" + std::to_string(e.drain_denominator) +
                   " of damage dealt";
        case EffectKind::Sleep: return "puts target to sleep";
        case EffectKind::Paralyze: return "paralyzes target";
        case EffectKind::Confuse: return "confuses target";
    }
    return "";
}

std::string move_line(int number, const MoveSlot& slot) {
    const MoveSpec& m = *slot.move;
    std::ostringstream os;
    os << "  " << number << ". " << m.name << ": " << type_name(m.type) << ", " << category_name(m.category);
    if (m.is_damaging()) os << ", power " << m.power;
    os << ", accuracy " << (m.accuracy ? std::to_string(*m.accuracy) + "%" : std::string("never misses"));
    if (m.priority > 0) os << ", strikes first";
    const std::string effect = effect_text(m.effect);
    if (!effect.empty()) os << ", " << effect;
    os << ", PP " << slot.pp << "/" << m.max_pp;
    return os.str();
}

std::string join_lines(const std::vector<std::string>& lines) {
    std::string out;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (i) out += "\n";
        out += lines[i];
    }
    return out;
}

// Accepts integers, integral floats and digit strings.
std::optional<int> read_index(const json& v, const char* field) {
    if (v.is_null()) return std::nullopt;
    if (v.is_number_integer()) return v.get<int>();
    if (v.is_number_float()) {
        const double d = v.get<double>();
        if (d == static_cast<int>(d)) return static_cast<int>(d);
    }
    if (v.is_string()) {
        const std::string s = trim(v.get<std::string>());
        if (!s.empty() && s.size() < 4 && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); }))
            return std::stoi(s);
    }
    throw ParseError(std::string("field '") + field + "' must be an integer, got " + v.dump());
}

// End of the balanced object starting at `open`, honouring strings.
std::optional<std::size_t> object_end(const std::string& text, std::size_t open) {
    int depth = 0;
    bool in_string = false;
    for (std::size_t i = open; i < text.size(); ++i) {
        const char c = text[i];
        if (in_string) {
            if (c == '\\') ++i;
            else if (c == '"') in_string = false;
            continue;
        }
        if (c == '"') in_string = true;
        else if (c == '{') ++depth;
        else if (c == '}' && --depth == 0) return i;
    }
    return std::nullopt;
}

ActionRequest request_from_object(const json& obj, const std::string& raw) {
    std::map<std::string, const json*> fields;
    for (const auto& [key, value] : obj.items()) fields.emplace(lower(trim(key)), &value);

    const json& kind_value = *fields.at("action");
    if (!kind_value.is_string()) throw ParseError("field 'action' must be a string, got " + kind_value.dump());
    const std::string kind = lower(trim(kind_value.get<std::string>()));

    ActionRequest req;
    req.raw_text = raw;
    if (kind == "move") req.kind = ActionKind::Move;
    else if (kind == "switch") req.kind = ActionKind::Switch;
    else if (kind == "item") req.kind = ActionKind::Item;
    else if (kind == "run") req.kind = ActionKind::Run;
    else throw ParseError("unknown action '" + kind + "'");

    if (auto it = fields.find("index"); it != fields.end()) req.index = read_index(*it->second, "index");
    if (auto it = fields.find("target"); it != fields.end()) req.target = read_index(*it->second, "target");

    switch (req.kind) {
        case ActionKind::Move:
            if (!req.index || *req.index < 1 || *req.index > 4) throw ParseError("move needs an index from 1 to 4");
            break;
        case ActionKind::Switch:
            if (!req.index || *req.index < 1 || *req.index > 6) throw ParseError("switch needs an index from 1 to 6");
            break;
        case ActionKind::Item:
            if (!req.index || *req.index < 1) throw ParseError("item needs a bag slot index of 1 or more");
            if (req.target && (*req.target < 1 || *req.target > 6)) throw ParseError("item target must be from 1 to 6");
            break;
        case ActionKind::Run:
            req.index.reset();
            req.target.reset();
            break;
    }
    if (req.kind != ActionKind::Item) req.target.reset();
    return req;
}

bool contains(const ActionSet& set, const Action& a) { return std::find(set.begin(), set.end(), a) != set.end(); }

}  // namespace

std::string_view kind_name(ActionKind kind) {
    switch (kind) {
        case ActionKind::Move: return "move";
        case ActionKind::Switch: return "switch";
        case ActionKind::Item: return "item";
        case ActionKind::Run: return "run";
    }
    return "move";
}

std::string Prompt::hash() const { return sha256_hex(system + "\n\x1f\n" + user); }

PromptTemplate PromptTemplate::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read prompt template " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path.string());
}

PromptTemplate PromptTemplate::parse(const std::string& text, const std::string& source) {
    PromptTemplate t;
    std::string* section = nullptr;
    bool saw_system = false, saw_user = false;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty() && line[0] == '#') continue;
        if (line == "[system]") {
            section = &t.system_;
            saw_system = true;
            continue;
        }
        if (line == "[user]") {
            section = &t.user_;
            saw_user = true;
            continue;
        }
        if (!section) {
            if (trim(line).empty()) continue;
            throw DataError(source + ": text before the first [system]/[user] section");
        }
        *section += line + "\n";
    }
    if (!saw_system || !saw_user) throw DataError(source + ": template needs both [system] and [user] sections");
    return t;
}

Prompt PromptTemplate::render(const std::vector<std::pair<std::string, std::string>>& values) const {
    auto fill = [&](const std::string& body) {
        std::string out;
        std::istringstream in(body);
        std::string line;
        while (std::getline(in, line)) {
            bool drop = false;
            for (const auto& [name, value] : values) {
                const std::string key = "{{" + name + "}}";
                if (trim(line) == key && value.empty()) {
                    drop = true;
                    break;
                }
                for (auto pos = line.find(key); pos != std::string::npos; pos = line.find(key, pos + value.size()))
                    line.replace(pos, key.size(), value);
            }
            if (drop) continue;
            if (const auto open = line.find("{{"); open != std::string::npos && line.find("}}", open) != std::string::npos)
                throw DataError("prompt template placeholder without a value: " + line);
            out += line + "\n";
        }
        while (!out.empty() && out.back() == '\n') out.pop_back();
        return out;
    };
    return {fill(system_), fill(user_)};
}

void HistoryWindow::push(std::vector<std::string> round) {
    rounds_.push_back(std::move(round));
    while (rounds_.size() > kCapacity) rounds_.pop_front();
}

std::vector<std::string> render_events(const BattleState& before, const TurnEvents& events) {
    BattleState cur = before;
    std::vector<std::string> lines;
    lines.reserve(events.size());
    for (const auto& e : events) {
        if (!std::holds_alternative<event::TurnStarted>(e)) lines.push_back(render(e, cur));
        apply_event(cur, e);
    }
    return lines;
}

void record_round(HistoryWindow& history, const BattleState& before, const TurnEvents& events) {
    history.push(render_events(before, events));
}

std::string action_label(const Action& a, const BattleState& state) {
    struct V {
        const BattleState& s;
        std::string operator()(const action::UseMove& m) const {
            return s.active_monster().moves.at(static_cast<std::size_t>(m.slot)).move->name;
        }
        std::string operator()(const action::Struggle&) const { return "Struggle (every move is out of PP)"; }
        std::string operator()(const action::Switch& w) const {
            return "switch to " + s.party.at(static_cast<std::size_t>(w.party_index)).name();
        }
        std::string operator()(const action::UseItem& u) const {
            return std::string(item_name(s.bag.slots.at(static_cast<std::size_t>(u.bag_slot)).item)) + " on " +
                   s.party.at(static_cast<std::size_t>(u.target)).name();
        }
        std::string operator()(const action::Run&) const { return "run away"; }
    };
    return std::visit(V{state}, a);
}

ActionRequest to_request(const Action& a, const BattleState&) {
    struct V {
        ActionRequest operator()(const action::UseMove& m) const { return {ActionKind::Move, m.slot + 1, {}, {}}; }
        ActionRequest operator()(const action::Struggle&) const { return {ActionKind::Move, 1, {}, {}}; }
        ActionRequest operator()(const action::Switch& w) const {
            return {ActionKind::Switch, w.party_index + 1, {}, {}};
        }
        ActionRequest operator()(const action::UseItem& u) const {
            return {ActionKind::Item, u.bag_slot + 1, u.target + 1, {}};
        }
        ActionRequest operator()(const action::Run&) const { return {ActionKind::Run, {}, {}, {}}; }
    };
    ActionRequest req = std::visit(V{}, a);
    req.raw_text = to_wire(req);
    return req;
}

std::string to_wire(const ActionRequest& req) {
    std::string out = "{\"action\": \"" + std::string(kind_name(req.kind)) + "\"";
    if (req.index) out += ", \"index\": " + std::to_string(*req.index);
    if (req.target) out += ", \"target\": " + std::to_string(*req.target);
    return out + "}";
}

Prompt serialize_state(const PromptTemplate& tmpl, const BattleEngine& engine, const BattleState& state,
                       const HistoryWindow& history, const std::vector<std::string>& memory_snippets,
                       const AblationMask& mask) {
    expects(state.outcome == Outcome::Ongoing, "serialize_state needs an ongoing battle");
    const Monster& enemy = state.enemy;
    const Monster& active = state.active_monster();

    std::string situation = state.forced_switch_pending
                                ? "Your active Pokemon fainted. Choose which Pokemon to send out next."
                                : "Turn " + std::to_string(state.turn_number + 1) + " of this battle.";

    std::ostringstream en;
    en << "Wild Pokemon: " << enemy.name() << ", level " << enemy.level << ", type " << types_text(*enemy.species)
       << ", HP " << (enemy.current_hp * 100 / enemy.max_hp()) << "%, status " << status_text(enemy.status, false)
       << ".";

    std::vector<std::string> act;
    act.push_back("Your active Pokemon: " + active.name() + " (party slot " + std::to_string(state.active + 1) +
                  "), level " + std::to_string(active.level) + ", type " + types_text(*active.species) + ", HP " +
                  std::to_string(active.current_hp) + "/" + std::to_string(active.max_hp()) + ", status " +
                  status_text(active.status, true) + ".");
    act.push_back("Stat stages: " + stages_text(active.stages) + ".");
    act.push_back("Moves:");
    for (std::size_t i = 0; i < active.moves.size(); ++i)
        act.push_back(move_line(static_cast<int>(i) + 1, active.moves[i]));

    std::vector<std::string> bench;
    for (std::size_t i = 0; i < state.party.size(); ++i) {
        if (static_cast<int>(i) == state.active) continue;
        const Monster& m = state.party[i];
        std::string line = "  " + std::to_string(i + 1) + ". " + m.name() + ", level " + std::to_string(m.level) +
                           ", type " + types_text(*m.species) + ", ";
        line += m.fainted() ? std::string("fainted")
                            : "HP " + std::to_string(m.current_hp) + "/" + std::to_string(m.max_hp()) + ", status " +
                                  status_text(m.status, true);
        bench.push_back(line);
    }
    if (!bench.empty()) bench.insert(bench.begin(), "Bench:");

    std::vector<std::string> bag{"Bag:"};
    for (std::size_t i = 0; i < state.bag.slots.size(); ++i) {
        const auto& slot = state.bag.slots[i];
        bag.push_back("  " + std::to_string(i + 1) + ". " + std::string(item_name(slot.item)) + " x" +
                      std::to_string(slot.count));
    }
    if (bag.size() == 1) bag.push_back("  (empty)");

    std::vector<std::string> hist;
    if (!history.empty()) {
        hist.push_back("Recent rounds, oldest first:");
        int n = 1;
        for (const auto& round : history.rounds()) {
            hist.push_back("  Round " + std::to_string(n++) + ":");
            if (round.empty()) hist.push_back("    (nothing happened)");
            for (const auto& line : round) hist.push_back("    " + line);
        }
    }

    std::vector<std::string> mem;
    if (!memory_snippets.empty()) {
        mem.push_back("Past experiences:");
        for (const auto& s : memory_snippets) mem.push_back("  " + s);
    }

    std::vector<std::string> actions{"Valid actions (choose exactly one):"};
    for (const Action& a : engine.valid_actions(state, mask))
        actions.push_back("  " + to_wire(to_request(a, state)) + "  " + action_label(a, state));

    return tmpl.render({{"situation", situation},
                        {"enemy", en.str()},
                        {"active", join_lines(act)},
                        {"bench", join_lines(bench)},
                        {"bag", join_lines(bag)},
                        {"history", join_lines(hist)},
                        {"memory", join_lines(mem)},
                        {"actions", join_lines(actions)}});
}

ActionRequest parse_action(const std::string& raw) {
    bool saw_object = false;
    for (std::size_t open = raw.find('{'); open != std::string::npos; open = raw.find('{', open + 1)) {
        const auto close = object_end(raw, open);
        if (!close) continue;
        const json obj = json::parse(raw.substr(open, *close - open + 1), nullptr, false);
        if (obj.is_discarded() || !obj.is_object()) continue;
        saw_object = true;
        for (const auto& [key, value] : obj.items()) {
            if (lower(trim(key)) == "action") return request_from_object(obj, raw);
        }
    }
    if (saw_object) throw ParseError("JSON object has no 'action' field");
    throw ParseError("no JSON object found in the reply");
}

Action validate_action(const ActionRequest& req, const ActionSet& valid, const BattleState& state) {
    auto reject = [&](const std::string& why) -> Action { throw InvalidActionError(req, why); };
    const Monster& active = state.active_monster();

    switch (req.kind) {
        case ActionKind::Move: {
            expects(req.index.has_value(), "move request without index");
            const int slot = *req.index - 1;
            if (slot == 0 && contains(valid, action::Struggle{})) return action::Struggle{};
            const Action a = action::UseMove{slot};
            if (contains(valid, a)) return a;
            if (state.forced_switch_pending) return reject("a fainted Pokemon must be replaced first");
            if (slot >= static_cast<int>(active.moves.size()))
                return reject("there is no move in slot " + std::to_string(*req.index));
            if (active.moves[static_cast<std::size_t>(slot)].pp == 0)
                return reject("move " + std::to_string(*req.index) + " (" +
                              active.moves[static_cast<std::size_t>(slot)].move->name + ") has no PP left");
            return reject("move " + std::to_string(*req.index) + " is not a valid action now");
        }
        case ActionKind::Switch: {
            expects(req.index.has_value(), "switch request without index");
            const int idx = *req.index - 1;
            const Action a = action::Switch{idx};
            if (contains(valid, a)) return a;
            if (idx >= static_cast<int>(state.party.size()))
                return reject("there is no Pokemon in party slot " + std::to_string(*req.index));
            if (idx == state.active) return reject(active.name() + " is already in battle");
            if (state.party[static_cast<std::size_t>(idx)].fainted())
                return reject(state.party[static_cast<std::size_t>(idx)].name() + " has fainted");
            return reject("switching is not allowed now");
        }
        case ActionKind::Item: {
            expects(req.index.has_value(), "item request without index");
            const int slot = *req.index - 1;
            const int target = req.target ? *req.target - 1 : state.active;
            const Action a = action::UseItem{slot, target};
            if (contains(valid, a)) return a;
            if (slot >= static_cast<int>(state.bag.slots.size()))
                return reject("there is no item in bag slot " + std::to_string(*req.index));
            const auto& bag_slot = state.bag.slots[static_cast<std::size_t>(slot)];
            if (bag_slot.item != ItemKind::Potion)
                return reject(std::string(item_name(bag_slot.item)) + " cannot be used in this battle");
            if (bag_slot.count == 0) return reject("no " + std::string(item_name(bag_slot.item)) + " left");
            if (target >= static_cast<int>(state.party.size()))
                return reject("there is no Pokemon in party slot " + std::to_string(target + 1));
            return reject("items are not allowed now");
        }
        case ActionKind::Run:
            if (contains(valid, action::Run{})) return action::Run{};
            return reject("running away is not allowed now");
    }
    return reject("unknown action");
}

}  // namespace pokeai::agent_io
