#include "agentkit/blocks.hpp"

#include <algorithm>
#include <cctype>

namespace agentkit::blocks {

using nlohmann::json;

BlockAction BlockAction::pickup(std::string block) {
    return {Kind::Pickup, std::move(block), ""};
}

BlockAction BlockAction::putdown(std::string block, std::string dest) {
    return {Kind::Putdown, std::move(block), std::move(dest)};
}

std::string BlockAction::to_string() const {
    if (kind == Kind::Pickup) return "pickup(" + block + ")";
    return "putdown(" + block + "," + dest + ")";
}

BlocksState BlocksState::create(const std::map<std::string, std::string>& on,
                                const std::optional<std::string>& holding,
                                const std::set<std::string>& extra_blocks) {
    BlocksState s;
    s.on_ = on;
    s.holding_ = holding;
    s.blocks_ = extra_blocks;
    for (const auto& [block, support] : on) {
        s.blocks_.insert(block);
        if (support != kTable) s.blocks_.insert(support);
    }
    if (holding) {
        s.blocks_.insert(*holding);
        if (on.count(*holding)) {
            throw InvalidState("held block '" + *holding + "' also has a support");
        }
    }
    // every non-held block needs a support, supports must be unique, and
    // chains must reach the table
    std::map<std::string, int> load;
    for (const auto& [block, support] : on) {
        if (block == kTable) {
            throw InvalidState("'table' cannot be a block");
        }
        if (support != kTable) ++load[support];
    }
    for (const auto& [support, count] : load) {
        if (count > 1) {
            throw InvalidState("block '" + support + "' supports more than one block");
        }
        if (holding && *holding == support) {
            throw InvalidState("held block '" + support + "' supports another block");
        }
    }
    for (const std::string& block : s.blocks_) {
        if (holding && *holding == block) continue;
        if (!s.on_.count(block)) {
            // blocks only named as supports or extras default to the table
            s.on_[block] = kTable;
        }
    }
    for (const auto& [block, _] : s.on_) {
        std::string cursor = block;
        std::set<std::string> seen;
        while (cursor != kTable) {
            if (!seen.insert(cursor).second) {
                throw InvalidState("support cycle through '" + cursor + "'");
            }
            auto it = s.on_.find(cursor);
            if (it == s.on_.end()) {
                throw InvalidState("block '" + cursor + "' has no support");
            }
            cursor = it->second;
        }
    }
    return s;
}

bool BlocksState::has_block(const std::string& name) const {
    return blocks_.count(name) != 0;
}

bool BlocksState::is_clear(const std::string& block) const {
    if (!has_block(block)) {
        throw UnknownBlock("no block named '" + block + "'");
    }
    if (holding_ && *holding_ == block) return false;
    return std::none_of(on_.begin(), on_.end(),
                        [&](const auto& kv) { return kv.second == block; });
}

std::optional<std::string> BlocksState::support_of(const std::string& block) const {
    if (!has_block(block)) {
        throw UnknownBlock("no block named '" + block + "'");
    }
    auto it = on_.find(block);
    if (it == on_.end()) return std::nullopt;
    return it->second;
}

std::vector<Predicate> BlocksState::to_beliefs() const {
    std::vector<Predicate> out;
    for (const auto& [block, support] : on_) {
        out.emplace_back("on", std::vector<Term>{Term::text(block), Term::text(support)});
    }
    if (holding_) {
        out.emplace_back("holding", std::vector<Term>{Term::text(*holding_)});
    }
    return out;
}

json BlocksState::to_json() const {
    json on = json::object();
    for (const auto& [block, support] : on_) on[block] = support;
    return json{{"on", on},
                {"holding", holding_ ? json(*holding_) : json(nullptr)},
                {"blocks", blocks_}};
}

BlocksState exec_action(const BlocksState& state, const BlockAction& action) {
    BlocksState next = state;
    if (action.kind == BlockAction::Kind::Pickup) {
        if (state.holding()) {
            throw GripperFull("already holding '" + *state.holding() + "'");
        }
        if (!state.has_block(action.block)) {
            throw UnknownBlock("no block named '" + action.block + "'");
        }
        if (!state.is_clear(action.block)) {
            throw BlockNotClear("block '" + action.block + "' is not clear");
        }
        next.on_.erase(action.block);
        next.holding_ = action.block;
        return next;
    }
    // putdown
    if (!state.holding()) {
        throw GripperEmpty("not holding anything");
    }
    if (*state.holding() != action.block) {
        throw GripperEmpty("holding '" + *state.holding() + "', not '" + action.block +
                           "'");
    }
    if (action.dest == action.block) {
        throw InvalidDestination("cannot put '" + action.block + "' on itself");
    }
    if (action.dest != kTable) {
        if (!state.has_block(action.dest)) {
            throw UnknownBlock("no block named '" + action.dest + "'");
        }
        if (!state.is_clear(action.dest)) {
            throw BlockNotClear("block '" + action.dest + "' is not clear");
        }
    }
    next.holding_.reset();
    next.on_[action.block] = action.dest;
    return next;
}

bool goal_satisfied(const BlocksState& state, const TowerGoal& goal) {
    if (goal.empty() || state.holding()) return false;
    for (std::size_t i = 0; i < goal.size(); ++i) {
        if (!state.has_block(goal[i])) return false;
        auto support = state.support_of(goal[i]);
        std::string expected = i == 0 ? kTable : goal[i - 1];
        if (!support || *support != expected) return false;
    }
    return state.is_clear(goal.back());
}

CompositeTemplate make_tower_template() {
    CompositeTemplate composite;

    composite.add_part(PromptTemplate(
        "I am an agent that can build block towers. A block tower is formed by placing "
        "blocks so they sit on top of each other. The bottom block of the tower sits on "
        "the table. Towers are defined as a list of blocks where blocks have names like "
        "\"a\", \"b\" or \"c\". The first block in the list sits on the table.\n\n"
        "In the situation where I want to build the tower [\"a\", \"b\"] then the desired "
        "state of the table would be:\n\n"
        "block \"a\" is on the table and block \"b\" is on \"a\". Block names should be "
        "lowercase."));

    RagTemplate state_section(
        "The following sentences define the current state of the blocks.");
    state_section.add_input(
        Predicate("on", {Term::var("A", TermType::Text), Term::var("B", TermType::Text)}),
        "block ${A} is on top of ${B}.");
    state_section.add_input(Predicate("holding", {Term::var("C", TermType::Text)}),
                            "the gripper is holding ${C}.");
    composite.add_part(std::move(state_section));

    composite.add_part(PromptTemplate(
        "I can perform two actions:\n"
        "- if I am not holding anything, I can pick up a block using the json "
        "\"{ 'action':'pickup', 'args':[X] }\".\n"
        "- if I am holding a block A, then I can put A down on either another block or "
        "the table using the json \"{ 'action':'putdown', 'args':[A, B] }\" where B is "
        "either the name of a block or the 'table'.\n\n"
        "Given the current state of the blocks, what sequence of actions should be "
        "performed next to build the tower ${tower}?\n\n"
        "Answer with only the list of actions defined using JSON."));

    return composite;
}

std::string tower_goal_text(const TowerGoal& goal) {
    std::string out = "[";
    for (std::size_t i = 0; i < goal.size(); ++i) {
        if (i) out += ", ";
        out += '"' + goal[i] + '"';
    }
    out += ']';
    return out;
}

std::string build_tower_prompt(CompositeTemplate& tmpl, const TowerGoal& goal,
                               const BeliefBase& beliefs) {
    tmpl.reset();
    tmpl.add_binding("tower", tower_goal_text(goal));
    return tmpl.render(beliefs);
}

std::string normalize_json_quotes(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool in_double = false;
    bool escaped = false;
    for (char c : text) {
        if (in_double) {
            out.push_back(c);
            if (escaped) {
                escaped = false;
            } else if (c == '\\') {
                escaped = true;
            } else if (c == '"') {
                in_double = false;
            }
            continue;
        }
        if (c == '"') {
            in_double = true;
            out.push_back(c);
        } else if (c == '\'') {
            out.push_back('"');
        } else {
            out.push_back(c);
        }
    }
    return out;
}

static std::string lowercase(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::vector<BlockAction> parse_plan(const std::string& reply) {
    ResponseTemplate fence("```json${json}```");
    fence.infer_bindings(reply);  // NoMatch when there is no fenced block
    std::string body = normalize_json_quotes(fence.get_binding("json"));

    json plan = json::parse(body, nullptr, false);
    if (plan.is_discarded() || !plan.is_array()) {
        throw MalformedPlan("fenced block is not a JSON array of actions");
    }
    std::vector<BlockAction> out;
    for (const json& step : plan) {
        if (!step.is_object() || !step.contains("action") || !step.contains("args") ||
            !step["args"].is_array()) {
            throw MalformedPlan("plan step needs 'action' and 'args': " + step.dump());
        }
        std::string kind = step["action"].is_string() ? step["action"].get<std::string>()
                                                      : "";
        std::vector<std::string> args;
        for (const json& arg : step["args"]) {
            if (!arg.is_string()) {
                throw MalformedPlan("plan arguments must be strings: " + step.dump());
            }
            args.push_back(lowercase(arg.get<std::string>()));
        }
        if (kind == "pickup") {
            if (args.size() != 1) {
                throw MalformedPlan("pickup takes one argument: " + step.dump());
            }
            out.push_back(BlockAction::pickup(args[0]));
        } else if (kind == "putdown") {
            if (args.size() != 2) {
                throw MalformedPlan("putdown takes two arguments: " + step.dump());
            }
            out.push_back(BlockAction::putdown(args[0], args[1]));
        } else {
            throw MalformedPlan("unknown action kind '" + kind + "'");
        }
    }
    return out;
}

std::string plan_to_fenced_json(const std::vector<BlockAction>& plan) {
    json steps = json::array();
    for (const BlockAction& action : plan) {
        json args = json::array();
        args.push_back(action.block);
        if (action.kind == BlockAction::Kind::Putdown) args.push_back(action.dest);
        steps.push_back(json{
            {"action", action.kind == BlockAction::Kind::Pickup ? "pickup" : "putdown"},
            {"args", args}});
    }
    return "```json\n" + steps.dump() + "\n```";
}

json ScenarioResult::to_json() const {
    json plan_json = json::array();
    for (const BlockAction& action : plan) plan_json.push_back(action.to_string());
    json outcomes_json = json::array();
    for (const ActionOutcome& outcome : outcomes) {
        json o{{"action", outcome.action.to_string()}, {"ok", outcome.ok}};
        if (!outcome.error.empty()) o["error"] = outcome.error;
        outcomes_json.push_back(std::move(o));
    }
    json out{{"plan", plan_json},
             {"outcomes", outcomes_json},
             {"final_state", final_state.to_json()},
             {"goal_satisfied", goal_ok}};
    if (!error.empty()) out["error"] = error;
    return out;
}

}  // namespace agentkit::blocks
