#pragma once

#include "agentkit/belief.hpp"
#include "agentkit/errors.hpp"
#include "agentkit/provider.hpp"
#include "agentkit/runtime.hpp"
#include "agentkit/templates.hpp"

#include <nlohmann/json.hpp>

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace agentkit::blocks {

struct GripperFull : Error {
    using Error::Error;
};
struct GripperEmpty : Error {
    using Error::Error;
};
struct BlockNotClear : Error {
    using Error::Error;
};
struct UnknownBlock : Error {
    using Error::Error;
};
struct InvalidDestination : Error {
    using Error::Error;
};
struct MalformedPlan : Error {
    using Error::Error;
};
struct InvalidState : Error {
    using Error::Error;
};

/// Environment reported a failed action while the planner was waiting on its
/// effect; interrupts plan execution.
struct ActionFailed : Error {
    using Error::Error;
};

inline constexpr const char* kTable = "table";

struct BlockAction {
    enum class Kind { Pickup, Putdown };
    Kind kind;
    std::string block;
    std::string dest;  // putdown only: block name or "table"

    static BlockAction pickup(std::string block);
    static BlockAction putdown(std::string block, std::string dest);

    std::string to_string() const;

    friend bool operator==(const BlockAction& a, const BlockAction& b) {
        return a.kind == b.kind && a.block == b.block && a.dest == b.dest;
    }
};

/// Blocks, a table, and a single gripper. Every block has exactly one support
/// (another block or the table) unless held; support chains end at the table.
class BlocksState {
public:
    BlocksState() = default;

    /// `on` maps block -> support. Blocks exist iff they appear in `on`, as a
    /// support, in `extra_blocks`, or as the held block. InvalidState on
    /// cycles, double-stacking, or a held block that is also supported.
    static BlocksState create(const std::map<std::string, std::string>& on,
                              const std::optional<std::string>& holding = std::nullopt,
                              const std::set<std::string>& extra_blocks = {});

    bool has_block(const std::string& name) const;
    const std::set<std::string>& blocks() const { return blocks_; }
    const std::optional<std::string>& holding() const { return holding_; }

    /// Nothing rests on it and it is not held. UnknownBlock.
    bool is_clear(const std::string& block) const;

    /// Support of a block, or nullopt while held. UnknownBlock.
    std::optional<std::string> support_of(const std::string& block) const;

    const std::map<std::string, std::string>& on_relation() const { return on_; }

    /// `on(a,b)` beliefs plus `holding(c)` when held — the RAG mining form.
    std::vector<Predicate> to_beliefs() const;

    nlohmann::json to_json() const;

    friend bool operator==(const BlocksState& a, const BlocksState& b) {
        return a.on_ == b.on_ && a.holding_ == b.holding_ && a.blocks_ == b.blocks_;
    }

    friend BlocksState exec_action(const BlocksState& state, const BlockAction& action);

private:
    std::map<std::string, std::string> on_;  // block -> support
    std::optional<std::string> holding_;
    std::set<std::string> blocks_;
};

/// Applies one action, returning the successor state. Precondition failures
/// throw (GripperFull, GripperEmpty, BlockNotClear, UnknownBlock,
/// InvalidDestination) and the input state is untouched.
BlocksState exec_action(const BlocksState& state, const BlockAction& action);

/// Tower goal: block names bottom-up; the first sits on the table.
using TowerGoal = std::vector<std::string>;

/// True iff the goal tower stands, the gripper is empty, and the tower's top
/// block is clear.
bool goal_satisfied(const BlocksState& state, const TowerGoal& goal);

/// The three-part planning prompt: environment description, belief-mined
/// state sentences, and the action request with its `${tower}` parameter.
CompositeTemplate make_tower_template();

/// `["a", "b", "c"]` — the text form the tower parameter is bound to.
std::string tower_goal_text(const TowerGoal& goal);

/// Resets the composite, binds the goal, renders against current beliefs.
std::string build_tower_prompt(CompositeTemplate& tmpl, const TowerGoal& goal,
                               const BeliefBase& beliefs);

/// Converts single-quoted JSON to double-quoted, leaving the inside of
/// double-quoted strings untouched.
std::string normalize_json_quotes(std::string_view text);

/// Extracts the first ```json fenced block from a reply and parses it as an
/// action array. Argument names are lowercased; single-quoted JSON accepted.
/// NoMatch when there is no fenced block, MalformedPlan otherwise.
std::vector<BlockAction> parse_plan(const std::string& reply);

/// The plan as a reply-shaped fenced JSON block (mock authoring, round-trips
/// through parse_plan).
std::string plan_to_fenced_json(const std::vector<BlockAction>& plan);

struct ActionOutcome {
    BlockAction action;
    bool ok = false;
    std::string error;
};

struct ScenarioResult {
    std::vector<BlockAction> plan;
    std::vector<ActionOutcome> outcomes;
    BlocksState final_state;
    bool goal_ok = false;
    std::string error;  // prompt/parse/provider failure, when any

    nlohmann::json to_json() const;
};

struct TowerScenarioOptions {
    std::optional<std::chrono::milliseconds> step_timeout;
};

/// Full planning run: the environment agent announces the block set, the
/// planner builds the composite prompt from its mirrored beliefs, chats,
/// parses the plan, and executes it action by action, waiting on the
/// environment's holding/on notifications. Execution stops at the first
/// failed action; every upstream error is captured into the result.
ScenarioResult run_tower_scenario(AgentSystem& system, ChatProvider& provider,
                                  const BlocksState& initial, const TowerGoal& goal,
                                  const TowerScenarioOptions& options = {},
                                  const std::string& agent_prefix = "");

}  // namespace agentkit::blocks
