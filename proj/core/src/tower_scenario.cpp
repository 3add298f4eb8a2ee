#include "agentkit/blocks.hpp"

#include <future>
#include <mutex>

namespace agentkit::blocks {

using nlohmann::json;

namespace {

struct ScenarioShared {
    std::mutex mutex;
    BlocksState env_state;
    ScenarioResult result;
    std::promise<void> done;
    bool done_set = false;

    void finish() {
        if (!done_set) {
            done_set = true;
            done.set_value();
        }
    }
};

Behavior make_env_behavior(std::string behavior_id, std::shared_ptr<ScenarioShared> shared,
                           std::string planner_name) {
    Behavior behavior;
    behavior.id = std::move(behavior_id);

    // Announce the configured block set; the planner triggers on the last one.
    behavior.on_start = [shared, planner_name](AgentContext& ctx,
                                               const std::vector<std::string>&) {
        std::vector<std::string> blocks;
        {
            std::lock_guard lock(shared->mutex);
            blocks.assign(shared->env_state.blocks().begin(),
                          shared->env_state.blocks().end());
        }
        for (const std::string& block : blocks) {
            ctx.send(performative::inform, planner_name,
                     Predicate("block", {Term::text(block)}));
        }
    };

    behavior.on_message(
        performative::request, Predicate("pickup", {Term::var("X", TermType::Text)}),
        [shared, planner_name](AgentContext& ctx, const std::string&,
                               const Substitution& sub) {
            const std::string& block = sub.at("X").text_value();
            try {
                std::lock_guard lock(shared->mutex);
                shared->env_state =
                    exec_action(shared->env_state, BlockAction::pickup(block));
            } catch (const Error& e) {
                ctx.send(performative::inform, planner_name,
                         Predicate("action_failed", {Term::text(e.what())}));
                return;
            }
            ctx.send(performative::inform, planner_name,
                     Predicate("holding", {Term::text(block)}));
        });

    behavior.on_message(
        performative::request,
        Predicate("putdown",
                  {Term::var("A", TermType::Text), Term::var("B", TermType::Text)}),
        [shared, planner_name](AgentContext& ctx, const std::string&,
                               const Substitution& sub) {
            const std::string& block = sub.at("A").text_value();
            const std::string& dest = sub.at("B").text_value();
            try {
                std::lock_guard lock(shared->mutex);
                shared->env_state =
                    exec_action(shared->env_state, BlockAction::putdown(block, dest));
            } catch (const Error& e) {
                ctx.send(performative::inform, planner_name,
                         Predicate("action_failed", {Term::text(e.what())}));
                return;
            }
            ctx.send(performative::inform, planner_name,
                     Predicate("on", {Term::text(block), Term::text(dest)}));
        });

    return behavior;
}

struct PlannerWiring {
    ChatProvider* provider;
    TowerGoal goal;
    std::string env_name;
    std::string trigger_block;  // last announced block starts the run
    std::shared_ptr<ScenarioShared> shared;
    std::optional<std::chrono::milliseconds> step_timeout;
};

void execute_plan(AgentContext& ctx, const PlannerWiring& wiring,
                  const std::vector<BlockAction>& plan) {
    for (const BlockAction& action : plan) {
        try {
            if (action.kind == BlockAction::Kind::Pickup) {
                ctx.send(performative::request, wiring.env_name,
                         Predicate("pickup", {Term::text(action.block)}));
                ctx.wait(Predicate("holding", {Term::text(action.block)}),
                         wiring.step_timeout);
            } else {
                ctx.send(performative::request, wiring.env_name,
                         Predicate("putdown",
                                   {Term::text(action.block), Term::text(action.dest)}));
                ctx.wait(Predicate("on", {Term::text(action.block),
                                          Term::text(action.dest)}),
                         wiring.step_timeout);
            }
        } catch (const Error& e) {
            std::lock_guard lock(wiring.shared->mutex);
            wiring.shared->result.outcomes.push_back({action, false, e.what()});
            return;  // later preconditions depend on this step; stop here
        }
        std::lock_guard lock(wiring.shared->mutex);
        wiring.shared->result.outcomes.push_back({action, true, ""});
    }
}

void run_plan(AgentContext& ctx, const PlannerWiring& wiring, CompositeTemplate& tmpl) {
    std::vector<BlockAction> plan;
    try {
        std::string prompt = build_tower_prompt(tmpl, wiring.goal, ctx.beliefs());
        std::string reply = wiring.provider->chat(prompt);
        if (auto idx = wiring.provider->last_recorded_index()) {
            ctx.log("chat", json{{"exchange", *idx}});
        }
        plan = parse_plan(reply);
    } catch (const Error& e) {
        std::lock_guard lock(wiring.shared->mutex);
        wiring.shared->result.error = e.what();
        wiring.shared->finish();
        return;
    }
    {
        std::lock_guard lock(wiring.shared->mutex);
        wiring.shared->result.plan = plan;
    }
    execute_plan(ctx, wiring, plan);
    std::lock_guard lock(wiring.shared->mutex);
    wiring.shared->result.final_state = wiring.shared->env_state;
    wiring.shared->result.goal_ok =
        goal_satisfied(wiring.shared->env_state, wiring.goal);
    wiring.shared->finish();
}

Behavior make_planner_behavior(std::string behavior_id, PlannerWiring wiring) {
    Behavior behavior;
    behavior.id = std::move(behavior_id);

    auto tmpl = std::make_shared<CompositeTemplate>(make_tower_template());

    behavior.on_message(
        performative::inform, Predicate("block", {Term::var("B", TermType::Text)}),
        [wiring, tmpl](AgentContext& ctx, const std::string&, const Substitution& sub) {
            const std::string& block = sub.at("B").text_value();
            ctx.beliefs().add(Predicate("block", {Term::text(block)}));
            if (block == wiring.trigger_block) {
                ctx.log("target", json{{"tower", tower_goal_text(wiring.goal)}});
                run_plan(ctx, wiring, *tmpl);
            }
        });

    // Environment effect notifications keep the belief mirror in step and wake
    // the waits issued during plan execution.
    behavior.on_message(
        performative::inform, Predicate("holding", {Term::var("X", TermType::Text)}),
        [](AgentContext& ctx, const std::string&, const Substitution& sub) {
            const Term& block = sub.at("X");
            for (const Substitution& old : ctx.beliefs().query(
                     Predicate("on", {block, Term::var("S", TermType::Text)}))) {
                ctx.beliefs().remove(Predicate("on", {block, old.at("S")}));
            }
            ctx.beliefs().add(Predicate("holding", {block}));
        });
    behavior.on_message(
        performative::inform,
        Predicate("on", {Term::var("A", TermType::Text), Term::var("B", TermType::Text)}),
        [](AgentContext& ctx, const std::string&, const Substitution& sub) {
            const Term& block = sub.at("A");
            ctx.beliefs().remove(Predicate("holding", {block}));
            for (const Substitution& old : ctx.beliefs().query(
                     Predicate("on", {block, Term::var("S", TermType::Text)}))) {
                ctx.beliefs().remove(Predicate("on", {block, old.at("S")}));
            }
            ctx.beliefs().add(Predicate("on", {block, sub.at("B")}));
        });
    behavior.on_message(
        performative::inform,
        Predicate("action_failed", {Term::var("R", TermType::Text)}),
        [](AgentContext&, const std::string&, const Substitution& sub) {
            throw ActionFailed(sub.at("R").text_value());
        });

    return behavior;
}

}  // namespace

ScenarioResult run_tower_scenario(AgentSystem& system, ChatProvider& provider,
                                  const BlocksState& initial, const TowerGoal& goal,
                                  const TowerScenarioOptions& options,
                                  const std::string& agent_prefix) {
    if (goal.empty()) {
        throw InvalidConfig("tower goal must not be empty");
    }
    if (initial.blocks().empty()) {
        throw InvalidConfig("initial state declares no blocks");
    }
    auto shared = std::make_shared<ScenarioShared>();
    shared->env_state = initial;
    shared->result.final_state = initial;

    std::string planner_name = agent_prefix + "tower";
    std::string env_name = agent_prefix + "towerenv";

    PlannerWiring wiring;
    wiring.provider = &provider;
    wiring.goal = goal;
    wiring.env_name = env_name;
    wiring.trigger_block = initial.blocks().empty() ? "" : *initial.blocks().rbegin();
    wiring.shared = shared;
    wiring.step_timeout = options.step_timeout;

    system.register_behavior(
        make_planner_behavior(agent_prefix + "tower_planner", wiring));
    system.register_behavior(
        make_env_behavior(agent_prefix + "tower_env", shared, planner_name));

    AgentSpec planner_spec;
    planner_spec.behavior_id = agent_prefix + "tower_planner";
    planner_spec.initial_beliefs = initial.to_beliefs();
    system.spawn(planner_spec, planner_name);
    system.spawn({agent_prefix + "tower_env", {}, {}}, env_name);

    auto future = shared->done.get_future();
    auto step = options.step_timeout.value_or(system.config().default_wait_timeout);
    auto total = step * 24;
    if (future.wait_for(total) != std::future_status::ready) {
        throw WaitTimeout("tower scenario did not finish within " +
                          std::to_string(total.count()) + " ms");
    }
    std::lock_guard lock(shared->mutex);
    return shared->result;
}

}  // namespace agentkit::blocks
