#include "agentkit/orchestration.hpp"

namespace agentkit {

using nlohmann::json;

Behavior make_assistant_behavior(std::string behavior_id,
                                 std::shared_ptr<ChatProvider> provider) {
    Behavior behavior;
    behavior.id = std::move(behavior_id);
    behavior.on_start = [](AgentContext& ctx, const std::vector<std::string>& args) {
        if (args.size() < 2) {
            throw Error("assistant needs [description, system message] startup args");
        }
        ctx.beliefs().add(Predicate("description", {Term::text(args[0])}));
        ctx.beliefs().add(Predicate("systemMessage", {Term::text(args[1])}));
    };
    behavior.on_message(
        performative::request,
        Predicate("task", {Term::var("T", TermType::Text)}),
        [provider](AgentContext& ctx, const std::string& sender, const Substitution& sub) {
            const std::string& task = sub.at("T").text_value();
            ctx.send(performative::agree, sender, Predicate("task", {Term::text(task)}));

            auto desc = ctx.beliefs().query(
                Predicate("description", {Term::var("D", TermType::Text)}));
            auto sm = ctx.beliefs().query(
                Predicate("systemMessage", {Term::var("S", TermType::Text)}));
            if (desc.empty() || sm.empty()) {
                throw Error("assistant is missing description/systemMessage beliefs");
            }

            PromptTemplate prompt("${description}${systemMessage}${task}");
            prompt.add_binding("description", desc.front().at("D").text_value());
            prompt.add_binding("systemMessage", sm.front().at("S").text_value());
            prompt.add_binding("task", task);

            std::string reply;
            try {
                reply = chat(*provider, prompt);
                if (auto idx = provider->last_recorded_index()) {
                    ctx.log("chat", json{{"exchange", *idx}});
                }
            } catch (const Error& e) {
                reply = std::string("provider error: ") + e.what();
                ctx.log("provider_error", json{{"what", e.what()}});
            }
            ctx.send(performative::inform, sender,
                     Predicate("result", {Term::text(reply)}));
        });
    return behavior;
}

void add_round_robin_handlers(Behavior& behavior) {
    behavior.on_message(
        performative::inform,
        Predicate("result", {Term::var("R", TermType::Text)}),
        [](AgentContext& ctx, const std::string& sender, const Substitution& sub) {
            ctx.beliefs().add(Predicate(
                "responded", {Term::text(sender), Term::text(sub.at("R").text_value())}));
        });
}

void spawn_assistants(AgentContext& orchestrator, const std::string& assistant_behavior_id,
                      const std::vector<RoleSpec>& roles) {
    for (const RoleSpec& role : roles) {
        AgentSpec spec;
        spec.behavior_id = assistant_behavior_id;
        spec.args = {role.description, role.system_message};
        orchestrator.spawn(spec, role.name);
    }
}

RoundRobinResult run_round_robin(AgentContext& orchestrator,
                                 const std::vector<RoleSpec>& roles,
                                 const std::string& task,
                                 const RoundRobinOptions& options) {
    if (roles.empty()) {
        throw Error("round robin needs at least one role");
    }
    RoundRobinResult result;
    result.accumulated = task;
    for (const RoleSpec& role : roles) {
        orchestrator.send(performative::request, role.name,
                          Predicate("task", {Term::text(result.accumulated)}));
        Substitution sub = orchestrator.wait(
            Predicate("responded",
                      {Term::text(role.name), Term::var("R", TermType::Text)}),
            options.step_timeout);
        std::string role_result = sub.at("R").text_value();
        if (options.section_out) {
            (*options.section_out) << "-----" << role.name << "-----\n"
                                   << role_result << "\n";
        }
        orchestrator.log("section", json{{"role", role.name}, {"result", role_result}});
        result.steps.push_back({role.name, role_result});
        if (role_result.find("TERMINATE") != std::string::npos) {
            result.terminated = true;
            break;
        }
        result.accumulated += options.separator + role_result;
    }
    return result;
}

}  // namespace agentkit
