#pragma once

#include "agentkit/provider.hpp"
#include "agentkit/runtime.hpp"

#include <memory>
#include <ostream>
#include <string>
#include <vector>

namespace agentkit {

/// A role-playing assistant: a name plus the description and system message
/// used to frame every task prompt.
struct RoleSpec {
    std::string name;
    std::string description;
    std::string system_message;
};

struct RoundRobinStep {
    std::string role;
    std::string result;
};

struct RoundRobinResult {
    std::vector<RoundRobinStep> steps;
    std::string accumulated;  // task plus every result, in order
    bool terminated = false;  // a result carried the TERMINATE marker
};

/// Assistant agent program. Startup args: [description, system message],
/// stored as beliefs. On `request task(T)` it agrees, chats with the prompt
/// `${description}${systemMessage}${task}`, and informs the requester of the
/// result. Provider failures are reported back as the result text.
Behavior make_assistant_behavior(std::string behavior_id,
                                 std::shared_ptr<ChatProvider> provider);

struct RoundRobinOptions {
    std::ostream* section_out = nullptr;  // "-----<name>-----" section printing
    std::optional<std::chrono::milliseconds> step_timeout;
    std::string separator = "\n\n";
};

/// Sends `request task(...)` to each role in order, waiting for the matching
/// `responded(name, result)` belief before moving on. Each step's outgoing
/// task string carries the original task and all earlier results. A result
/// containing "TERMINATE" ends the run early. The calling behavior must add
/// `responded(sender, result)` beliefs from its inform handler (see
/// add_round_robin_handlers).
RoundRobinResult run_round_robin(AgentContext& orchestrator,
                                 const std::vector<RoleSpec>& roles,
                                 const std::string& task,
                                 const RoundRobinOptions& options = {});

/// Registers the inform handler that records `responded(sender, result)`.
void add_round_robin_handlers(Behavior& behavior);

/// Spawns one assistant agent per role, named after the role, passing
/// description and system message as startup args.
void spawn_assistants(AgentContext& orchestrator, const std::string& assistant_behavior_id,
                      const std::vector<RoleSpec>& roles);

}  // namespace agentkit
