#pragma once

#include "agentkit/belief.hpp"
#include "agentkit/errors.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace agentkit {

struct DuplicateName : Error {
    using Error::Error;
};
struct UnknownBehavior : Error {
    using Error::Error;
};
struct UnknownReceiver : Error {
    using Error::Error;
};
struct NonGroundContent : Error {
    using Error::Error;
};
struct WaitTimeout : Error {
    using Error::Error;
};
struct InvalidPerformative : Error {
    using Error::Error;
};

using Performative = std::string;

namespace performative {
inline const Performative request = "request";
inline const Performative agree = "agree";
inline const Performative inform = "inform";
}  // namespace performative

struct Message {
    Performative performative;
    std::string sender;
    std::string receiver;
    Predicate content;
};

struct TranscriptEvent {
    std::string agent;
    std::uint64_t seq;  // strictly increasing per agent
    std::string type;
    nlohmann::json fields;
    std::string ts;
};

/// Ordered event log for a run. Appends are thread-safe; the canonical body
/// (events sorted by agent and per-agent sequence, timestamps excluded) is
/// deterministic for mock and replay runs.
class Transcript {
public:
    void set_meta(nlohmann::json meta);
    nlohmann::json meta() const;

    void append(const std::string& agent, const std::string& type, nlohmann::json fields);

    std::vector<TranscriptEvent> events() const;  // snapshot in arrival order
    std::size_t count(const std::string& type) const;

    /// Canonical reproducible body: one meta line, then events sorted by
    /// (agent, seq) with timestamps stripped.
    std::string body() const;

    /// Full JSONL including timestamps, in canonical order.
    std::string to_jsonl() const;
    void write_file(const std::filesystem::path& path) const;

private:
    std::string render(bool include_ts) const;

    mutable std::mutex mutex_;
    std::vector<TranscriptEvent> events_;
    std::map<std::string, std::uint64_t> next_seq_;
    nlohmann::json meta_ = nlohmann::json::object();
};

class Agent;
class AgentSystem;

/// Handle a behavior uses to act as its agent: beliefs, messaging, waiting,
/// spawning, logging. Valid only on the owning agent's execution context.
class AgentContext {
public:
    const std::string& name() const;
    BeliefBase& beliefs();

    void send(const Performative& performative, const std::string& to,
              const Predicate& content);

    /// Suspends the current activity until a belief matches the pattern,
    /// dispatching incoming messages while suspended. Returns the first
    /// match's substitution. WaitTimeout when the deadline passes.
    Substitution wait(const Predicate& pattern,
                      std::optional<std::chrono::milliseconds> timeout = std::nullopt);

    std::string spawn(const struct AgentSpec& spec, const std::string& name);

    AgentSystem& system();
    void log(const std::string& type, nlohmann::json fields);

private:
    friend class Agent;
    explicit AgentContext(Agent& agent) : agent_(agent) {}
    Agent& agent_;
};

using StartupFn = std::function<void(AgentContext&, const std::vector<std::string>&)>;
using HandlerFn =
    std::function<void(AgentContext&, const std::string& sender, const Substitution&)>;

struct MessageHandler {
    Performative performative;
    Predicate pattern;
    HandlerFn fn;
};

/// A registered agent program: an optional startup routine plus message
/// handlers matched by performative and content unification.
struct Behavior {
    std::string id;
    StartupFn on_start;
    std::vector<MessageHandler> handlers;

    Behavior& on_message(Performative performative, Predicate pattern, HandlerFn fn) {
        handlers.push_back({std::move(performative), std::move(pattern), std::move(fn)});
        return *this;
    }
};

struct AgentSpec {
    std::string behavior_id;
    std::vector<Predicate> initial_beliefs;
    std::vector<std::string> args;
};

struct SystemConfig {
    std::set<Performative> performatives{performative::request, performative::agree,
                                         performative::inform};
    std::chrono::milliseconds default_wait_timeout{120000};
};

/// Runs named agents, each with a private belief base and mailbox, on its own
/// execution context. The only inter-agent channel is send(); per-receiver
/// arrival order is FIFO.
class AgentSystem {
public:
    explicit AgentSystem(SystemConfig config = {}, Transcript* transcript = nullptr);
    ~AgentSystem();

    AgentSystem(const AgentSystem&) = delete;
    AgentSystem& operator=(const AgentSystem&) = delete;

    void register_behavior(Behavior behavior);
    bool has_behavior(const std::string& id) const;

    /// Starts an agent: belief base seeded from the spec, startup handler
    /// invoked with the spec's args. DuplicateName, UnknownBehavior.
    std::string spawn(const AgentSpec& spec, const std::string& name);

    /// UnknownReceiver, NonGroundContent, InvalidPerformative.
    void send(const std::string& from, const Performative& performative,
              const std::string& to, const Predicate& content);

    /// Blocks until the named agent's startup handler returns; rethrows any
    /// exception it raised.
    void wait_startup(const std::string& name);

    bool agent_exists(const std::string& name) const;

    /// Stops all agents and joins their threads. Idempotent.
    void shutdown();

    Transcript& transcript();
    const SystemConfig& config() const { return config_; }

private:
    friend class Agent;
    friend class AgentContext;

    Agent* find_agent(const std::string& name) const;

    SystemConfig config_;
    Transcript own_transcript_;
    Transcript* transcript_;

    mutable std::mutex mutex_;
    std::map<std::string, Behavior> behaviors_;
    std::map<std::string, std::unique_ptr<Agent>> agents_;
    bool shut_down_ = false;
};

}  // namespace agentkit
