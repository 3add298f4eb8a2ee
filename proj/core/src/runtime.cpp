#include "agentkit/runtime.hpp"

#include <algorithm>
#include <condition_variable>
#include <deque>
#include <fstream>
#include <future>
#include <thread>

namespace agentkit {

using nlohmann::json;

namespace {

// Raised inside an agent's pump when the system shuts down while the agent is
// suspended; unwinds the behavior without being user-visible.
struct ShutdownInterrupt {};

std::string now_iso8601() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch())
                  .count() % 1000;
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ",
                  tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min,
                  tm.tm_sec, static_cast<int>(ms));
    return buf;
}

}  // namespace

void Transcript::set_meta(json meta) {
    std::lock_guard lock(mutex_);
    meta_ = std::move(meta);
}

json Transcript::meta() const {
    std::lock_guard lock(mutex_);
    return meta_;
}

void Transcript::append(const std::string& agent, const std::string& type, json fields) {
    std::lock_guard lock(mutex_);
    std::uint64_t seq = next_seq_[agent]++;
    events_.push_back({agent, seq, type, std::move(fields), now_iso8601()});
}

std::vector<TranscriptEvent> Transcript::events() const {
    std::lock_guard lock(mutex_);
    return events_;
}

std::size_t Transcript::count(const std::string& type) const {
    std::lock_guard lock(mutex_);
    return static_cast<std::size_t>(
        std::count_if(events_.begin(), events_.end(),
                      [&](const TranscriptEvent& e) { return e.type == type; }));
}

std::string Transcript::render(bool include_ts) const {
    std::vector<TranscriptEvent> sorted;
    json meta;
    {
        std::lock_guard lock(mutex_);
        sorted = events_;
        meta = meta_;
    }
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const TranscriptEvent& a, const TranscriptEvent& b) {
                         return std::tie(a.agent, a.seq) < std::tie(b.agent, b.seq);
                     });
    if (!include_ts && meta.is_object()) {
        meta.erase("times");  // wall-clock metadata stays out of the canonical body
    }
    std::string out;
    out += json{{"meta", meta}}.dump();
    out += '\n';
    for (const TranscriptEvent& e : sorted) {
        json line{{"agent", e.agent}, {"seq", e.seq}, {"type", e.type}, {"fields", e.fields}};
        if (include_ts) line["ts"] = e.ts;
        out += line.dump();
        out += '\n';
    }
    return out;
}

std::string Transcript::body() const {
    return render(false);
}

std::string Transcript::to_jsonl() const {
    return render(true);
}

void Transcript::write_file(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot open transcript file " + path.string());
    }
    out << to_jsonl();
}

// ---------------------------------------------------------------------------

class Agent {
public:
    Agent(AgentSystem& system, std::string name, Behavior behavior,
          const AgentSpec& spec)
        : system_(system),
          name_(std::move(name)),
          behavior_(std::move(behavior)),
          args_(spec.args),
          ctx_(*this) {
        for (const Predicate& p : spec.initial_beliefs) {
            beliefs_.add(p);
        }
        startup_future_ = startup_done_.get_future().share();
    }

    ~Agent() { stop_and_join(); }

    void start() {
        thread_ = std::thread([this] { run(); });
    }

    void enqueue(Message msg) {
        {
            std::lock_guard lock(mutex_);
            mailbox_.push_back(std::move(msg));
        }
        cv_.notify_all();
    }

    void stop() {
        {
            std::lock_guard lock(mutex_);
            stopping_ = true;
        }
        cv_.notify_all();
    }

    void stop_and_join() {
        stop();
        if (thread_.joinable()) thread_.join();
    }

    void wait_startup() { startup_future_.get(); }

    const std::string& name() const { return name_; }
    BeliefBase& beliefs() { return beliefs_; }
    AgentSystem& system() { return system_; }

    Substitution wait(const Predicate& pattern,
                      std::optional<std::chrono::milliseconds> timeout) {
        auto effective = timeout.value_or(system_.config().default_wait_timeout);
        auto deadline = std::chrono::steady_clock::now() + effective;
        log("wait_begin", json{{"pattern", pattern.to_string()}});
        while (true) {
            auto matches = beliefs_.query(pattern);
            if (!matches.empty()) {
                log("wait_end", json{{"pattern", pattern.to_string()}});
                return matches.front();
            }
            auto msg = pop_until(deadline);
            if (!msg) {
                log("wait_timeout", json{{"pattern", pattern.to_string()}});
                throw WaitTimeout("wait on " + pattern.to_string() + " timed out after " +
                                  std::to_string(effective.count()) + " ms");
            }
            dispatch(*msg);  // handler exceptions propagate and interrupt the wait
        }
    }

    void log(const std::string& type, json fields) {
        system_.transcript().append(name_, type, std::move(fields));
    }

private:
    void run() {
        log("spawn", json{{"behavior", behavior_.id}});
        try {
            if (behavior_.on_start) {
                behavior_.on_start(ctx_, args_);
            }
            startup_done_.set_value();
        } catch (const ShutdownInterrupt&) {
            startup_done_.set_value();
            return;
        } catch (...) {
            log("error", json{{"where", "startup"}});
            startup_done_.set_exception(std::current_exception());
        }
        while (true) {
            std::optional<Message> msg;
            {
                std::unique_lock lock(mutex_);
                cv_.wait(lock, [this] { return stopping_ || !mailbox_.empty(); });
                if (stopping_ && mailbox_.empty()) return;
                if (!mailbox_.empty()) {
                    msg = std::move(mailbox_.front());
                    mailbox_.pop_front();
                }
            }
            if (!msg) return;
            try {
                dispatch(*msg);
            } catch (const ShutdownInterrupt&) {
                return;
            } catch (const std::exception& e) {
                log("error", json{{"where", "handler"}, {"what", e.what()}});
            }
        }
    }

    std::optional<Message> pop_until(std::chrono::steady_clock::time_point deadline) {
        std::unique_lock lock(mutex_);
        cv_.wait_until(lock, deadline,
                       [this] { return stopping_ || !mailbox_.empty(); });
        if (stopping_) throw ShutdownInterrupt{};
        if (mailbox_.empty()) return std::nullopt;
        Message msg = std::move(mailbox_.front());
        mailbox_.pop_front();
        return msg;
    }

    void dispatch(const Message& msg) {
        for (const MessageHandler& handler : behavior_.handlers) {
            if (handler.performative != msg.performative) continue;
            auto sub = unify(handler.pattern, msg.content);
            if (!sub) continue;
            log("handle", json{{"performative", msg.performative},
                               {"from", msg.sender},
                               {"content", msg.content.to_string()}});
            handler.fn(ctx_, msg.sender, *sub);
            return;
        }
        log("drop", json{{"performative", msg.performative},
                         {"from", msg.sender},
                         {"content", msg.content.to_string()},
                         {"warning", "no handler matched"}});
    }

    AgentSystem& system_;
    std::string name_;
    Behavior behavior_;
    std::vector<std::string> args_;
    BeliefBase beliefs_;
    AgentContext ctx_;

    std::mutex mutex_;
    std::condition_variable cv_;
    std::deque<Message> mailbox_;
    bool stopping_ = false;

    std::promise<void> startup_done_;
    std::shared_future<void> startup_future_;
    std::thread thread_;
};

// ---------------------------------------------------------------------------

const std::string& AgentContext::name() const {
    return agent_.name();
}

BeliefBase& AgentContext::beliefs() {
    return agent_.beliefs();
}

void AgentContext::send(const Performative& performative, const std::string& to,
                        const Predicate& content) {
    agent_.system().send(agent_.name(), performative, to, content);
}

Substitution AgentContext::wait(const Predicate& pattern,
                                std::optional<std::chrono::milliseconds> timeout) {
    return agent_.wait(pattern, timeout);
}

std::string AgentContext::spawn(const AgentSpec& spec, const std::string& name) {
    return agent_.system().spawn(spec, name);
}

AgentSystem& AgentContext::system() {
    return agent_.system();
}

void AgentContext::log(const std::string& type, json fields) {
    agent_.log(type, std::move(fields));
}

// ---------------------------------------------------------------------------

AgentSystem::AgentSystem(SystemConfig config, Transcript* transcript)
    : config_(std::move(config)),
      transcript_(transcript ? transcript : &own_transcript_) {}

AgentSystem::~AgentSystem() {
    shutdown();
}

void AgentSystem::register_behavior(Behavior behavior) {
    std::lock_guard lock(mutex_);
    behaviors_[behavior.id] = std::move(behavior);
}

bool AgentSystem::has_behavior(const std::string& id) const {
    std::lock_guard lock(mutex_);
    return behaviors_.count(id) != 0;
}

std::string AgentSystem::spawn(const AgentSpec& spec, const std::string& name) {
    if (name.empty()) {
        throw Error("agent name must be nonempty");
    }
    Agent* agent = nullptr;
    {
        std::lock_guard lock(mutex_);
        if (agents_.count(name)) {
            throw DuplicateName("agent '" + name + "' already exists");
        }
        auto behavior_it = behaviors_.find(spec.behavior_id);
        if (behavior_it == behaviors_.end()) {
            throw UnknownBehavior("behavior '" + spec.behavior_id + "' is not registered");
        }
        auto owned = std::make_unique<Agent>(*this, name, behavior_it->second, spec);
        agent = owned.get();
        agents_.emplace(name, std::move(owned));
    }
    agent->start();
    return name;
}

void AgentSystem::send(const std::string& from, const Performative& performative,
                       const std::string& to, const Predicate& content) {
    if (!config_.performatives.count(performative)) {
        throw InvalidPerformative("performative '" + performative + "' is not configured");
    }
    if (!content.is_ground()) {
        throw NonGroundContent("message content must be ground: " + content.to_string());
    }
    Agent* receiver = find_agent(to);
    if (!receiver) {
        throw UnknownReceiver("no agent named '" + to + "'");
    }
    transcript().append(from, "send",
                        json{{"performative", performative},
                             {"to", to},
                             {"content", content.to_string()}});
    receiver->enqueue({performative, from, to, content});
}

void AgentSystem::wait_startup(const std::string& name) {
    Agent* agent = find_agent(name);
    if (!agent) {
        throw UnknownReceiver("no agent named '" + name + "'");
    }
    agent->wait_startup();
}

bool AgentSystem::agent_exists(const std::string& name) const {
    return find_agent(name) != nullptr;
}

void AgentSystem::shutdown() {
    std::vector<Agent*> live;
    {
        std::lock_guard lock(mutex_);
        if (shut_down_) return;
        shut_down_ = true;
        for (auto& [name, agent] : agents_) live.push_back(agent.get());
    }
    for (Agent* agent : live) agent->stop();
    for (Agent* agent : live) agent->stop_and_join();
}

Transcript& AgentSystem::transcript() {
    return *transcript_;
}

Agent* AgentSystem::find_agent(const std::string& name) const {
    std::lock_guard lock(mutex_);
    auto it = agents_.find(name);
    return it == agents_.end() ? nullptr : it->second.get();
}

}  // namespace agentkit
