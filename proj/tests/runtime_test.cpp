#include "agentkit/runtime.hpp"

#include "agentkit/orchestration.hpp"

#include <doctest.h>

#include <atomic>
#include <chrono>
#include <map>
#include <sstream>
#include <thread>

using namespace agentkit;
using namespace std::chrono_literals;

namespace {

SystemConfig fast_config() {
    SystemConfig cfg;
    cfg.default_wait_timeout = 5000ms;
    return cfg;
}

Behavior idle_behavior(const std::string& id) {
    Behavior b;
    b.id = id;
    return b;
}

MockScript default_script(const std::string& reply) {
    MockScript script;
    script.rules.push_back({MockRule::Match::Default, "", {reply}});
    return script;
}

}  // namespace

TEST_SUITE("runtime") {

TEST_CASE("spawn enforces unique names and registered behaviors") {
    AgentSystem system(fast_config());
    system.register_behavior(idle_behavior("idle"));
    system.spawn({"idle", {}, {}}, "a1");
    CHECK(system.agent_exists("a1"));
    CHECK_THROWS_AS(system.spawn({"idle", {}, {}}, "a1"), DuplicateName);
    CHECK_THROWS_AS(system.spawn({"nope", {}, {}}, "a2"), UnknownBehavior);
    system.shutdown();
}

TEST_CASE("spawn seeds beliefs and runs the startup handler with args") {
    AgentSystem system(fast_config());
    auto seen_args = std::make_shared<std::vector<std::string>>();
    auto seen_belief = std::make_shared<std::atomic<bool>>(false);
    Behavior b;
    b.id = "probe";
    b.on_start = [=](AgentContext& ctx, const std::vector<std::string>& args) {
        *seen_args = args;
        *seen_belief = ctx.beliefs().holds(Predicate("seed", {Term::text("v")}));
    };
    system.register_behavior(b);
    system.spawn({"probe", {Predicate("seed", {Term::text("v")})}, {"x", "y"}}, "p");
    system.wait_startup("p");
    CHECK(*seen_args == std::vector<std::string>{"x", "y"});
    CHECK(seen_belief->load());
    system.shutdown();
}

TEST_CASE("send validates receiver, groundness, and performative") {
    AgentSystem system(fast_config());
    system.register_behavior(idle_behavior("idle"));
    system.spawn({"idle", {}, {}}, "a");
    CHECK_THROWS_AS(
        system.send("a", performative::request, "ghost", Predicate("p", {})),
        UnknownReceiver);
    CHECK_THROWS_AS(system.send("a", performative::request, "a",
                                Predicate("p", {Term::var("X", TermType::Text)})),
                    NonGroundContent);
    CHECK_THROWS_AS(system.send("a", "shout", "a", Predicate("p", {})),
                    InvalidPerformative);
    system.shutdown();
}

TEST_CASE("first matching handler wins and unmatched messages are dropped") {
    AgentSystem system(fast_config());
    auto hits = std::make_shared<std::vector<std::string>>();
    auto mutex = std::make_shared<std::mutex>();
    Behavior b;
    b.id = "receiver";
    b.on_message(performative::request, Predicate("task", {Term::var("T", TermType::Text)}),
                 [=](AgentContext&, const std::string&, const Substitution& sub) {
                     std::lock_guard lock(*mutex);
                     hits->push_back("typed:" + sub.at("T").text_value());
                 });
    b.on_message(performative::request, Predicate("task", {Term::var("T", TermType::Text)}),
                 [=](AgentContext&, const std::string&, const Substitution&) {
                     std::lock_guard lock(*mutex);
                     hits->push_back("shadowed");
                 });
    system.register_behavior(b);
    system.spawn({"receiver", {}, {}}, "r");

    system.send("tester", performative::request, "r",
                Predicate("task", {Term::text("go")}));
    system.send("tester", performative::agree, "r",
                Predicate("task", {Term::text("ignored")}));
    system.send("tester", performative::request, "r",
                Predicate("task", {Term::integer(7)}));  // int arg: no unification

    std::this_thread::sleep_for(200ms);
    {
        std::lock_guard lock(*mutex);
        CHECK(*hits == std::vector<std::string>{"typed:go"});
    }
    CHECK(system.transcript().count("drop") == 2);
    system.shutdown();
}

TEST_CASE("per-pair FIFO: messages are handled in send order") {
    AgentSystem system(fast_config());
    auto order = std::make_shared<std::vector<std::int64_t>>();
    auto mutex = std::make_shared<std::mutex>();
    Behavior b;
    b.id = "collector";
    b.on_message(performative::inform, Predicate("n", {Term::var("I", TermType::Int)}),
                 [=](AgentContext&, const std::string&, const Substitution& sub) {
                     std::lock_guard lock(*mutex);
                     order->push_back(sub.at("I").int_value());
                 });
    system.register_behavior(b);
    system.spawn({"collector", {}, {}}, "c");
    for (int i = 0; i < 50; ++i) {
        system.send("producer", performative::inform, "c",
                    Predicate("n", {Term::integer(i)}));
    }
    std::this_thread::sleep_for(300ms);
    std::lock_guard lock(*mutex);
    REQUIRE(order->size() == 50);
    for (int i = 0; i < 50; ++i) CHECK((*order)[i] == i);
    system.shutdown();
}

TEST_CASE("wait returns immediately when the belief already holds") {
    AgentSystem system(fast_config());
    auto result = std::make_shared<Substitution>();
    Behavior b;
    b.id = "waiter";
    b.on_start = [=](AgentContext& ctx, const std::vector<std::string>&) {
        ctx.beliefs().add(Predicate("ready", {Term::text("now")}));
        *result = ctx.wait(Predicate("ready", {Term::var("W", TermType::Text)}), 100ms);
    };
    system.register_behavior(b);
    system.spawn({"waiter", {}, {}}, "w");
    system.wait_startup("w");
    CHECK(result->at("W").text_value() == "now");
    system.shutdown();
}

TEST_CASE("wait resumes when a handler adds the matching belief") {
    AgentSystem system(fast_config());
    auto got = std::make_shared<std::string>();
    Behavior b;
    b.id = "waiter";
    b.on_message(performative::inform, Predicate("result", {Term::var("R", TermType::Text)}),
                 [](AgentContext& ctx, const std::string& sender, const Substitution& sub) {
                     ctx.beliefs().add(Predicate(
                         "responded",
                         {Term::text(sender), Term::text(sub.at("R").text_value())}));
                 });
    b.on_start = [=](AgentContext& ctx, const std::vector<std::string>&) {
        Substitution sub = ctx.wait(
            Predicate("responded",
                      {Term::text("planner"), Term::var("R", TermType::Text)}),
            3000ms);
        *got = sub.at("R").text_value();
    };
    system.register_behavior(b);
    system.spawn({"waiter", {}, {}}, "w");
    std::this_thread::sleep_for(50ms);
    system.send("planner", performative::inform, "w",
                Predicate("result", {Term::text("PLAN-A")}));
    system.wait_startup("w");
    CHECK(*got == "PLAN-A");
    system.shutdown();
}

TEST_CASE("wait times out when nothing arrives") {
    AgentSystem system(fast_config());
    Behavior b;
    b.id = "waiter";
    b.on_start = [](AgentContext& ctx, const std::vector<std::string>&) {
        ctx.wait(Predicate("holding", {Term::text("a")}), 80ms);
    };
    system.register_behavior(b);
    system.spawn({"waiter", {}, {}}, "w");
    CHECK_THROWS_AS(system.wait_startup("w"), WaitTimeout);
    system.shutdown();
}

TEST_CASE("agents own distinct belief bases") {
    AgentSystem system(fast_config());
    auto addresses = std::make_shared<std::map<std::string, const void*>>();
    auto mutex = std::make_shared<std::mutex>();
    Behavior b;
    b.id = "auditor";
    b.on_start = [=](AgentContext& ctx, const std::vector<std::string>&) {
        std::lock_guard lock(*mutex);
        (*addresses)[ctx.name()] = &ctx.beliefs();
    };
    b.on_message(performative::inform, Predicate("again", {}),
                 [=](AgentContext& ctx, const std::string&, const Substitution&) {
                     std::lock_guard lock(*mutex);
                     CHECK((*addresses)[ctx.name()] == &ctx.beliefs());
                 });
    system.register_behavior(b);
    for (const char* name : {"a1", "a2", "a3"}) {
        system.spawn({"auditor", {}, {}}, name);
        system.wait_startup(name);
    }
    for (const char* name : {"a1", "a2", "a3"}) {
        system.send("test", performative::inform, name, Predicate("again", {}));
    }
    std::this_thread::sleep_for(150ms);
    std::lock_guard lock(*mutex);
    REQUIRE(addresses->size() == 3);
    CHECK(addresses->at("a1") != addresses->at("a2"));
    CHECK(addresses->at("a2") != addresses->at("a3"));
    CHECK(addresses->at("a1") != addresses->at("a3"));
    system.shutdown();
}

TEST_CASE("transcript sequences are strictly increasing per agent") {
    Transcript transcript;
    transcript.append("a", "t1", {});
    transcript.append("b", "t1", {});
    transcript.append("a", "t2", {});
    auto events = transcript.events();
    REQUIRE(events.size() == 3);
    CHECK(events[0].seq == 0);
    CHECK(events[1].seq == 0);
    CHECK(events[2].seq == 1);
    CHECK(transcript.body().find("\"ts\"") == std::string::npos);
    CHECK(transcript.to_jsonl().find("\"ts\"") != std::string::npos);
}

TEST_CASE("assistant agrees before informing and builds the concatenated prompt") {
    Transcript transcript;
    AgentSystem system(fast_config(), &transcript);
    auto provider = std::make_shared<MockProvider>(default_script("ASSISTANT-REPLY"));
    auto recorder = std::make_shared<Recorder>();
    provider->set_recorder(recorder);
    system.register_behavior(make_assistant_behavior("assistant", provider));

    auto got = std::make_shared<std::string>();
    Behavior requester;
    requester.id = "requester";
    add_round_robin_handlers(requester);
    requester.on_start = [=](AgentContext& ctx, const std::vector<std::string>&) {
        AgentSpec spec;
        spec.behavior_id = "assistant";
        spec.args = {"DESC.", "SYSTEM."};
        ctx.spawn(spec, "helper");
        ctx.send(performative::request, "helper",
                 Predicate("task", {Term::text("TASK-TEXT")}));
        Substitution sub = ctx.wait(
            Predicate("responded", {Term::text("helper"), Term::var("R", TermType::Text)}),
            3000ms);
        *got = sub.at("R").text_value();
    };
    system.register_behavior(requester);
    system.spawn({"requester", {}, {}}, "main");
    system.wait_startup("main");
    system.shutdown();

    CHECK(*got == "ASSISTANT-REPLY");
    REQUIRE(recorder->size() == 1);
    CHECK(recorder->at(0).prompt == "DESC.SYSTEM.TASK-TEXT");

    // agree lands in the requester's mailbox before inform
    std::uint64_t agree_seq = 0, inform_seq = 0;
    for (const TranscriptEvent& e : transcript.events()) {
        if (e.agent == "helper" && e.type == "send") {
            if (e.fields.at("performative") == "agree") agree_seq = e.seq;
            if (e.fields.at("performative") == "inform") inform_seq = e.seq;
        }
    }
    CHECK(agree_seq < inform_seq);
}

TEST_CASE("round robin accumulates context and honors TERMINATE") {
    std::vector<RoleSpec> roles{{"alpha", "alpha desc", "alpha system"},
                                {"beta", "beta desc", "beta system"},
                                {"gamma", "gamma desc", "gamma system"}};
    MockScript script;
    script.rules.push_back({MockRule::Match::Substring, "alpha desc", {"A-RESULT"}});
    script.rules.push_back({MockRule::Match::Substring, "beta desc", {"B-RESULT"}});
    script.rules.push_back({MockRule::Match::Substring, "gamma desc", {"C-RESULT"}});
    auto provider = std::make_shared<MockProvider>(script);
    auto recorder = std::make_shared<Recorder>();
    provider->set_recorder(recorder);

    AgentSystem system(fast_config());
    system.register_behavior(make_assistant_behavior("assistant", provider));
    auto result = std::make_shared<RoundRobinResult>();
    std::ostringstream sections;
    Behavior orchestrator;
    orchestrator.id = "round_robin";
    add_round_robin_handlers(orchestrator);
    orchestrator.on_start = [&, result](AgentContext& ctx,
                                        const std::vector<std::string>&) {
        spawn_assistants(ctx, "assistant", roles);
        RoundRobinOptions options;
        options.section_out = &sections;
        options.step_timeout = std::chrono::milliseconds(3000);
        *result = run_round_robin(ctx, roles, "THE-TASK", options);
    };
    system.register_behavior(orchestrator);
    system.spawn({"round_robin", {}, {}}, "main");
    system.wait_startup("main");
    system.shutdown();

    REQUIRE(result->steps.size() == 3);
    CHECK(result->steps[0].result == "A-RESULT");
    CHECK_FALSE(result->terminated);

    // step k's outgoing task contains the original task and all prior results
    REQUIRE(recorder->size() == 3);
    std::string third = recorder->at(2).prompt;
    CHECK(third.find("THE-TASK") != std::string::npos);
    CHECK(third.find("A-RESULT") != std::string::npos);
    CHECK(third.find("B-RESULT") != std::string::npos);

    std::string printed = sections.str();
    CHECK(printed.find("-----alpha-----") != std::string::npos);
    CHECK(printed.find("-----gamma-----") != std::string::npos);
}

TEST_CASE("round robin ends early on TERMINATE") {
    std::vector<RoleSpec> roles{{"one", "one desc", "s"}, {"two", "two desc", "s"}};
    MockScript script;
    script.rules.push_back(
        {MockRule::Match::Substring, "one desc", {"done TERMINATE"}});
    script.rules.push_back({MockRule::Match::Default, "", {"should never be asked"}});
    auto provider = std::make_shared<MockProvider>(script);

    AgentSystem system(fast_config());
    system.register_behavior(make_assistant_behavior("assistant", provider));
    auto result = std::make_shared<RoundRobinResult>();
    Behavior orchestrator;
    orchestrator.id = "round_robin";
    add_round_robin_handlers(orchestrator);
    orchestrator.on_start = [roles, result](AgentContext& ctx,
                                            const std::vector<std::string>&) {
        spawn_assistants(ctx, "assistant", roles);
        *result = run_round_robin(ctx, roles, "task");
    };
    system.register_behavior(orchestrator);
    system.spawn({"round_robin", {}, {}}, "main");
    system.wait_startup("main");
    system.shutdown();

    CHECK(result->terminated);
    CHECK(result->steps.size() == 1);
}

TEST_CASE("assistant reports provider failures as the result") {
    MockScript script;
    script.rules.push_back({MockRule::Match::Exact, "never matches", {"x"}});
    auto provider = std::make_shared<MockProvider>(script);  // every chat throws

    Transcript transcript;
    AgentSystem system(fast_config(), &transcript);
    system.register_behavior(make_assistant_behavior("assistant", provider));
    auto got = std::make_shared<std::string>();
    Behavior requester;
    requester.id = "requester";
    add_round_robin_handlers(requester);
    requester.on_start = [got](AgentContext& ctx, const std::vector<std::string>&) {
        AgentSpec spec;
        spec.behavior_id = "assistant";
        spec.args = {"d", "s"};
        ctx.spawn(spec, "helper");
        ctx.send(performative::request, "helper", Predicate("task", {Term::text("t")}));
        Substitution sub = ctx.wait(
            Predicate("responded", {Term::text("helper"), Term::var("R", TermType::Text)}),
            3000ms);
        *got = sub.at("R").text_value();
    };
    system.register_behavior(requester);
    system.spawn({"requester", {}, {}}, "main");
    system.wait_startup("main");
    system.shutdown();

    CHECK(got->find("provider error") == 0);
    CHECK(transcript.count("provider_error") == 1);
}

}  // TEST_SUITE
