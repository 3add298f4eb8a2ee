#include "agentkit/scenarios.hpp"

#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

namespace agentkit::scenarios {

using nlohmann::json;

json RunConfig::echo() const {
    json provider_echo{{"kind", to_string(provider.kind)},
                       {"model", provider.model},
                       {"script", provider.script_path},
                       {"extra", provider.extra}};
    if (provider.temperature) provider_echo["temperature"] = *provider.temperature;
    if (provider.top_k) provider_echo["topK"] = *provider.top_k;
    if (!provider.api_base.empty()) provider_echo["api_base"] = provider.api_base;

    json echo{{"scenario", scenario},
              {"provider", provider_echo},
              {"record", record_path},
              {"replay", replay_path},
              {"out", out_dir},
              {"strict", strict},
              {"seed", seed}};
    if (scenario == "travel") {
        echo["roles_file"] = roles_file;
        echo["task"] = task;
    } else if (scenario == "ttt") {
        echo["players"] = players;
        echo["matches"] = matches;
        echo["max_retries"] = max_retries;
    } else if (scenario == "tower") {
        echo["state_file"] = state_file;
        echo["goal"] = goal;
    }
    return echo;
}

std::string config_hash(const json& echo) {
    std::string dumped = echo.dump();
    std::uint64_t hash = 1469598103934665603ULL;
    for (unsigned char c : dumped) {
        hash ^= c;
        hash *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

std::vector<RoleSpec> default_travel_roles() {
    return {
        {"planner", "A helpful assistant that can plan trips.",
         "You are a helpful assistant that can suggest a travel plan for a user based on "
         "their request."},
        {"local",
         "A local assistant that can suggest local activities or places to visit.",
         "You are a helpful assistant that can suggest authentic and interesting local "
         "activities or places to visit for a user and can utilize any context "
         "information provided."},
        {"language",
         "A helpful assistant that can provide language tips for a given destination.",
         "You are a helpful assistant that can review travel plans, providing feedback "
         "on important/critical tips about how best to address language or communication "
         "challenges for the given destination. If the plan already includes language "
         "tips, you can mention that the plan is satisfactory, with rationale."},
        {"summary", "A helpful assistant that can summarize the travel plan.",
         "You are a helpful assistant that can take in all of the suggestions and advice "
         "from the other agents and provide a detailed final travel plan. You must "
         "ensure that the final plan is integrated and complete. YOUR FINAL RESPONSE "
         "MUST BE THE COMPLETE PLAN. When the plan is complete and all perspectives are "
         "integrated, you can respond with TERMINATE."},
    };
}

std::vector<RoleSpec> load_roles_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw InvalidConfig("roles file not found: " + path.string());
    }
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_array() || j.empty()) {
        throw InvalidConfig("roles file must be a nonempty JSON array");
    }
    std::vector<RoleSpec> roles;
    for (const json& role : j) {
        if (!role.contains("name") || !role.contains("description") ||
            !role.contains("system_message")) {
            throw InvalidConfig("each role needs name/description/system_message");
        }
        roles.push_back({role["name"].get<std::string>(),
                         role["description"].get<std::string>(),
                         role["system_message"].get<std::string>()});
    }
    return roles;
}

blocks::BlocksState default_tower_state() {
    return blocks::BlocksState::create(
        {{"a", blocks::kTable}, {"b", blocks::kTable}, {"c", blocks::kTable}});
}

blocks::BlocksState load_state_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw InvalidConfig("state file not found: " + path.string());
    }
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw InvalidConfig("state file must be a JSON object");
    }
    std::map<std::string, std::string> on;
    json on_json = j.value("on", json::object());
    for (const auto& [block, support] : on_json.items()) {
        on[block] = support.get<std::string>();
    }
    std::optional<std::string> holding;
    if (j.contains("holding") && j["holding"].is_string()) {
        holding = j["holding"].get<std::string>();
    }
    std::set<std::string> extra;
    for (const json& block : j.value("blocks", json::array())) {
        extra.insert(block.get<std::string>());
    }
    try {
        return blocks::BlocksState::create(on, holding, extra);
    } catch (const blocks::InvalidState& e) {
        throw InvalidConfig(std::string("invalid initial state: ") + e.what());
    }
}

namespace {

std::shared_ptr<ChatProvider> resolve_provider(const RunConfig& config,
                                               std::shared_ptr<Recorder> recorder) {
    std::shared_ptr<ChatProvider> provider;
    if (!config.replay_path.empty()) {
        if (!std::filesystem::exists(config.replay_path)) {
            throw InvalidConfig("replay recording not found: " + config.replay_path);
        }
        provider = std::make_shared<ReplayProvider>(
            Recorder::read_file(config.replay_path));
    } else if (config.provider.kind == ProviderKind::Mock) {
        if (config.provider.script_path.empty()) {
            throw ScriptMissing("mock provider needs --mock-script");
        }
        provider = std::make_shared<MockProvider>(
            MockScript::load(config.provider.script_path),
            config.provider.model.empty() ? "mock" : config.provider.model);
    } else {
        ProviderConfig live = config.provider;
        std::string key_file = config.key_file;
        if (const char* env = std::getenv(kKeyFileEnvVar); env && *env) {
            key_file = env;
        }
        if (live.api_key.empty()) {
            live.api_key = load_api_key_from_file(key_file);
        }
        provider = make_provider(live);
    }
    provider->set_recorder(std::move(recorder));
    return provider;
}

std::shared_ptr<Transcript> make_transcript(const RunConfig& config) {
    auto transcript = std::make_shared<Transcript>();
    json echo = config.echo();
    transcript->set_meta(json{{"config", echo}, {"config_hash", config_hash(echo)}});
    return transcript;
}

SystemConfig system_config(const RunConfig& config) {
    SystemConfig out;
    out.default_wait_timeout = config.wait_timeout;
    return out;
}

}  // namespace

RunOutcome run_travel(const RunConfig& config, std::ostream& out) {
    RunOutcome outcome;
    outcome.transcript = make_transcript(config);
    outcome.recorder = std::make_shared<Recorder>();
    auto provider = resolve_provider(config, outcome.recorder);

    std::vector<RoleSpec> roles = config.roles_file.empty()
                                      ? default_travel_roles()
                                      : load_roles_file(config.roles_file);

    AgentSystem system(system_config(config), outcome.transcript.get());
    system.register_behavior(make_assistant_behavior("assistant", provider));

    auto result = std::make_shared<RoundRobinResult>();
    Behavior orchestrator;
    orchestrator.id = "round_robin";
    orchestrator.on_start = [roles, result, &out,
                             task = config.task](AgentContext& ctx,
                                                 const std::vector<std::string>&) {
        spawn_assistants(ctx, "assistant", roles);
        RoundRobinOptions options;
        options.section_out = &out;
        *result = run_round_robin(ctx, roles, task, options);
    };
    add_round_robin_handlers(orchestrator);
    system.register_behavior(std::move(orchestrator));

    AgentSpec main_spec;
    main_spec.behavior_id = "round_robin";
    for (const RoleSpec& role : roles) {
        main_spec.initial_beliefs.push_back(
            Predicate("role", {Term::text(role.name), Term::text(role.description),
                               Term::text(role.system_message)}));
    }
    system.spawn(main_spec, "main");
    system.wait_startup("main");
    system.shutdown();

    json steps = json::array();
    for (const RoundRobinStep& step : result->steps) {
        steps.push_back(json{{"role", step.role}, {"result", step.result}});
    }
    outcome.result = json{{"steps", steps},
                          {"status", result->terminated ? "terminated" : "completed"}};
    if (outcome.transcript->count("provider_error") > 0) {
        outcome.exit_code = kExitProviderError;
        outcome.error = "provider errors during the run";
    }
    return outcome;
}

RunOutcome run_ttt(const RunConfig& config, std::ostream& out) {
    RunOutcome outcome;
    outcome.transcript = make_transcript(config);
    outcome.recorder = std::make_shared<Recorder>();

    auto comma = config.players.find(',');
    if (comma == std::string::npos) {
        throw InvalidConfig("--players must be '<kindX>,<kindO>'");
    }
    std::string kind_x = config.players.substr(0, comma);
    std::string kind_o = config.players.substr(comma + 1);
    auto needs_provider = [](const std::string& kind) {
        return kind.rfind("llm-", 0) == 0;
    };
    std::shared_ptr<ChatProvider> provider;
    if (needs_provider(kind_x) || needs_provider(kind_o) || !config.replay_path.empty()) {
        provider = resolve_provider(config, outcome.recorder);
    }
    if (config.matches < 1) {
        throw InvalidConfig("--matches must be at least 1");
    }

    ttt::MatchRules rules;
    rules.max_retries = config.max_retries;
    rules.move_timeout = config.wait_timeout;

    int x_wins = 0, o_wins = 0, draws = 0;
    json reports = json::array();
    for (int m = 0; m < config.matches; ++m) {
        ttt::PlayerSetup setup_x{kind_x, needs_provider(kind_x) ? provider : nullptr, 3,
                                 config.seed + 2 * static_cast<std::uint64_t>(m)};
        ttt::PlayerSetup setup_o{kind_o, needs_provider(kind_o) ? provider : nullptr, 3,
                                 config.seed + 2 * static_cast<std::uint64_t>(m) + 1};
        AgentSystem system(system_config(config), outcome.transcript.get());
        std::string prefix = "m" + std::to_string(m) + ".";
        ttt::MatchResult match = ttt::play_match(system, setup_x, setup_o, rules, prefix);
        system.shutdown();

        if (match.winner == ttt::Token::X) {
            ++x_wins;
        } else if (match.winner == ttt::Token::O) {
            ++o_wins;
        } else {
            ++draws;
        }
        reports.push_back(match.to_json());
        out << "match " << m << ": " << to_string(match.status) << " in "
            << match.moves.size() << " moves (illegal X/O: "
            << match.stats_x.illegal_proposals << "/" << match.stats_o.illegal_proposals
            << ")\n";
    }
    out << "aggregate: X " << kind_x << " wins " << x_wins << ", O " << kind_o
        << " wins " << o_wins << ", draws " << draws << "\n";

    outcome.result = json{{"matches", reports},
                          {"aggregate", json{{"x_wins", x_wins},
                                             {"o_wins", o_wins},
                                             {"draws", draws},
                                             {"player_x", kind_x},
                                             {"player_o", kind_o}}}};
    return outcome;
}

RunOutcome run_tower(const RunConfig& config, std::ostream& out) {
    RunOutcome outcome;
    outcome.transcript = make_transcript(config);
    outcome.recorder = std::make_shared<Recorder>();
    auto provider = resolve_provider(config, outcome.recorder);

    blocks::BlocksState initial = config.state_file.empty()
                                      ? default_tower_state()
                                      : load_state_file(config.state_file);

    AgentSystem system(system_config(config), outcome.transcript.get());
    blocks::TowerScenarioOptions options;
    options.step_timeout = config.wait_timeout;
    blocks::ScenarioResult result =
        blocks::run_tower_scenario(system, *provider, initial, config.goal, options);
    system.shutdown();

    out << "plan:";
    for (const blocks::BlockAction& action : result.plan) {
        out << " " << action.to_string();
    }
    out << "\n";
    for (const blocks::ActionOutcome& step : result.outcomes) {
        out << "  " << step.action.to_string() << " -> "
            << (step.ok ? "ok" : "failed: " + step.error) << "\n";
    }
    if (!result.error.empty()) {
        out << "error: " << result.error << "\n";
    }
    out << "goal " << blocks::tower_goal_text(config.goal) << " "
        << (result.goal_ok ? "satisfied" : "not satisfied") << "\n";

    outcome.result = result.to_json();
    if (config.strict && !result.goal_ok) {
        outcome.exit_code = kExitScenarioFailure;
        outcome.error = "goal not satisfied";
    }
    return outcome;
}

namespace {

void write_outputs(const RunConfig& config, const RunOutcome& outcome) {
    if (!config.out_dir.empty() && outcome.transcript) {
        std::filesystem::create_directories(config.out_dir);
        std::filesystem::path dir(config.out_dir);
        outcome.transcript->write_file(dir / "transcript.jsonl");
        std::ofstream result_out(dir / "result.json");
        result_out << outcome.result.dump(2) << "\n";
    }
    if (!config.record_path.empty() && outcome.recorder) {
        if (auto parent = std::filesystem::path(config.record_path).parent_path();
            !parent.empty()) {
            std::filesystem::create_directories(parent);
        }
        outcome.recorder->write_file(config.record_path);
    }
}

}  // namespace

namespace {

std::string now_iso8601() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", tm.tm_year + 1900,
                  tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec);
    return buf;
}

}  // namespace

RunOutcome run_scenario(const RunConfig& config, std::ostream& out) {
    std::string started = now_iso8601();
    RunOutcome outcome;
    try {
        if (config.scenario == "travel") {
            outcome = run_travel(config, out);
        } else if (config.scenario == "ttt") {
            outcome = run_ttt(config, out);
        } else if (config.scenario == "tower") {
            outcome = run_tower(config, out);
        } else {
            throw InvalidConfig("unknown scenario '" + config.scenario +
                                "' (expected travel|ttt|tower)");
        }
    } catch (const InvalidConfig& e) {
        outcome.exit_code = kExitConfigError;
        outcome.error = e.what();
    } catch (const ScriptMissing& e) {
        outcome.exit_code = kExitConfigError;
        outcome.error = e.what();
    } catch (const KeyFileMissing& e) {
        outcome.exit_code = kExitConfigError;
        outcome.error = e.what();
    } catch (const KeyFileEmpty& e) {
        outcome.exit_code = kExitConfigError;
        outcome.error = e.what();
    } catch (const ProviderUnavailable& e) {
        outcome.exit_code = kExitProviderError;
        outcome.error = e.what();
    } catch (const NoScriptMatch& e) {
        outcome.exit_code = kExitProviderError;
        outcome.error = e.what();
    } catch (const ReplayExhausted& e) {
        outcome.exit_code = kExitProviderError;
        outcome.error = e.what();
    } catch (const ReplayMismatch& e) {
        outcome.exit_code = kExitProviderError;
        outcome.error = e.what();
    } catch (const Error& e) {
        outcome.exit_code = kExitScenarioFailure;
        outcome.error = e.what();
    }
    if (!outcome.error.empty()) {
        out << "error: " << outcome.error << "\n";
    }
    if (outcome.transcript) {
        json meta = outcome.transcript->meta();
        meta["times"] = json{{"started", started}, {"finished", now_iso8601()}};
        meta["outcome"] = json{{"exit_code", outcome.exit_code},
                               {"error", outcome.error}};
        outcome.transcript->set_meta(std::move(meta));
    }
    write_outputs(config, outcome);
    return outcome;
}

}  // namespace agentkit::scenarios
