// Scenario runner: wires a provider (mock, replay, or hosted) into one of the
// built-in multi-agent scenarios and reports the outcome.

#include "agentkit/scenarios.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <string>

int main(int argc, char** argv) {
    using namespace agentkit;
    using namespace agentkit::scenarios;

    CLI::App app{"agentkit scenario runner"};
    RunConfig config;

    std::string provider_kind = "mock";
    double temperature = -1.0;
    int top_k = 0;
    std::string goal_csv;

    app.add_option("--scenario", config.scenario, "Scenario: travel | ttt | tower")
        ->required();
    app.add_option("--provider", provider_kind, "Provider kind: mock | openai | gemini")
        ->capture_default_str();
    app.add_option("--model", config.provider.model,
                   "Model id for hosted providers (e.g. gpt-4o, gemini-1.5-flash)");
    app.add_option("--temperature", temperature, "Sampling temperature [0,2]");
    app.add_option("--top-k", top_k, "topK sampling parameter");
    app.add_option("--key-file", config.key_file,
                   "API key file (AGENTKIT_KEY_FILE overrides)")
        ->capture_default_str();
    app.add_option("--mock-script", config.provider.script_path,
                   "Mock provider script (JSON rules)");
    app.add_option("--record", config.record_path, "Write the chat recording here (JSONL)");
    app.add_option("--replay", config.replay_path, "Replay replies from this recording");
    app.add_option("--out", config.out_dir, "Directory for transcript/result files");
    app.add_flag("--strict", config.strict, "Exit 1 when the scenario goal is not met");
    app.add_option("--seed", config.seed, "Seed for randomized players");
    app.add_option("--timeout-ms", config.wait_timeout,
                   "Per-wait timeout in milliseconds")
        ->transform(CLI::AsNumberWithUnit(std::map<std::string, int>{{"ms", 1}}));

    app.add_option("--roles", config.roles_file, "Travel: roles JSON file");
    app.add_option("--task", config.task, "Travel: the task text");

    app.add_option("--players", config.players,
                   "TTT: '<kindX>,<kindO>' from linear|random|llm-basic|llm-defensive|"
                   "llm-reflective")
        ->capture_default_str();
    app.add_option("--matches", config.matches, "TTT: number of matches")
        ->capture_default_str();
    app.add_option("--max-retries", config.max_retries,
                   "TTT: retries before the illegal-move policy kicks in")
        ->capture_default_str();

    app.add_option("--state", config.state_file, "Tower: initial state JSON file");
    app.add_option("--goal", goal_csv, "Tower: goal tower, bottom first (e.g. a,b,c)");

    CLI11_PARSE(app, argc, argv);

    try {
        config.provider.kind = provider_kind_from_string(provider_kind);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfigError;
    }
    if (temperature >= 0.0) config.provider.temperature = temperature;
    if (top_k > 0) config.provider.top_k = top_k;
    if (!goal_csv.empty()) {
        config.goal.clear();
        std::string token;
        for (char c : goal_csv) {
            if (c == ',') {
                if (!token.empty()) config.goal.push_back(token);
                token.clear();
            } else if (!std::isspace(static_cast<unsigned char>(c))) {
                token.push_back(c);
            }
        }
        if (!token.empty()) config.goal.push_back(token);
    }

    RunOutcome outcome = run_scenario(config, std::cout);
    return outcome.exit_code;
}
