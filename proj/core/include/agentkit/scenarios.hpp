#pragma once

#include "agentkit/blocks.hpp"
#include "agentkit/orchestration.hpp"
#include "agentkit/provider.hpp"
#include "agentkit/runtime.hpp"
#include "agentkit/ttt_match.hpp"

#include <nlohmann/json.hpp>

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace agentkit::scenarios {

inline constexpr int kExitOk = 0;
inline constexpr int kExitScenarioFailure = 1;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitProviderError = 3;

/// Environment variable that overrides the key file path.
inline constexpr const char* kKeyFileEnvVar = "AGENTKIT_KEY_FILE";

struct RunConfig {
    std::string scenario;  // travel | ttt | tower
    ProviderConfig provider;
    std::string key_file = "../api.key";
    std::string record_path;  // write the session recording here
    std::string replay_path;  // serve replies from this recording
    std::string out_dir;      // when set, transcript/result files are written
    bool strict = false;
    std::uint64_t seed = 0;
    std::chrono::milliseconds wait_timeout{120000};

    // travel
    std::string roles_file;
    std::string task = "Plan a 3 day trip to Nepal.";

    // ttt
    std::string players = "linear,linear";
    int matches = 1;
    int max_retries = 3;

    // tower
    std::string state_file;
    blocks::TowerGoal goal{"a", "b", "c"};

    /// Canonical config echo: everything that determines the run, secrets
    /// excluded. Embedded in the transcript meta together with its hash.
    nlohmann::json echo() const;
};

/// FNV-1a 64 over the dumped echo, as hex.
std::string config_hash(const nlohmann::json& echo);

struct RunOutcome {
    std::shared_ptr<Transcript> transcript;
    std::shared_ptr<Recorder> recorder;
    nlohmann::json result;
    int exit_code = kExitOk;
    std::string error;  // set when the run failed outright
};

/// The four Travel Planner roles with their stock descriptions and system
/// messages, in round-robin order.
std::vector<RoleSpec> default_travel_roles();
std::vector<RoleSpec> load_roles_file(const std::filesystem::path& path);

/// Three blocks a, b, c on the table.
blocks::BlocksState default_tower_state();
blocks::BlocksState load_state_file(const std::filesystem::path& path);

RunOutcome run_travel(const RunConfig& config, std::ostream& out);
RunOutcome run_ttt(const RunConfig& config, std::ostream& out);
RunOutcome run_tower(const RunConfig& config, std::ostream& out);

/// Dispatches on config.scenario, maps errors to exit codes, and writes the
/// transcript/recording/result files when configured.
RunOutcome run_scenario(const RunConfig& config, std::ostream& out);

}  // namespace agentkit::scenarios
