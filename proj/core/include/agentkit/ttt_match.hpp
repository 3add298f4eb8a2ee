#pragma once

#include "agentkit/runtime.hpp"
#include "agentkit/tictactoe.hpp"

#include <nlohmann/json.hpp>

#include <memory>
#include <string>
#include <vector>

namespace agentkit::ttt {

/// What to do when a player's decision is an illegal proposal or cannot be
/// parsed: forfeit immediately, retry up to N then forfeit, or retry up to N
/// then fall back to the linear strategy.
enum class IllegalPolicy { Forfeit, Retry, RetryThenLinear };

struct MatchRules {
    IllegalPolicy policy = IllegalPolicy::RetryThenLinear;
    int max_retries = 3;
    std::chrono::milliseconds move_timeout{120000};
};

/// One side of a match. Kinds: linear, random, llm-basic, llm-defensive,
/// llm-reflective.
struct PlayerSetup {
    std::string kind = "linear";
    std::shared_ptr<ChatProvider> provider;  // llm kinds only
    int reflective_rounds = 3;
    std::uint64_t seed = 0;  // random kind only
};

struct MoveRecord {
    Move move;
    std::vector<std::size_t> exchanges;  // recording indices behind this move
};

struct PlayerStats {
    int illegal_proposals = 0;
    int parse_failures = 0;
    int retries = 0;
    int linear_fallbacks = 0;
    std::vector<MoveRecord> moves;
};

struct MatchResult {
    GameStatus status;
    std::optional<Token> winner;
    bool forfeit = false;
    std::optional<Token> forfeited_by;
    std::vector<Move> moves;
    PlayerStats stats_x;
    PlayerStats stats_o;
    std::string error;  // empty on a clean game

    nlohmann::json to_json() const;
};

/// Plays one game: the board lives in a dedicated environment agent, the two
/// player agents alternate by sending each other `request your_move()`, and
/// every move goes to the environment as `request move(token, row, col)`.
/// Illegal proposals are rejected before ever reaching the board and handled
/// per the rules' policy. Throws WaitTimeout if a player never moves.
MatchResult play_match(AgentSystem& system, const PlayerSetup& player_x,
                       const PlayerSetup& player_o, const MatchRules& rules = {},
                       const std::string& agent_prefix = "");

}  // namespace agentkit::ttt
