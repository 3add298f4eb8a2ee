#include "agentkit/tictactoe.hpp"

#include "agentkit/ttt_match.hpp"
#include "support/oracles.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <random>

using namespace agentkit;
using namespace agentkit::ttt;
using nlohmann::json;

namespace {

MockScript script_of(std::vector<MockRule> rules) {
    MockScript s;
    s.rules = std::move(rules);
    return s;
}

Grid grid_from(const char* rows[3]) {
    Grid grid;
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            char ch = rows[r][c];
            grid[r][c] = ch == 'X' ? Cell::X : (ch == 'O' ? Cell::O : Cell::Empty);
        }
    }
    return grid;
}

SystemConfig fast_config() {
    SystemConfig cfg;
    cfg.default_wait_timeout = std::chrono::milliseconds(5000);
    return cfg;
}

}  // namespace

TEST_SUITE("tictactoe") {

TEST_CASE("board json is canonical and round-trips") {
    Board board;
    CHECK(board.to_json() == R"({"cells":[["","",""],["","",""],["","",""]]})");
    board.apply(Token::X, 0, 0);
    json j = json::parse(board.to_json());
    CHECK(j["cells"][0][0] == "X");
    Board parsed = Board::from_json(board.to_json());
    CHECK(parsed.grid() == board.grid());
}

TEST_CASE("apply enforces the rules") {
    Board board;
    board.apply(Token::X, 0, 0);
    board.apply(Token::O, 1, 1);
    CHECK(board.history().size() == 2);

    CHECK_THROWS_AS(board.apply(Token::X, 0, 0), CellOccupied);
    CHECK_THROWS_AS(board.apply(Token::O, 2, 2), OutOfTurn);
    CHECK_THROWS_AS(board.apply(Token::X, 3, 0), OutOfRange);

    board.apply(Token::X, 0, 1);
    board.apply(Token::O, 1, 0);
    board.apply(Token::X, 0, 2);  // row 0 complete
    CHECK(board.status() == GameStatus{GameStatus::Kind::Win, Token::X});
    CHECK_THROWS_AS(board.apply(Token::O, 2, 2), GameOver);
}

TEST_CASE("status examples") {
    const char* draw_rows[3] = {"XOX", "XOO", "OXX"};
    CHECK(status_of(grid_from(draw_rows)) == GameStatus{GameStatus::Kind::Draw, {}});

    const char* diag_rows[3] = {"X..", ".X.", "..X"};
    CHECK(status_of(grid_from(diag_rows)) == GameStatus{GameStatus::Kind::Win, Token::X});

    CHECK(status_of(Board().grid()) == GameStatus{GameStatus::Kind::InProgress, {}});
}

TEST_CASE("status matches the line-enumeration oracle on random grids") {
    std::mt19937 rng(5);
    for (int i = 0; i < 2000; ++i) {
        Grid grid = oracle::nth_grid(std::uniform_int_distribution<int>(0, 19682)(rng));
        CHECK(status_of(grid) == oracle::status(grid));
    }
}

TEST_CASE("linear player scans row-major") {
    Board board;
    CHECK(linear_decide(board) == MoveDecision{0, 0});
    board.apply(Token::X, 0, 0);
    board.apply(Token::O, 0, 1);
    CHECK(linear_decide(board) == MoveDecision{0, 2});

    const char* rows[3] = {"XOX", "OXO", "XO."};
    Board nearly = Board::from_cells(grid_from(rows));
    CHECK(linear_decide(nearly) == MoveDecision{2, 2});

    const char* full[3] = {"XOX", "OXO", "XOX"};
    CHECK_THROWS_AS(linear_decide(Board::from_cells(grid_from(full))), BoardFull);
}

TEST_CASE("random player picks a legal cell and is seed-deterministic") {
    Board board;
    board.apply(Token::X, 1, 1);
    std::mt19937 a(42), b(42);
    for (int i = 0; i < 20; ++i) {
        MoveDecision d1 = random_decide(board, a);
        MoveDecision d2 = random_decide(board, b);
        CHECK(d1 == d2);
        CHECK(board.cell_empty(d1.row, d1.col));
    }
}

TEST_CASE("llm player extracts the proposed move") {
    MockProvider provider(script_of({{MockRule::Match::Default, "", {"**Play X at 1, 1**"}}}));
    CHECK(llm_decide(provider, Board(), Token::X) == MoveDecision{1, 1});

    MockProvider prose(script_of(
        {{MockRule::Match::Default, "", {"I suggest **Play O at 2, 0** because..."}}}));
    Board board;
    board.apply(Token::X, 0, 0);
    CHECK(llm_decide(prose, board, Token::O) == MoveDecision{2, 0});
}

TEST_CASE("llm player failure modes") {
    Board board;
    board.apply(Token::X, 1, 1);

    MockProvider no_idea(script_of({{MockRule::Match::Default, "", {"no idea"}}}));
    CHECK_THROWS_AS(llm_decide(no_idea, board, Token::O), NoMatch);

    MockProvider letters(script_of({{MockRule::Match::Default, "", {"**Play O at a, b**"}}}));
    CHECK_THROWS_AS(llm_decide(letters, board, Token::O), NonInteger);

    MockProvider occupied(
        script_of({{MockRule::Match::Default, "", {"**Play O at 1, 1**"}}}));
    CHECK_THROWS_AS(llm_decide(occupied, board, Token::O), IllegalMoveProposed);

    MockProvider outside(script_of({{MockRule::Match::Default, "", {"**Play O at 7, 0**"}}}));
    CHECK_THROWS_AS(llm_decide(outside, board, Token::O), IllegalMoveProposed);
}

TEST_CASE("llm player prompt carries the board json and the player token") {
    auto recorder = std::make_shared<Recorder>();
    MockProvider provider(script_of({{MockRule::Match::Default, "", {"**Play O at 2, 2**"}}}));
    provider.set_recorder(recorder);
    Board board;
    board.apply(Token::X, 0, 0);
    llm_decide(provider, board, Token::O);
    std::string prompt = recorder->at(0).prompt;
    CHECK(prompt.find(board.to_json()) != std::string::npos);
    CHECK(prompt.find("player 'O'") != std::string::npos);
    CHECK(prompt.find("**Play O at <X>, <Y>**") != std::string::npos);
}

TEST_CASE("defensive player takes the defensive branch on YES") {
    auto recorder = std::make_shared<Recorder>();
    MockProvider provider(script_of({
        {MockRule::Match::Substring, "Can I lose the game?", {"**Result YES**"}},
        {MockRule::Match::Substring, "to not loose the game?", {"**Play O at 2, 2**"}},
    }));
    provider.set_recorder(recorder);
    Board board;
    board.apply(Token::X, 0, 0);
    CHECK(defensive_decide(provider, board, Token::O) == MoveDecision{2, 2});
    REQUIRE(recorder->size() == 2);
    CHECK(recorder->at(1).prompt.find("to not loose the game?") != std::string::npos);
}

TEST_CASE("defensive player uses the neutral prompt on NO") {
    auto recorder = std::make_shared<Recorder>();
    MockProvider provider(script_of({
        {MockRule::Match::Substring, "Can I lose the game?", {"**Result no**"}},
        {MockRule::Match::Substring, "select? Answer", {"**Play O at 0, 1**"}},
    }));
    provider.set_recorder(recorder);
    Board board;
    board.apply(Token::X, 0, 0);
    CHECK(defensive_decide(provider, board, Token::O) == MoveDecision{0, 1});
    CHECK(recorder->at(1).prompt.find("to not loose") == std::string::npos);
}

TEST_CASE("defensive player rejects answers outside YES/NO") {
    MockProvider provider(script_of({
        {MockRule::Match::Substring, "Can I lose the game?", {"**Result maybe**"}},
    }));
    Board board;
    board.apply(Token::X, 0, 0);
    CHECK_THROWS_AS(defensive_decide(provider, board, Token::O), UnexpectedAnswer);
}

TEST_CASE("reflective player re-proposes after a rejection") {
    MockProvider provider(script_of({
        {MockRule::Match::Substring, "a good move?", {"**Result NO**", "**Result YES**"}},
        {MockRule::Match::Substring, "best move",
         {"**Play X at 0, 0**", "**Play X at 1, 1**"}},
    }));
    ReflectiveOutcome outcome = reflective_decide(provider, Board(), Token::X, 3);
    CHECK(outcome.decision == MoveDecision{1, 1});
    CHECK(outcome.rounds == 2);
    CHECK_FALSE(outcome.exhausted);
}

TEST_CASE("reflective player accepts the first approved proposal") {
    MockProvider provider(script_of({
        {MockRule::Match::Substring, "a good move?", {"**Result YES**"}},
        {MockRule::Match::Substring, "best move", {"**Play X at 2, 0**"}},
    }));
    ReflectiveOutcome outcome = reflective_decide(provider, Board(), Token::X, 3);
    CHECK(outcome.decision == MoveDecision{2, 0});
    CHECK(outcome.rounds == 1);
}

TEST_CASE("reflective player returns the last proposal on exhaustion") {
    auto recorder = std::make_shared<Recorder>();
    MockProvider provider(script_of({
        {MockRule::Match::Substring, "a good move?", {"**Result NO**"}},
        {MockRule::Match::Substring, "best move",
         {"**Play X at 0, 0**", "**Play X at 0, 1**", "**Play X at 0, 2**"}},
    }));
    provider.set_recorder(recorder);
    ReflectiveOutcome outcome = reflective_decide(provider, Board(), Token::X, 3);
    CHECK(outcome.exhausted);
    CHECK(outcome.rounds == 3);
    CHECK(outcome.decision == MoveDecision{0, 2});
    // the re-proposals carried the rejected-move list
    bool saw_rejection_list = false;
    for (const ChatExchange& ex : recorder->exchanges()) {
        if (ex.prompt.find("(0, 0)") != std::string::npos &&
            ex.prompt.find("rejected") != std::string::npos) {
            saw_rejection_list = true;
        }
    }
    CHECK(saw_rejection_list);
}

TEST_CASE("decide operations leave the board untouched") {
    MockProvider provider(script_of({{MockRule::Match::Default, "", {"**Play O at 2, 2**"}}}));
    Board board;
    board.apply(Token::X, 0, 0);
    Grid before = board.grid();
    auto history_before = board.history().size();
    linear_decide(board);
    llm_decide(provider, board, Token::O);
    CHECK(board.grid() == before);
    CHECK(board.history().size() == history_before);
}

TEST_CASE("match: linear vs linear ends with X winning the anti-diagonal") {
    AgentSystem system(fast_config());
    MatchResult result = play_match(system, {"linear"}, {"linear"});
    system.shutdown();

    CHECK(result.winner == Token::X);
    CHECK(result.moves.size() == 7);
    CHECK(result.stats_x.illegal_proposals == 0);
    CHECK(result.stats_o.illegal_proposals == 0);

    // independently replay the recorded history
    Board replay;
    for (const Move& m : result.moves) replay.apply(m.token, m.row, m.col);
    CHECK(replay.status() == GameStatus{GameStatus::Kind::Win, Token::X});
}

TEST_CASE("match: scripted llm plays a legal game against linear") {
    auto provider = std::make_shared<MockProvider>(script_of({
        {MockRule::Match::Substring, "player 'O'",
         {"**Play O at 1, 1**", "**Play O at 2, 2**", "**Play O at 2, 0**",
          "**Play O at 1, 0**"}},
    }));
    AgentSystem system(fast_config());
    PlayerSetup x{"linear", nullptr, 3, 0};
    PlayerSetup o{"llm-basic", provider, 3, 0};
    MatchResult result = play_match(system, x, o);
    system.shutdown();

    CHECK(result.error.empty());
    CHECK(result.moves.size() <= 9);
    Board replay;
    for (const Move& m : result.moves) replay.apply(m.token, m.row, m.col);
    CHECK(replay.status().over());
}

TEST_CASE("match: repeat proposals are counted and never applied") {
    auto provider = std::make_shared<MockProvider>(script_of({
        {MockRule::Match::Default, "", {"**Play O at 0, 0**"}},
    }));
    Transcript transcript;
    AgentSystem system(fast_config(), &transcript);
    PlayerSetup x{"linear", nullptr, 3, 0};
    PlayerSetup o{"llm-basic", provider, 3, 0};
    MatchRules rules;
    rules.max_retries = 3;
    MatchResult result = play_match(system, x, o, rules);
    system.shutdown();

    CHECK(result.error.empty());
    CHECK(result.stats_o.illegal_proposals > 0);
    CHECK(result.stats_o.linear_fallbacks > 0);
    CHECK(transcript.count("illegal_proposal") > 0);

    Board replay;  // throws if any illegal proposal leaked into the history
    for (const Move& m : result.moves) replay.apply(m.token, m.row, m.col);
    CHECK(replay.status().over());
}

TEST_CASE("match: forfeit policy gives the opponent the win") {
    auto provider = std::make_shared<MockProvider>(script_of({
        {MockRule::Match::Default, "", {"**Play O at 0, 0**"}},
    }));
    AgentSystem system(fast_config());
    PlayerSetup x{"linear", nullptr, 3, 0};
    PlayerSetup o{"llm-basic", provider, 3, 0};
    MatchRules rules;
    rules.policy = IllegalPolicy::Retry;
    rules.max_retries = 2;
    MatchResult result = play_match(system, x, o, rules);
    system.shutdown();

    CHECK(result.forfeit);
    CHECK(result.forfeited_by == Token::O);
    CHECK(result.winner == Token::X);
    CHECK(result.stats_o.illegal_proposals == 3);  // initial attempt + 2 retries
}

TEST_CASE("match report json carries stats and exchange references") {
    auto recorder = std::make_shared<Recorder>();
    auto provider = std::make_shared<MockProvider>(script_of({
        {MockRule::Match::Substring, "player 'O'",
         {"**Play O at 1, 1**", "**Play O at 2, 2**", "**Play O at 2, 0**",
          "**Play O at 1, 0**"}},
    }));
    provider->set_recorder(recorder);
    AgentSystem system(fast_config());
    MatchResult result =
        play_match(system, {"linear"}, {"llm-basic", provider, 3, 0});
    system.shutdown();

    json report = result.to_json();
    CHECK(report.contains("winner"));
    CHECK(report["player_o"]["moves"].size() > 0);
    CHECK(report["player_o"]["moves"][0]["exchanges"].size() == 1);
    CHECK(recorder->size() >= report["player_o"]["moves"].size());
}

}  // TEST_SUITE
