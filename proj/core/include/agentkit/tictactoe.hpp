#pragma once

#include "agentkit/errors.hpp"
#include "agentkit/provider.hpp"

#include <array>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace agentkit::ttt {

struct CellOccupied : Error {
    using Error::Error;
};
struct OutOfTurn : Error {
    using Error::Error;
};
struct GameOver : Error {
    using Error::Error;
};
struct OutOfRange : Error {
    using Error::Error;
};
struct BoardFull : Error {
    using Error::Error;
};
struct NonInteger : Error {
    using Error::Error;
};
struct UnexpectedAnswer : Error {
    using Error::Error;
};

/// An LLM proposed a move onto an occupied or out-of-range cell; carried
/// distinctly so the match harness can count these.
struct IllegalMoveProposed : Error {
    IllegalMoveProposed(const std::string& what, int row, int col)
        : Error(what), row(row), col(col) {}
    int row;
    int col;
};

enum class Token { X, O };
Token other(Token t);
std::string to_string(Token t);
std::optional<Token> token_from_string(const std::string& s);

enum class Cell { Empty, X, O };
std::string to_string(Cell c);
Cell cell_of(Token t);

using Grid = std::array<std::array<Cell, 3>, 3>;

struct GameStatus {
    enum class Kind { InProgress, Win, Draw };
    Kind kind = Kind::InProgress;
    std::optional<Token> winner;

    bool in_progress() const { return kind == Kind::InProgress; }
    bool over() const { return kind != Kind::InProgress; }

    friend bool operator==(const GameStatus& a, const GameStatus& b) {
        return a.kind == b.kind && a.winner == b.winner;
    }
};

std::string to_string(const GameStatus& s);

/// Status of an arbitrary grid: win for the first completed line in canonical
/// order (rows, columns, main diagonal, anti diagonal), otherwise draw when
/// full, otherwise in progress.
GameStatus status_of(const Grid& grid);

struct Move {
    Token token;
    int row;
    int col;

    friend bool operator==(const Move& a, const Move& b) {
        return a.token == b.token && a.row == b.row && a.col == b.col;
    }
};

/// 3x3 board with alternation enforcement (X moves first) and a move history
/// that replays to the grid exactly.
class Board {
public:
    Board();

    /// Board from a raw grid snapshot (history starts empty). Token counts
    /// must be reachable (|#X - #O| <= 1).
    static Board from_cells(const Grid& grid);

    /// CellOccupied, OutOfTurn, GameOver, OutOfRange.
    void apply(Token token, int row, int col);

    const Grid& grid() const { return grid_; }
    const std::vector<Move>& history() const { return history_; }
    GameStatus status() const { return status_of(grid_); }
    Token next_player() const;

    bool in_range(int row, int col) const { return row >= 0 && row < 3 && col >= 0 && col < 3; }
    bool cell_empty(int row, int col) const;
    int empty_count() const;

    /// Canonical JSON: {"cells":[["X","",""],...]} row-major.
    std::string to_json() const;
    static Board from_json(const std::string& text);  // grid only

private:
    Grid grid_;
    std::vector<Move> history_;
};

struct MoveDecision {
    int row;
    int col;

    friend bool operator==(const MoveDecision& a, const MoveDecision& b) {
        return a.row == b.row && a.col == b.col;
    }
};

/// First empty cell in row-major order. BoardFull when none.
MoveDecision linear_decide(const Board& board);

/// Uniformly random empty cell. BoardFull when none.
MoveDecision random_decide(const Board& board, std::mt19937& rng);

/// One-shot LLM move: best-move prompt, reply parsed through the
/// "**Play ${player} at ${x}, ${y}**" response template with the player
/// pre-bound. NoMatch, NonInteger, IllegalMoveProposed.
MoveDecision llm_decide(ChatProvider& provider, const Board& board, Token token);

/// Two-step LLM move: asks whether the position is losable (YES/NO), then
/// uses the defensive or neutral move prompt. Adds UnexpectedAnswer.
MoveDecision defensive_decide(ChatProvider& provider, const Board& board, Token token);

struct ReflectiveOutcome {
    MoveDecision decision;
    int rounds = 0;        // proposals made
    bool exhausted = false;  // every proposal was rejected; last one returned
};

/// Propose/evaluate loop: each proposal is judged by a second prompt; rejected
/// proposals are re-tried with a growing do-not-pick list, up to max_rounds.
ReflectiveOutcome reflective_decide(ChatProvider& provider, const Board& board, Token token,
                                    int max_rounds);

}  // namespace agentkit::ttt
