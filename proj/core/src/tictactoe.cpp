#include "agentkit/tictactoe.hpp"

#include <nlohmann/json.hpp>

#include <cctype>
#include <charconv>

namespace agentkit::ttt {

using nlohmann::json;

Token other(Token t) {
    return t == Token::X ? Token::O : Token::X;
}

std::string to_string(Token t) {
    return t == Token::X ? "X" : "O";
}

std::optional<Token> token_from_string(const std::string& s) {
    if (s == "X") return Token::X;
    if (s == "O") return Token::O;
    return std::nullopt;
}

std::string to_string(Cell c) {
    switch (c) {
        case Cell::Empty: return "";
        case Cell::X: return "X";
        case Cell::O: return "O";
    }
    return "";
}

Cell cell_of(Token t) {
    return t == Token::X ? Cell::X : Cell::O;
}

std::string to_string(const GameStatus& s) {
    switch (s.kind) {
        case GameStatus::Kind::InProgress: return "in-progress";
        case GameStatus::Kind::Draw: return "draw";
        case GameStatus::Kind::Win: return "win-" + to_string(*s.winner);
    }
    return "in-progress";
}

GameStatus status_of(const Grid& grid) {
    auto line_winner = [&](int r0, int c0, int r1, int c1, int r2,
                           int c2) -> std::optional<Token> {
        Cell a = grid[r0][c0];
        if (a == Cell::Empty) return std::nullopt;
        if (grid[r1][c1] != a || grid[r2][c2] != a) return std::nullopt;
        return a == Cell::X ? Token::X : Token::O;
    };
    // Canonical line order: rows, columns, main diagonal, anti diagonal.
    for (int r = 0; r < 3; ++r) {
        if (auto w = line_winner(r, 0, r, 1, r, 2)) return {GameStatus::Kind::Win, w};
    }
    for (int c = 0; c < 3; ++c) {
        if (auto w = line_winner(0, c, 1, c, 2, c)) return {GameStatus::Kind::Win, w};
    }
    if (auto w = line_winner(0, 0, 1, 1, 2, 2)) return {GameStatus::Kind::Win, w};
    if (auto w = line_winner(0, 2, 1, 1, 2, 0)) return {GameStatus::Kind::Win, w};

    for (const auto& row : grid) {
        for (Cell c : row) {
            if (c == Cell::Empty) return {GameStatus::Kind::InProgress, std::nullopt};
        }
    }
    return {GameStatus::Kind::Draw, std::nullopt};
}

Board::Board() {
    for (auto& row : grid_) row.fill(Cell::Empty);
}

static std::pair<int, int> token_counts(const Grid& grid) {
    int x = 0, o = 0;
    for (const auto& row : grid) {
        for (Cell c : row) {
            if (c == Cell::X) ++x;
            if (c == Cell::O) ++o;
        }
    }
    return {x, o};
}

Board Board::from_cells(const Grid& grid) {
    auto [x, o] = token_counts(grid);
    if (x - o < 0 || x - o > 1) {
        throw Error("unreachable token counts: " + std::to_string(x) + " X vs " +
                    std::to_string(o) + " O");
    }
    Board b;
    b.grid_ = grid;
    return b;
}

Token Board::next_player() const {
    auto [x, o] = token_counts(grid_);
    return x == o ? Token::X : Token::O;
}

bool Board::cell_empty(int row, int col) const {
    return grid_[row][col] == Cell::Empty;
}

int Board::empty_count() const {
    int n = 0;
    for (const auto& row : grid_) {
        for (Cell c : row) {
            if (c == Cell::Empty) ++n;
        }
    }
    return n;
}

void Board::apply(Token token, int row, int col) {
    if (!in_range(row, col)) {
        throw OutOfRange("cell (" + std::to_string(row) + ", " + std::to_string(col) +
                         ") is out of range");
    }
    if (status().over()) {
        throw GameOver("the game is already over");
    }
    if (token != next_player()) {
        throw OutOfTurn("it is not " + to_string(token) + "'s turn");
    }
    if (!cell_empty(row, col)) {
        throw CellOccupied("cell (" + std::to_string(row) + ", " + std::to_string(col) +
                           ") is occupied");
    }
    grid_[row][col] = cell_of(token);
    history_.push_back({token, row, col});
}

std::string Board::to_json() const {
    json cells = json::array();
    for (const auto& row : grid_) {
        json r = json::array();
        for (Cell c : row) r.push_back(to_string(c));
        cells.push_back(std::move(r));
    }
    return json{{"cells", cells}}.dump();
}

Board Board::from_json(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.contains("cells") || !j["cells"].is_array() ||
        j["cells"].size() != 3) {
        throw Error("malformed board JSON");
    }
    Grid grid;
    for (int r = 0; r < 3; ++r) {
        const json& row = j["cells"][r];
        if (!row.is_array() || row.size() != 3) {
            throw Error("malformed board JSON row");
        }
        for (int c = 0; c < 3; ++c) {
            std::string v = row[c].get<std::string>();
            if (v == "X") {
                grid[r][c] = Cell::X;
            } else if (v == "O") {
                grid[r][c] = Cell::O;
            } else if (v.empty()) {
                grid[r][c] = Cell::Empty;
            } else {
                throw Error("board cell must be X, O, or empty");
            }
        }
    }
    return Board::from_cells(grid);
}

MoveDecision linear_decide(const Board& board) {
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            if (board.cell_empty(r, c)) return {r, c};
        }
    }
    throw BoardFull("no empty cell left");
}

MoveDecision random_decide(const Board& board, std::mt19937& rng) {
    std::vector<MoveDecision> open;
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            if (board.cell_empty(r, c)) open.push_back({r, c});
        }
    }
    if (open.empty()) throw BoardFull("no empty cell left");
    std::uniform_int_distribution<std::size_t> dist(0, open.size() - 1);
    return open[dist(rng)];
}

namespace {

constexpr const char* kMovePrompt =
    "if the following json is a representation of a tic-tac-toe board ${board}, "
    "what is the best move player '${player}' can make? "
    "Answer in the form '**Play ${player} at <X>, <Y>**'";

constexpr const char* kLosablePrompt =
    "I am a tic-tac-toe playing agent. if the following json is a representation of a "
    "tic-tac-toe board ${board}, and I am player ${player}. Can I lose the game? "
    "Answer YES or NO only using the template '**Result <answer>**'";

constexpr const char* kDefensiveMovePrompt =
    "I am a tic-tac-toe playing agent. if the following json is a representation of a "
    "tic-tac-toe board ${board}, what location should player '${player}' select to not "
    "loose the game? Answer in the form '**Play ${player} at <X>, <Y>**'";

constexpr const char* kNeutralMovePrompt =
    "I am a tic-tac-toe playing agent. if the following json is a representation of a "
    "tic-tac-toe board ${board}, what location should player '${player}' select? "
    "Answer in the form '**Play ${player} at <X>, <Y>**'";

constexpr const char* kEvaluatePrompt =
    "Is playing ${player} at ${x}, ${y} on board ${board} a good move? "
    "Answer YES or NO only using the template '**Result <answer>**'";

int parse_coordinate(const std::string& raw) {
    std::string trimmed = raw;
    while (!trimmed.empty() && trimmed.front() == ' ') trimmed.erase(trimmed.begin());
    while (!trimmed.empty() && trimmed.back() == ' ') trimmed.pop_back();
    int value = 0;
    auto [ptr, ec] = std::from_chars(trimmed.data(), trimmed.data() + trimmed.size(), value);
    if (ec != std::errc() || ptr != trimmed.data() + trimmed.size()) {
        throw NonInteger("coordinate is not an integer: \"" + raw + "\"");
    }
    return value;
}

MoveDecision validated(const Board& board, int row, int col) {
    if (row < 0 || row > 2 || col < 0 || col > 2) {
        throw IllegalMoveProposed("proposed cell (" + std::to_string(row) + ", " +
                                      std::to_string(col) + ") is out of range",
                                  row, col);
    }
    if (!board.cell_empty(row, col)) {
        throw IllegalMoveProposed("proposed cell (" + std::to_string(row) + ", " +
                                      std::to_string(col) + ") is already played",
                                  row, col);
    }
    return {row, col};
}

MoveDecision extract_move(const std::string& reply, Token token) {
    ResponseTemplate response("**Play ${player} at ${x}, ${y}**");
    response.add_binding("player", to_string(token));
    response.infer_bindings(reply);
    int row = parse_coordinate(response.get_binding("x"));
    int col = parse_coordinate(response.get_binding("y"));
    return {row, col};
}

std::string ask_for_move(ChatProvider& provider, const Board& board, Token token,
                         const char* prompt_source) {
    PromptTemplate prompt(prompt_source);
    prompt.add_binding("board", board.to_json());
    prompt.add_binding("player", to_string(token));
    return chat(provider, prompt);
}

std::string yes_no_answer(const std::string& reply) {
    ResponseTemplate response("**Result ${answer}**");
    response.infer_bindings(reply);
    std::string answer = response.get_binding("answer");
    std::string upper;
    for (char c : answer) upper.push_back(static_cast<char>(std::toupper(
        static_cast<unsigned char>(c))));
    return upper;
}

}  // namespace

MoveDecision llm_decide(ChatProvider& provider, const Board& board, Token token) {
    std::string reply = ask_for_move(provider, board, token, kMovePrompt);
    MoveDecision d = extract_move(reply, token);
    return validated(board, d.row, d.col);
}

MoveDecision defensive_decide(ChatProvider& provider, const Board& board, Token token) {
    std::string answer = yes_no_answer(ask_for_move(provider, board, token, kLosablePrompt));
    if (answer != "YES" && answer != "NO") {
        throw UnexpectedAnswer("losable check expected YES or NO, got \"" + answer + "\"");
    }
    const char* move_prompt = (answer == "YES") ? kDefensiveMovePrompt : kNeutralMovePrompt;
    std::string reply = ask_for_move(provider, board, token, move_prompt);
    MoveDecision d = extract_move(reply, token);
    return validated(board, d.row, d.col);
}

ReflectiveOutcome reflective_decide(ChatProvider& provider, const Board& board, Token token,
                                    int max_rounds) {
    if (max_rounds < 1) max_rounds = 1;
    std::vector<MoveDecision> rejected;
    MoveDecision proposal{0, 0};
    for (int round = 0; round < max_rounds; ++round) {
        std::string prompt_source = kMovePrompt;
        if (!rejected.empty()) {
            prompt_source += " The following moves were rejected:";
            for (std::size_t i = 0; i < rejected.size(); ++i) {
                prompt_source += (i ? "," : "");
                prompt_source += " (" + std::to_string(rejected[i].row) + ", " +
                                 std::to_string(rejected[i].col) + ")";
            }
            prompt_source += ". Do not pick the same moves again.";
        }
        std::string reply = ask_for_move(provider, board, token, prompt_source.c_str());
        proposal = extract_move(reply, token);

        PromptTemplate evaluate(kEvaluatePrompt);
        evaluate.add_binding("player", to_string(token));
        evaluate.add_binding("x", std::to_string(proposal.row));
        evaluate.add_binding("y", std::to_string(proposal.col));
        evaluate.add_binding("board", board.to_json());
        std::string verdict = yes_no_answer(chat(provider, evaluate));
        if (verdict == "YES") {
            validated(board, proposal.row, proposal.col);
            return {proposal, round + 1, false};
        }
        rejected.push_back(proposal);
    }
    validated(board, proposal.row, proposal.col);
    return {proposal, max_rounds, true};
}

}  // namespace agentkit::ttt
