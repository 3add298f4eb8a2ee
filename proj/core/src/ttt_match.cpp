#include "agentkit/ttt_match.hpp"

#include <future>
#include <mutex>

namespace agentkit::ttt {

using nlohmann::json;

namespace {

struct MatchShared {
    std::mutex mutex;
    Board board;
    MatchResult result;
    std::promise<void> done;
    bool done_set = false;
    // End-of-game drain barrier, acked one player at a time so the ack order
    // (and with it the transcript) stays deterministic.
    std::vector<std::string> barrier;
    std::size_t barrier_next = 0;

    void finish() {
        if (!done_set) {
            done_set = true;
            done.set_value();
        }
    }
};

struct PlayerWiring {
    Token token;
    std::string env_name;
    std::string opponent_name;
    MatchRules rules;
    std::shared_ptr<MatchShared> shared;
    PlayerStats* stats;  // this player's slot inside shared->result
    std::function<MoveDecision(AgentContext&, const Board&)> decide;
    std::shared_ptr<Recorder> recorder;
};

std::function<MoveDecision(AgentContext&, const Board&)> make_decider(
    const PlayerSetup& setup, Token token) {
    if (setup.kind == "linear") {
        return [](AgentContext&, const Board& b) { return linear_decide(b); };
    }
    if (setup.kind == "random") {
        auto rng = std::make_shared<std::mt19937>(
            static_cast<std::mt19937::result_type>(setup.seed));
        return [rng](AgentContext&, const Board& b) { return random_decide(b, *rng); };
    }
    if (!setup.provider) {
        throw InvalidConfig("player kind '" + setup.kind + "' needs a provider");
    }
    auto provider = setup.provider;
    if (setup.kind == "llm-basic") {
        return [provider, token](AgentContext&, const Board& b) {
            return llm_decide(*provider, b, token);
        };
    }
    if (setup.kind == "llm-defensive") {
        return [provider, token](AgentContext&, const Board& b) {
            return defensive_decide(*provider, b, token);
        };
    }
    if (setup.kind == "llm-reflective") {
        int rounds = setup.reflective_rounds;
        return [provider, token, rounds](AgentContext& ctx, const Board& b) {
            ReflectiveOutcome outcome = reflective_decide(*provider, b, token, rounds);
            if (outcome.exhausted) {
                ctx.log("reflective_exhausted", json{{"rounds", outcome.rounds}});
            }
            return outcome.decision;
        };
    }
    throw InvalidConfig("unknown player kind '" + setup.kind + "'");
}

Predicate board_belief_pattern() {
    return Predicate("board", {Term::var("J", TermType::Text)});
}

void replace_board_belief(AgentContext& ctx, const std::string& board_json) {
    for (const Substitution& sub : ctx.beliefs().query(board_belief_pattern())) {
        ctx.beliefs().remove(Predicate("board", {sub.at("J")}));
    }
    ctx.beliefs().add(Predicate("board", {Term::text(board_json)}));
}

bool game_over_believed(AgentContext& ctx) {
    return ctx.beliefs().holds(
        Predicate("game_over", {Term::var("W", TermType::Text)}));
}

Behavior make_player_behavior(std::string behavior_id, PlayerWiring wiring) {
    Behavior behavior;
    behavior.id = std::move(behavior_id);

    behavior.on_message(
        performative::inform, board_belief_pattern(),
        [](AgentContext& ctx, const std::string&, const Substitution& sub) {
            replace_board_belief(ctx, sub.at("J").text_value());
        });
    behavior.on_message(
        performative::inform,
        Predicate("moved", {Term::var("T", TermType::Text), Term::var("R", TermType::Int),
                            Term::var("C", TermType::Int)}),
        [](AgentContext& ctx, const std::string&, const Substitution& sub) {
            ctx.beliefs().add(Predicate(
                "moved", {sub.at("T"), sub.at("R"), sub.at("C")}));
        });
    behavior.on_message(
        performative::inform, Predicate("game_over", {Term::var("W", TermType::Text)}),
        [](AgentContext& ctx, const std::string&, const Substitution& sub) {
            ctx.beliefs().add(Predicate("game_over", {sub.at("W")}));
        });
    behavior.on_message(
        performative::request, Predicate("done"),
        [token = wiring.token, env = wiring.env_name](AgentContext& ctx,
                                                      const std::string&,
                                                      const Substitution&) {
            ctx.send(performative::inform, env,
                     Predicate("done_ack", {Term::text(to_string(token))}));
        });

    behavior.on_message(
        performative::request, Predicate("your_move"),
        [wiring](AgentContext& ctx, const std::string&, const Substitution&) {
            if (game_over_believed(ctx)) {
                ctx.log("skip_turn", json{{"reason", "game already over"}});
                return;
            }
            auto boards = ctx.beliefs().query(board_belief_pattern());
            if (boards.empty()) {
                throw Error("player has no board belief");
            }
            Board board = Board::from_json(boards.front().at("J").text_value());

            std::size_t recorded_before =
                wiring.recorder ? wiring.recorder->size() : 0;
            std::optional<MoveDecision> decision;
            int attempts = 0;
            while (true) {
                try {
                    decision = wiring.decide(ctx, board);
                    break;
                } catch (const IllegalMoveProposed& e) {
                    {
                        std::lock_guard lock(wiring.shared->mutex);
                        ++wiring.stats->illegal_proposals;
                    }
                    ctx.log("illegal_proposal",
                            json{{"row", e.row}, {"col", e.col}, {"what", e.what()}});
                } catch (const NoMatch& e) {
                    {
                        std::lock_guard lock(wiring.shared->mutex);
                        ++wiring.stats->parse_failures;
                    }
                    ctx.log("parse_failure", json{{"what", e.what()}});
                } catch (const NonInteger& e) {
                    {
                        std::lock_guard lock(wiring.shared->mutex);
                        ++wiring.stats->parse_failures;
                    }
                    ctx.log("parse_failure", json{{"what", e.what()}});
                } catch (const UnexpectedAnswer& e) {
                    {
                        std::lock_guard lock(wiring.shared->mutex);
                        ++wiring.stats->parse_failures;
                    }
                    ctx.log("parse_failure", json{{"what", e.what()}});
                }
                ++attempts;
                if (wiring.rules.policy == IllegalPolicy::Forfeit ||
                    attempts > wiring.rules.max_retries) {
                    if (wiring.rules.policy == IllegalPolicy::RetryThenLinear) {
                        decision = linear_decide(board);
                        std::lock_guard lock(wiring.shared->mutex);
                        ++wiring.stats->linear_fallbacks;
                        break;
                    }
                    ctx.log("forfeit", json{{"after_attempts", attempts}});
                    ctx.send(performative::inform, wiring.env_name,
                             Predicate("forfeit", {Term::text(to_string(wiring.token))}));
                    return;
                }
                std::lock_guard lock(wiring.shared->mutex);
                ++wiring.stats->retries;
            }

            std::vector<std::size_t> exchanges;
            if (wiring.recorder) {
                for (std::size_t i = recorded_before; i < wiring.recorder->size(); ++i) {
                    exchanges.push_back(i);
                    ctx.log("chat", json{{"exchange", i}});
                }
            }
            {
                std::lock_guard lock(wiring.shared->mutex);
                wiring.stats->moves.push_back(
                    {{wiring.token, decision->row, decision->col}, std::move(exchanges)});
            }

            ctx.send(performative::request, wiring.env_name,
                     Predicate("move", {Term::text(to_string(wiring.token)),
                                        Term::integer(decision->row),
                                        Term::integer(decision->col)}));
            ctx.wait(Predicate("moved", {Term::text(to_string(wiring.token)),
                                         Term::integer(decision->row),
                                         Term::integer(decision->col)}),
                     wiring.rules.move_timeout);
            if (!game_over_believed(ctx)) {
                ctx.send(performative::request, wiring.opponent_name,
                         Predicate("your_move"));
            }
        });

    return behavior;
}

Behavior make_env_behavior(std::string behavior_id, std::shared_ptr<MatchShared> shared,
                           std::string x_name, std::string o_name) {
    Behavior behavior;
    behavior.id = std::move(behavior_id);

    auto broadcast_state = [shared, x_name, o_name](AgentContext& ctx, Token mover,
                                                    int row, int col) {
        std::string board_json;
        GameStatus status;
        {
            std::lock_guard lock(shared->mutex);
            board_json = shared->board.to_json();
            status = shared->board.status();
        }
        // The mover's opponent hears first so its board update always precedes
        // the mover's follow-up your_move request. When the game ends,
        // game_over is delivered before the moved confirmation so the mover's
        // post-move check already sees it and never issues a dead turn
        // request; the done/ack barrier then lets play_match return only once
        // both players have drained their mailboxes.
        std::string mover_name = mover == Token::X ? x_name : o_name;
        std::string opponent_name = mover == Token::X ? o_name : x_name;
        for (const std::string& target : {opponent_name, mover_name}) {
            ctx.send(performative::inform, target,
                     Predicate("board", {Term::text(board_json)}));
            if (status.over()) {
                ctx.send(performative::inform, target,
                         Predicate("game_over", {Term::text(to_string(status))}));
            }
            ctx.send(performative::inform, target,
                     Predicate("moved", {Term::text(to_string(mover)),
                                         Term::integer(row), Term::integer(col)}));
        }
        if (status.over()) {
            {
                std::lock_guard lock(shared->mutex);
                shared->result.status = status;
                shared->result.winner = status.winner;
                shared->result.moves = shared->board.history();
                shared->barrier = {opponent_name, mover_name};
                shared->barrier_next = 0;
            }
            ctx.send(performative::request, opponent_name, Predicate("done"));
        }
    };

    behavior.on_start = [shared, x_name, o_name](AgentContext& ctx,
                                                 const std::vector<std::string>&) {
        std::string board_json;
        {
            std::lock_guard lock(shared->mutex);
            board_json = shared->board.to_json();
        }
        for (const std::string& target : {o_name, x_name}) {
            ctx.send(performative::inform, target,
                     Predicate("board", {Term::text(board_json)}));
        }
        ctx.send(performative::request, x_name, Predicate("your_move"));
    };

    behavior.on_message(
        performative::request,
        Predicate("move", {Term::var("T", TermType::Text), Term::var("R", TermType::Int),
                           Term::var("C", TermType::Int)}),
        [shared, broadcast_state](AgentContext& ctx, const std::string& sender,
                                  const Substitution& sub) {
            auto token = token_from_string(sub.at("T").text_value());
            int row = static_cast<int>(sub.at("R").int_value());
            int col = static_cast<int>(sub.at("C").int_value());
            if (!token) {
                throw Error("move with unknown token from " + sender);
            }
            try {
                std::lock_guard lock(shared->mutex);
                shared->board.apply(*token, row, col);
            } catch (const Error& e) {
                // Players validate before sending, so this is a harness defect;
                // end the match with an error rather than stalling.
                ctx.log("rejected_move", json{{"from", sender}, {"what", e.what()}});
                std::lock_guard lock(shared->mutex);
                shared->result.error = e.what();
                shared->result.moves = shared->board.history();
                shared->finish();
                return;
            }
            broadcast_state(ctx, *token, row, col);
        });

    behavior.on_message(
        performative::inform, Predicate("forfeit", {Term::var("T", TermType::Text)}),
        [shared, x_name, o_name](AgentContext& ctx, const std::string&,
                                 const Substitution& sub) {
            auto token = token_from_string(sub.at("T").text_value());
            if (!token) return;
            std::string verdict;
            {
                std::lock_guard lock(shared->mutex);
                shared->result.forfeit = true;
                shared->result.forfeited_by = *token;
                shared->result.winner = other(*token);
                shared->result.status = {GameStatus::Kind::Win, other(*token)};
                shared->result.moves = shared->board.history();
                verdict = to_string(shared->result.status);
            }
            for (const std::string& target : {x_name, o_name}) {
                ctx.send(performative::inform, target,
                         Predicate("game_over", {Term::text(verdict)}));
            }
            {
                std::lock_guard lock(shared->mutex);
                shared->barrier = {x_name, o_name};
                shared->barrier_next = 0;
            }
            ctx.send(performative::request, x_name, Predicate("done"));
        });

    behavior.on_message(
        performative::inform, Predicate("done_ack", {Term::var("T", TermType::Text)}),
        [shared](AgentContext& ctx, const std::string&, const Substitution&) {
            std::string next;
            {
                std::lock_guard lock(shared->mutex);
                ++shared->barrier_next;
                if (shared->barrier_next >= shared->barrier.size()) {
                    shared->finish();
                    return;
                }
                next = shared->barrier[shared->barrier_next];
            }
            ctx.send(performative::request, next, Predicate("done"));
        });

    return behavior;
}

}  // namespace

json MatchResult::to_json() const {
    auto stats_json = [](const PlayerStats& s) {
        json moves = json::array();
        for (const MoveRecord& m : s.moves) {
            moves.push_back(json{{"row", m.move.row},
                                 {"col", m.move.col},
                                 {"exchanges", m.exchanges}});
        }
        return json{{"illegal_proposals", s.illegal_proposals},
                    {"parse_failures", s.parse_failures},
                    {"retries", s.retries},
                    {"linear_fallbacks", s.linear_fallbacks},
                    {"moves", moves}};
    };
    json moves = json::array();
    for (const Move& m : this->moves) {
        moves.push_back(json{{"token", to_string(m.token)}, {"row", m.row}, {"col", m.col}});
    }
    json out{{"status", to_string(status)},
             {"winner", winner ? json(to_string(*winner)) : json(nullptr)},
             {"forfeit", forfeit},
             {"moves", moves},
             {"player_x", stats_json(stats_x)},
             {"player_o", stats_json(stats_o)}};
    if (forfeited_by) out["forfeited_by"] = to_string(*forfeited_by);
    if (!error.empty()) out["error"] = error;
    return out;
}

MatchResult play_match(AgentSystem& system, const PlayerSetup& player_x,
                       const PlayerSetup& player_o, const MatchRules& rules,
                       const std::string& agent_prefix) {
    auto shared = std::make_shared<MatchShared>();
    std::string x_name = agent_prefix + "playerX";
    std::string o_name = agent_prefix + "playerO";
    std::string env_name = agent_prefix + "env";

    auto wire = [&](const PlayerSetup& setup, Token token, PlayerStats* stats) {
        PlayerWiring wiring;
        wiring.token = token;
        wiring.env_name = env_name;
        wiring.opponent_name = token == Token::X ? o_name : x_name;
        wiring.rules = rules;
        wiring.shared = shared;
        wiring.stats = stats;
        wiring.decide = make_decider(setup, token);
        wiring.recorder = setup.provider ? setup.provider->recorder() : nullptr;
        return wiring;
    };

    system.register_behavior(make_player_behavior(
        agent_prefix + "ttt_player_x", wire(player_x, Token::X, &shared->result.stats_x)));
    system.register_behavior(make_player_behavior(
        agent_prefix + "ttt_player_o", wire(player_o, Token::O, &shared->result.stats_o)));
    system.register_behavior(
        make_env_behavior(agent_prefix + "ttt_env", shared, x_name, o_name));

    system.spawn({agent_prefix + "ttt_player_x", {}, {}}, x_name);
    system.spawn({agent_prefix + "ttt_player_o", {}, {}}, o_name);
    system.spawn({agent_prefix + "ttt_env", {}, {}}, env_name);

    auto future = shared->done.get_future();
    auto total = rules.move_timeout * 12;
    if (future.wait_for(total) != std::future_status::ready) {
        throw WaitTimeout("match did not finish within " + std::to_string(total.count()) +
                          " ms");
    }
    std::lock_guard lock(shared->mutex);
    return shared->result;
}

}  // namespace agentkit::ttt
