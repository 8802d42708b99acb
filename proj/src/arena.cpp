#include "chefshat/arena.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace chefshat {

namespace {

struct PendingExperience {
  StateVec state{};
  int action = 0;
  double reward = 0.0;
  bool active = false;
};

}  // namespace

EvaluationSummary summarize_runs(
    const std::array<std::vector<int>, kNumSeats>& per_run_wins, int games,
    const std::vector<uint64_t>& run_seeds) {
  EvaluationSummary summary;
  summary.per_run_wins = per_run_wins;
  summary.run_seeds = run_seeds;
  summary.games = games;
  summary.runs = static_cast<int>(per_run_wins[0].size());
  for (int s = 0; s < kNumSeats; ++s) {
    double mean = 0.0;
    for (int w : per_run_wins[s]) mean += w;
    mean /= std::max(1, summary.runs);
    double var = 0.0;
    for (int w : per_run_wins[s]) var += (w - mean) * (w - mean);
    summary.mean_wins[s] = mean;
    summary.std_wins[s] =
        summary.runs > 1 ? std::sqrt(var / (summary.runs - 1)) : 0.0;
  }
  return summary;
}

std::vector<int> forfeit_positions(const MatchState& state) {
  std::vector<int> positions = state.finished_order;
  std::vector<int> remaining;
  for (int s = 0; s < kNumSeats; ++s)
    if (!state.finished(s)) remaining.push_back(s);
  std::sort(remaining.begin(), remaining.end(), [&](int a, int b) {
    const int sa = state.hands[a].size();
    const int sb = state.hands[b].size();
    return sa != sb ? sa < sb : a < b;
  });
  positions.insert(positions.end(), remaining.begin(), remaining.end());
  return positions;
}

MatchRecord play_match(const std::array<Agent*, kNumSeats>& agents,
                       const std::vector<int>& previous_positions,
                       uint64_t match_seed, bool learn, int match_index,
                       MatchObserver* observer) {
  Rng rng(match_seed);
  MatchState state = new_match(rng, previous_positions);

  MatchRecord record;
  record.seed = match_seed;
  if (observer) observer->on_match_begin(match_seed, match_index);

  std::array<PendingExperience, kNumSeats> pending{};
  int step = 0;

  while (!state.over() && state.turn_counter < kMaxMatchTurns) {
    const int seat = state.turn;
    const StateVec obs = observe(state, seat);
    const MaskVector mask = possible_actions(state, seat);

    if (learn && pending[seat].active) {
      agents[seat]->record(Experience{pending[seat].state,
                                      pending[seat].action,
                                      pending[seat].reward, obs, mask, false});
      agents[seat]->train_step();
      pending[seat].active = false;
    }

    const ActChoice choice = agents[seat]->act(obs, mask, rng);
    if (choice.action < 0 || choice.action >= kActionCount ||
        !mask[choice.action])
      throw std::logic_error("play_match: agent chose a masked-out action");
    const Move move = concretize(decode(choice.action), state.hands[seat]);

    const bool no_finisher_yet = state.finished_order.empty();
    apply_move(state, seat, move);
    const bool won_now = no_finisher_yet && !state.finished_order.empty() &&
                         state.finished_order[0] == seat;
    const double reward = won_now ? 1.0 : -0.01;

    record.moves.emplace_back(seat, move);
    record.per_step_rewards[seat].push_back(reward);
    if (observer)
      observer->on_step(MatchStepInfo{match_seed, match_index, step, seat,
                                      agents[seat]->kind(), choice, move,
                                      state.board, reward});
    if (learn) pending[seat] = PendingExperience{obs, choice.action, reward, true};
    ++step;
  }

  record.finish_positions =
      state.over() ? state.finished_order : forfeit_positions(state);

  if (learn) {
    for (int seat = 0; seat < kNumSeats; ++seat) {
      if (!pending[seat].active) continue;
      agents[seat]->record(Experience{pending[seat].state,
                                      pending[seat].action,
                                      pending[seat].reward,
                                      observe(state, seat), MaskVector{},
                                      true});
      agents[seat]->train_step();
      pending[seat].active = false;
    }
    for (int seat = 0; seat < kNumSeats; ++seat)
      agents[seat]->end_of_match(record.finish_positions);
  }

  if (observer) observer->on_match_end(record);
  return record;
}

SeriesResult play_series(const std::array<Agent*, kNumSeats>& agents,
                         int games, uint64_t series_seed, bool learn,
                         bool carry_roles, MatchObserver* observer) {
  SeriesResult series;
  std::vector<int> positions;  // empty: first match has no roles
  for (int g = 0; g < games; ++g) {
    const uint64_t match_seed = split_seed(series_seed, g);
    const MatchRecord rec =
        play_match(agents, positions, match_seed, learn, g, observer);
    ++series.wins[rec.winner()];
    std::array<int, kNumSeats> pos{};
    for (int i = 0; i < kNumSeats; ++i) pos[i] = rec.finish_positions[i];
    series.positions_history.push_back(pos);
    for (int s = 0; s < kNumSeats; ++s)
      series.reward_sums[s] += rec.reward_sum(s);
    ++series.games;
    if (carry_roles) positions = rec.finish_positions;
  }
  return series;
}

EvaluationSummary evaluate(const std::array<Agent*, kNumSeats>& agents,
                           int runs, int games, uint64_t seed,
                           MatchObserver* observer) {
  std::array<bool, kNumSeats> prior{};
  for (int s = 0; s < kNumSeats; ++s) {
    prior[s] = agents[s]->learning();
    agents[s]->set_learning(false);
  }
  std::array<std::vector<int>, kNumSeats> per_run_wins;
  std::vector<uint64_t> run_seeds;
  for (int r = 0; r < runs; ++r) {
    const uint64_t series_seed = split_seed(seed, r);
    run_seeds.push_back(series_seed);
    const SeriesResult series = play_series(agents, games, series_seed,
                                            /*learn=*/false,
                                            /*carry_roles=*/true, observer);
    for (int s = 0; s < kNumSeats; ++s)
      per_run_wins[s].push_back(series.wins[s]);
  }
  for (int s = 0; s < kNumSeats; ++s) agents[s]->set_learning(prior[s]);
  return summarize_runs(per_run_wins, games, run_seeds);
}

nlohmann::json experiment_config_to_json(const ExperimentConfig& cfg) {
  return {{"protocol", cfg.protocol},
          {"train_games", cfg.train_games},
          {"eval_runs", cfg.eval_runs},
          {"eval_games", cfg.eval_games},
          {"generations", cfg.generations},
          {"games_per_generation", cfg.games_per_generation},
          {"validation_games", cfg.validation_games},
          {"seed", cfg.seed},
          {"carry_roles", cfg.carry_roles}};
}

ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  cfg.protocol = j.value("protocol", cfg.protocol);
  cfg.train_games = j.value("train_games", cfg.train_games);
  cfg.eval_runs = j.value("eval_runs", cfg.eval_runs);
  cfg.eval_games = j.value("eval_games", cfg.eval_games);
  cfg.generations = j.value("generations", cfg.generations);
  cfg.games_per_generation =
      j.value("games_per_generation", cfg.games_per_generation);
  cfg.validation_games = j.value("validation_games", cfg.validation_games);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.carry_roles = j.value("carry_roles", cfg.carry_roles);
  if (cfg.train_games < 0 || cfg.eval_runs <= 0 || cfg.eval_games <= 0 ||
      cfg.generations <= 0 || cfg.games_per_generation <= 0 ||
      cfg.validation_games <= 0)
    throw std::invalid_argument("experiment config: counts must be positive");
  return cfg;
}

VsRandomResult run_vs_random(const AgentConfig& agent_cfg,
                             const ExperimentConfig& cfg,
                             MatchObserver* train_observer,
                             MatchObserver* eval_observer) {
  std::unique_ptr<Agent> learner = make_agent(agent_cfg);
  AgentConfig random_cfg;
  random_cfg.kind = "random";
  std::array<std::unique_ptr<Agent>, 3> randoms = {
      make_agent(random_cfg), make_agent(random_cfg), make_agent(random_cfg)};
  const std::array<Agent*, kNumSeats> table = {learner.get(), randoms[0].get(),
                                               randoms[1].get(),
                                               randoms[2].get()};
  play_series(table, cfg.train_games, split_seed(cfg.seed, 1), /*learn=*/true,
              cfg.carry_roles, train_observer);
  EvaluationSummary summary = evaluate(table, cfg.eval_runs, cfg.eval_games,
                                       split_seed(cfg.seed, 2), eval_observer);
  learner->set_learning(false);
  return {std::move(learner), std::move(summary)};
}

OpponentDraw draw_opponent(size_t pool_size, Rng& rng) {
  switch (rng.uniform_int(3)) {
    case 0: return {OpponentCategory::PoolMember, rng.uniform_int(pool_size)};
    case 1: return {OpponentCategory::Fresh, 0};
    default: return {OpponentCategory::Random, 0};
  }
}

GenerationPool run_self_play(const AgentConfig& agent_cfg,
                             const ExperimentConfig& cfg,
                             MatchObserver* observer) {
  GenerationPool pool;
  Rng meta(split_seed(cfg.seed, 0xD2A3));
  AgentConfig random_cfg;
  random_cfg.kind = "random";

  auto fresh = [&](int generation, int slot) {
    AgentConfig c = agent_cfg;
    c.seed = split_seed(agent_cfg.seed, 0xF000 + generation * 8 + slot);
    return make_agent(c);
  };

  std::array<std::unique_ptr<Agent>, kNumSeats> seats;
  for (int gen = 0; gen < cfg.generations; ++gen) {
    if (gen == 0) {
      for (int s = 0; s < kNumSeats; ++s) seats[s] = fresh(0, s);
    } else {
      const GenerationSnapshot* best = pool.best_of(gen - 1);
      seats[0] = best->agent->clone();
      seats[0]->set_learning(true);
      for (int s = 1; s < kNumSeats; ++s) {
        const OpponentDraw draw = draw_opponent(pool.snapshots.size(), meta);
        switch (draw.category) {
          case OpponentCategory::PoolMember:
            seats[s] = pool.snapshots[draw.pool_index].agent->clone();
            seats[s]->set_learning(true);
            break;
          case OpponentCategory::Fresh:
            seats[s] = fresh(gen, s);
            break;
          case OpponentCategory::Random:
            seats[s] = make_agent(random_cfg);
            break;
        }
      }
    }

    const std::array<Agent*, kNumSeats> table = {seats[0].get(), seats[1].get(),
                                                 seats[2].get(),
                                                 seats[3].get()};
    play_series(table, cfg.games_per_generation,
                split_seed(cfg.seed, 0xA000 + gen), /*learn=*/true,
                cfg.carry_roles, observer);

    for (auto& s : seats) s->set_learning(false);
    const SeriesResult validation =
        play_series(table, cfg.validation_games,
                    split_seed(cfg.seed, 0xB000 + gen), /*learn=*/false,
                    cfg.carry_roles, observer);

    // rank by averaged summed reward; ties by win count, then seat index
    std::array<int, kNumSeats> order = {0, 1, 2, 3};
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      const double ra = validation.reward_sums[a] / validation.games;
      const double rb = validation.reward_sums[b] / validation.games;
      if (ra != rb) return ra > rb;
      if (validation.wins[a] != validation.wins[b])
        return validation.wins[a] > validation.wins[b];
      return a < b;
    });
    for (int rank = 0; rank < 2; ++rank) {
      const int seat = order[rank];
      GenerationSnapshot snap;
      snap.generation = gen;
      snap.rank = rank;
      snap.avg_reward = validation.reward_sums[seat] / validation.games;
      snap.wins = validation.wins[seat];
      snap.agent = seats[seat]->clone();
      snap.agent->set_learning(false);
      pool.snapshots.push_back(std::move(snap));
    }
  }
  return pool;
}

TournamentResult run_vs_others(Agent& dql, Agent& a2c, Agent& ppo,
                               const ExperimentConfig& cfg,
                               MatchObserver* train_observer,
                               MatchObserver* eval_observer) {
  AgentConfig random_cfg;
  random_cfg.kind = "random";
  std::unique_ptr<Agent> random_agent = make_agent(random_cfg);
  const std::array<Agent*, kNumSeats> table = {&dql, &a2c, &ppo,
                                               random_agent.get()};
  TournamentResult result;
  result.before = evaluate(table, cfg.eval_runs, cfg.eval_games,
                           split_seed(cfg.seed, 10), eval_observer);
  for (Agent* a : table) a->set_learning(true);
  play_series(table, cfg.train_games, split_seed(cfg.seed, 11), /*learn=*/true,
              cfg.carry_roles, train_observer);
  result.after = evaluate(table, cfg.eval_runs, cfg.eval_games,
                          split_seed(cfg.seed, 12), eval_observer);
  for (Agent* a : table) a->set_learning(false);
  return result;
}

std::vector<uint64_t> replay_state_hashes(
    const MatchRecord& record, const std::vector<int>& previous_positions) {
  Rng rng(record.seed);
  MatchState state = new_match(rng, previous_positions);
  std::vector<uint64_t> hashes;
  hashes.push_back(state.hash());
  for (const auto& [seat, move] : record.moves) {
    apply_move(state, seat, move);
    hashes.push_back(state.hash());
  }
  return hashes;
}

}  // namespace chefshat
