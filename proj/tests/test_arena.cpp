#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <set>

#include "chefshat/arena.hpp"
#include "helpers.hpp"

using namespace chefshat;

namespace {

struct RandomTable {
  std::array<std::unique_ptr<Agent>, kNumSeats> agents;
  std::array<Agent*, kNumSeats> ptrs{};

  RandomTable() {
    AgentConfig cfg;
    cfg.kind = "random";
    for (int s = 0; s < kNumSeats; ++s) {
      agents[s] = make_agent(cfg);
      ptrs[s] = agents[s].get();
    }
  }
};

AgentConfig small_learner(const std::string& kind, uint64_t seed) {
  AgentConfig cfg;
  cfg.kind = kind;
  cfg.hidden = {16};
  cfg.seed = seed;
  cfg.batch_size = 8;
  return cfg;
}

bool records_equal(const MatchRecord& a, const MatchRecord& b) {
  return a.seed == b.seed && a.moves == b.moves &&
         a.finish_positions == b.finish_positions &&
         a.per_step_rewards == b.per_step_rewards;
}

}  // namespace

TEST_CASE("same seed, same agents: identical match records") {
  RandomTable t1, t2;
  const MatchRecord r1 = play_match(t1.ptrs, {}, 4242, false);
  const MatchRecord r2 = play_match(t2.ptrs, {}, 4242, false);
  CHECK(records_equal(r1, r2));
  const MatchRecord r3 = play_match(t1.ptrs, {}, 4243, false);
  CHECK_FALSE(records_equal(r1, r3));
}

TEST_CASE("reward accounting: 1.0 on the winning discard, -0.01 elsewhere") {
  RandomTable table;
  for (int m = 0; m < 100; ++m) {
    const MatchRecord rec =
        play_match(table.ptrs, m % 2 ? std::vector<int>{0, 1, 2, 3}
                                     : std::vector<int>{},
                   split_seed(99, m), false);
    const int winner = rec.winner();
    for (int s = 0; s < kNumSeats; ++s) {
      const size_t k = rec.per_step_rewards[s].size();
      REQUIRE(k > 0);
      const double sum = rec.reward_sum(s);
      if (s == winner) {
        CHECK(sum == doctest::Approx(1.0 - 0.01 * (k - 1)).epsilon(1e-12));
        CHECK(rec.per_step_rewards[s].back() == 1.0);
      } else {
        CHECK(sum == doctest::Approx(-0.01 * k).epsilon(1e-12));
      }
      for (size_t i = 0; i + 1 < k; ++i)
        CHECK(rec.per_step_rewards[s][i] == -0.01);
    }
    // finish positions form a permutation
    std::set<int> seats(rec.finish_positions.begin(),
                        rec.finish_positions.end());
    CHECK(seats == std::set<int>{0, 1, 2, 3});
  }
}

TEST_CASE("match records replay to the same state trajectory") {
  RandomTable table;
  const std::vector<int> prev = {2, 0, 3, 1};
  const MatchRecord rec = play_match(table.ptrs, prev, 31415, false);
  const auto h1 = replay_state_hashes(rec, prev);
  const auto h2 = replay_state_hashes(rec, prev);
  CHECK(h1 == h2);
  CHECK(h1.size() == rec.moves.size() + 1);

  // replaying the moves reproduces the recorded finish order
  Rng rng(rec.seed);
  MatchState st = new_match(rng, prev);
  for (const auto& [seat, move] : rec.moves) apply_move(st, seat, move);
  CHECK(st.finished_order == rec.finish_positions);
}

TEST_CASE("series carry roles and count wins") {
  RandomTable table;
  const SeriesResult series = play_series(table.ptrs, 20, 777, false, true);
  CHECK(series.games == 20);
  CHECK(series.wins[0] + series.wins[1] + series.wins[2] + series.wins[3] ==
        20);
  CHECK(series.positions_history.size() == 20);
  for (const auto& pos : series.positions_history) {
    std::set<int> seats(pos.begin(), pos.end());
    CHECK(seats == std::set<int>{0, 1, 2, 3});
  }
}

TEST_CASE("evaluation summary math") {
  SUBCASE("an agent winning every game has mean G and zero std") {
    std::array<std::vector<int>, kNumSeats> wins;
    for (int r = 0; r < 10; ++r) {
      wins[0].push_back(100);
      wins[1].push_back(0);
      wins[2].push_back(0);
      wins[3].push_back(0);
    }
    const EvaluationSummary s =
        summarize_runs(wins, 100, std::vector<uint64_t>(10, 1));
    CHECK(s.mean_wins[0] == 100.0);
    CHECK(s.std_wins[0] == 0.0);
  }

  SUBCASE("four identical random agents split the games evenly") {
    RandomTable table;
    const EvaluationSummary s = evaluate(table.ptrs, 10, 100, 2025);
    double total = 0.0;
    for (int seat = 0; seat < kNumSeats; ++seat) {
      total += s.mean_wins[seat];
      CHECK(std::abs(s.mean_wins[seat] - 25.0) < 5.0);
      CHECK(s.std_wins[seat] > 0.0);
    }
    CHECK(total == doctest::Approx(100.0));  // means partition the games
    for (int r = 0; r < s.runs; ++r) {
      int run_total = 0;
      for (int seat = 0; seat < kNumSeats; ++seat)
        run_total += s.per_run_wins[seat][r];
      CHECK(run_total == 100);
    }
  }
}

TEST_CASE("evaluation never mutates weights and restores learning flags") {
  auto learner = make_agent(small_learner("ppo", 3));
  RandomTable table;
  std::array<Agent*, kNumSeats> ptrs = {learner.get(), table.ptrs[1],
                                        table.ptrs[2], table.ptrs[3]};
  learner->set_learning(true);
  const uint64_t before = learner->weights_hash();
  evaluate(ptrs, 2, 10, 77);
  CHECK(learner->weights_hash() == before);
  CHECK(learner->learning());  // restored
}

TEST_CASE("opponent draws are uniform over the three categories") {
  Rng rng(12);
  int counts[3] = {0, 0, 0};
  std::array<int, 6> pool_counts{};
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    const OpponentDraw d = draw_opponent(6, rng);
    ++counts[static_cast<int>(d.category)];
    if (d.category == OpponentCategory::PoolMember) {
      REQUIRE(d.pool_index < 6);
      ++pool_counts[d.pool_index];
    }
  }
  for (int c = 0; c < 3; ++c)
    CHECK(std::abs(counts[c] / static_cast<double>(draws) - 1.0 / 3) < 0.02);
  for (int i = 0; i < 6; ++i)
    CHECK(std::abs(pool_counts[i] / static_cast<double>(counts[0]) -
                   1.0 / 6) < 0.03);
}

TEST_CASE("self-play pool grows by two snapshots per generation") {
  ExperimentConfig cfg;
  cfg.generations = 3;
  cfg.games_per_generation = 4;
  cfg.validation_games = 3;
  cfg.seed = 5;
  const GenerationPool pool = run_self_play(small_learner("a2c", 1), cfg);
  CHECK(pool.snapshots.size() == 2u * cfg.generations);
  for (int g = 0; g < cfg.generations; ++g) {
    const GenerationSnapshot* best = pool.best_of(g);
    REQUIRE(best != nullptr);
    CHECK(best->rank == 0);
    CHECK_FALSE(best->agent->learning());
    // ranking is by averaged summed reward, ties by wins then seat
    const GenerationSnapshot* second = nullptr;
    for (const auto& s : pool.snapshots)
      if (s.generation == g && s.rank == 1) second = &s;
    REQUIRE(second != nullptr);
    CHECK(best->avg_reward >= second->avg_reward);
  }
}

TEST_CASE("vs-random runner trains then freezes for the evaluation") {
  ExperimentConfig cfg;
  cfg.train_games = 4;
  cfg.eval_runs = 2;
  cfg.eval_games = 5;
  cfg.seed = 31;
  const VsRandomResult result = run_vs_random(small_learner("ppo", 7), cfg);
  REQUIRE(result.learner != nullptr);
  CHECK_FALSE(result.learner->learning());
  CHECK(result.summary.runs == 2);
  CHECK(result.summary.games == 5);
  double total = 0.0;
  for (double m : result.summary.mean_wins) total += m;
  CHECK(total == doctest::Approx(5.0));
}

TEST_CASE("tournament runner produces before and after summaries") {
  auto dql = make_agent(small_learner("dql", 1));
  auto a2c = make_agent(small_learner("a2c", 2));
  auto ppo = make_agent(small_learner("ppo", 3));
  ExperimentConfig cfg;
  cfg.train_games = 4;
  cfg.eval_runs = 2;
  cfg.eval_games = 4;
  cfg.seed = 9;
  const TournamentResult result = run_vs_others(*dql, *a2c, *ppo, cfg);
  CHECK(result.before.runs == 2);
  CHECK(result.after.runs == 2);
  double wins_before = 0.0, wins_after = 0.0;
  for (int s = 0; s < kNumSeats; ++s) {
    wins_before += result.before.mean_wins[s];
    wins_after += result.after.mean_wins[s];
  }
  CHECK(wins_before == doctest::Approx(4.0));
  CHECK(wins_after == doctest::Approx(4.0));
}

TEST_CASE("experiment runs are deterministic end to end") {
  ExperimentConfig cfg;
  cfg.train_games = 6;
  cfg.eval_runs = 2;
  cfg.eval_games = 6;
  cfg.seed = 1234;
  const VsRandomResult a = run_vs_random(small_learner("dql", 42), cfg);
  const VsRandomResult b = run_vs_random(small_learner("dql", 42), cfg);
  CHECK(a.learner->weights_hash() == b.learner->weights_hash());
  CHECK(a.summary.mean_wins == b.summary.mean_wins);
  CHECK(a.summary.per_run_wins == b.summary.per_run_wins);
}

TEST_CASE("seed splitting separates streams") {
  std::set<uint64_t> seeds;
  for (int i = 0; i < 1000; ++i) seeds.insert(split_seed(7, i));
  CHECK(seeds.size() == 1000);
  CHECK(split_seed(7, 0) != split_seed(8, 0));
}
