#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "chefshat/agents.hpp"
#include "chefshat/engine.hpp"

namespace chefshat {

// Safety valve for deterministic all-pass livelocks between frozen greedy
// agents (passing is always legal, so four deterministic players can cycle).
// Random matches finish in well under 2000 turns; a capped match is resolved
// by forfeit ranking.
constexpr int kMaxMatchTurns = 5000;

struct MatchRecord {
  uint64_t seed = 0;
  std::vector<std::pair<int, Move>> moves;
  std::vector<int> finish_positions;
  std::array<std::vector<double>, kNumSeats> per_step_rewards;

  int winner() const { return finish_positions.at(0); }
  double reward_sum(int seat) const {
    double s = 0.0;
    for (double r : per_step_rewards[seat]) s += r;
    return s;
  }
};

// Everything observers need about one applied action.
struct MatchStepInfo {
  uint64_t match_seed = 0;
  int match_index = 0;  // position within the series; 0 restarts roles
  int step = 0;
  int seat = 0;
  std::string agent_kind;
  ActChoice choice;
  Move move;
  BoardGroup board_after;
  double reward = 0.0;
};

// Observation-only hooks: attaching one must never change match outcomes.
class MatchObserver {
 public:
  virtual ~MatchObserver() = default;
  virtual void on_match_begin(uint64_t /*seed*/, int /*match_index*/) {}
  virtual void on_step(const MatchStepInfo&) {}
  virtual void on_match_end(const MatchRecord&) {}
};

struct SeriesResult {
  std::array<int, kNumSeats> wins{};
  std::vector<std::array<int, kNumSeats>> positions_history;
  std::array<double, kNumSeats> reward_sums{};
  int games = 0;
};

struct EvaluationSummary {
  int runs = 0;
  int games = 0;
  std::array<double, kNumSeats> mean_wins{};
  std::array<double, kNumSeats> std_wins{};  // sample std over runs
  std::array<std::vector<int>, kNumSeats> per_run_wins;
  std::vector<uint64_t> run_seeds;
};

// Mean and sample standard deviation of per-run win counts.
EvaluationSummary summarize_runs(
    const std::array<std::vector<int>, kNumSeats>& per_run_wins, int games,
    const std::vector<uint64_t>& run_seeds);

// Deterministic resolution of a turn-capped match: remaining seats are
// ranked by hand size, ties by seat index.
std::vector<int> forfeit_positions(const MatchState& state);

// Plays one match to completion: deal, roles/special/exchange when
// previous_positions are given, golden-11 lead, then the turn loop. With
// learn enabled every agent receives its own experience stream (full reward
// 1.0 on the match-winning discard, -0.01 on every other action) and an
// end_of_match call.
MatchRecord play_match(const std::array<Agent*, kNumSeats>& agents,
                       const std::vector<int>& previous_positions,
                       uint64_t match_seed, bool learn, int match_index = 0,
                       MatchObserver* observer = nullptr);

// Consecutive matches with finishing positions carried into the next match's
// roles (when carry_roles is set). Per-match seeds derive from series_seed.
SeriesResult play_series(const std::array<Agent*, kNumSeats>& agents,
                         int games, uint64_t series_seed, bool learn,
                         bool carry_roles, MatchObserver* observer = nullptr);

// R independent seeded series of G games with learning forced off (and
// restored afterwards); roles reset between series.
EvaluationSummary evaluate(const std::array<Agent*, kNumSeats>& agents,
                           int runs, int games, uint64_t seed,
                           MatchObserver* observer = nullptr);

struct ExperimentConfig {
  std::string protocol = "vs_random";  // vs_random | vs_myself | vs_others
  int train_games = 1000;
  int eval_runs = 10;
  int eval_games = 100;
  int generations = 10;
  int games_per_generation = 200;
  int validation_games = 50;
  uint64_t seed = 1;
  bool carry_roles = true;
};

nlohmann::json experiment_config_to_json(const ExperimentConfig& cfg);
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);

struct VsRandomResult {
  std::unique_ptr<Agent> learner;
  EvaluationSummary summary;
};

// Table I "vs Random": train one learner against three random agents, then
// freeze and evaluate over eval_runs x eval_games.
VsRandomResult run_vs_random(const AgentConfig& agent_cfg,
                             const ExperimentConfig& cfg,
                             MatchObserver* train_observer = nullptr,
                             MatchObserver* eval_observer = nullptr);

enum class OpponentCategory : uint8_t { PoolMember, Fresh, Random };

struct OpponentDraw {
  OpponentCategory category;
  size_t pool_index = 0;
};

// Uniform draw over the three opponent categories; pool members are uniform
// over stored snapshots.
OpponentDraw draw_opponent(size_t pool_size, Rng& rng);

struct GenerationSnapshot {
  int generation = 0;  // 0-based
  int rank = 0;        // 0 best, 1 second-best
  double avg_reward = 0.0;
  int wins = 0;
  std::unique_ptr<Agent> agent;  // frozen copy
};

struct GenerationPool {
  std::vector<GenerationSnapshot> snapshots;

  const GenerationSnapshot* best_of(int generation) const {
    for (const auto& s : snapshots)
      if (s.generation == generation && s.rank == 0) return &s;
    return nullptr;
  }
};

// Table I "vs Myself": per generation, a training block of four learners
// (generation 0 all fresh; afterwards a copy of the previous best plus three
// opponents drawn per draw_opponent), then a frozen validation block whose
// averaged summed reward ranks the table; best and second-best join the pool.
GenerationPool run_self_play(const AgentConfig& agent_cfg,
                             const ExperimentConfig& cfg,
                             MatchObserver* observer = nullptr);

struct TournamentResult {
  EvaluationSummary before;
  EvaluationSummary after;
};

// Table I "vs Others": frozen evaluation of the three snapshots plus a
// random agent, a joint training block, then a second frozen evaluation.
TournamentResult run_vs_others(Agent& dql, Agent& a2c, Agent& ppo,
                               const ExperimentConfig& cfg,
                               MatchObserver* train_observer = nullptr,
                               MatchObserver* eval_observer = nullptr);

// Reconstructs the state trajectory of a recorded match from its seed and
// move list; used by the replay-determinism checks.
std::vector<uint64_t> replay_state_hashes(
    const MatchRecord& record, const std::vector<int>& previous_positions);

}  // namespace chefshat
