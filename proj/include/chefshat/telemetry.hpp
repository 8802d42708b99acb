#pragma once

#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "chefshat/arena.hpp"

namespace chefshat {

// Shortest round-trip decimal form of a double; keeps CSV output
// byte-deterministic and losslessly parseable.
std::string format_double(double v);

// One logged learner turn: the chosen action's softmaxed probability over
// the allowed slots, plus the mask cardinality so forced moves (confidence
// exactly 1) stay distinguishable in memory.
struct StepLog {
  int match = 0;
  int turn = 0;
  int seat = 0;
  std::string agent;
  int action_index = 0;
  double confidence = 1.0;
  int mask_cardinality = 0;

  bool operator==(const StepLog&) const = default;
};

// confidence = masked_softmax(outputs, mask)[chosen].
StepLog record_step(std::span<const double> outputs, const MaskVector& mask,
                    int chosen);

// qtrace CSV with the fixed header
// "match,turn,seat,agent,action_index,confidence".
void export_qtrace(const std::vector<StepLog>& logs, const std::string& path);
std::vector<StepLog> load_qtrace(const std::string& path);

// Collects per-turn confidence rows for learner (non-random) agents. Match
// numbering is the global observation order, so traces from several series
// stay distinct.
class QtraceCollector : public MatchObserver {
 public:
  void on_match_begin(uint64_t seed, int match_index) override;
  void on_step(const MatchStepInfo& info) override;

  const std::vector<StepLog>& logs() const { return logs_; }

 private:
  std::vector<StepLog> logs_;
  int global_match_ = -1;
};

// results.csv accumulator: one row per agent per evaluation run, with the
// aggregate mean/std repeated on each row.
class ResultsTable {
 public:
  void add_summary(const std::string& experiment, const std::string& phase,
                   const std::array<std::string, kNumSeats>& agent_labels,
                   const EvaluationSummary& summary);
  void add_row(const std::string& experiment, const std::string& phase,
               const std::string& agent, int run, int wins, double mean,
               double stddev, uint64_t seed);

  std::string csv() const;
  void write(const std::string& path) const;

 private:
  struct Row {
    std::string experiment, phase, agent;
    int run = 0;
    int wins = 0;
    double mean = 0.0;
    double stddev = 0.0;
    uint64_t seed = 0;
  };
  std::vector<Row> rows_;
};

// One JSON object per applied action:
// {seed, match_index, step, seat, move, board_after, rewards}. rewards is a
// four-entry vector with the acting seat's reward set.
class TranscriptWriter : public MatchObserver {
 public:
  explicit TranscriptWriter(const std::string& path);
  void on_step(const MatchStepInfo& info) override;

 private:
  std::ofstream out_;
};

nlohmann::json move_to_json(const Move& move);
Move move_from_json(const nlohmann::json& j);
std::vector<int> board_values(const BoardGroup& board);

struct ReplayStats {
  int matches = 0;
  int steps = 0;
};

// Re-simulates every match in a transcript from its seed and verifies each
// step bit-exactly (seat to act, board after the move, rewards). Roles chain
// through the file; match_index 0 starts a fresh series. Throws
// std::runtime_error with a diagnostic on the first mismatch.
ReplayStats replay_verify(const std::string& path);

}  // namespace chefshat
