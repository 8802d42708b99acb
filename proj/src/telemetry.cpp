#include "chefshat/telemetry.hpp"

#include <charconv>
#include <sstream>
#include <stdexcept>

#include "chefshat/net.hpp"

namespace chefshat {

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

double parse_double(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw std::runtime_error("bad double field: " + s);
  return v;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

}  // namespace

StepLog record_step(std::span<const double> outputs, const MaskVector& mask,
                    int chosen) {
  const std::vector<double> p = masked_softmax(outputs, mask);
  StepLog log;
  log.action_index = chosen;
  log.confidence = p[chosen];
  log.mask_cardinality = mask_cardinality(mask);
  return log;
}

void export_qtrace(const std::vector<StepLog>& logs, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("export_qtrace: cannot write " + path);
  out << "match,turn,seat,agent,action_index,confidence\n";
  for (const StepLog& l : logs) {
    out << l.match << ',' << l.turn << ',' << l.seat << ',' << l.agent << ','
        << l.action_index << ',' << format_double(l.confidence) << '\n';
  }
  if (!out) throw std::runtime_error("export_qtrace: write failed: " + path);
}

std::vector<StepLog> load_qtrace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_qtrace: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) ||
      line != "match,turn,seat,agent,action_index,confidence")
    throw std::runtime_error("load_qtrace: bad header in " + path);
  std::vector<StepLog> logs;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 6)
      throw std::runtime_error("load_qtrace: bad row in " + path);
    StepLog l;
    l.match = std::stoi(f[0]);
    l.turn = std::stoi(f[1]);
    l.seat = std::stoi(f[2]);
    l.agent = f[3];
    l.action_index = std::stoi(f[4]);
    l.confidence = parse_double(f[5]);
    logs.push_back(std::move(l));
  }
  return logs;
}

void QtraceCollector::on_match_begin(uint64_t, int) { ++global_match_; }

void QtraceCollector::on_step(const MatchStepInfo& info) {
  if (info.agent_kind == "random") return;
  StepLog l;
  l.match = global_match_;
  l.turn = info.step;
  l.seat = info.seat;
  l.agent = info.agent_kind;
  l.action_index = info.choice.action;
  l.confidence = info.choice.confidence;
  l.mask_cardinality = info.choice.allowed;
  logs_.push_back(std::move(l));
}

void ResultsTable::add_summary(
    const std::string& experiment, const std::string& phase,
    const std::array<std::string, kNumSeats>& agent_labels,
    const EvaluationSummary& summary) {
  for (int s = 0; s < kNumSeats; ++s)
    for (int r = 0; r < summary.runs; ++r)
      add_row(experiment, phase, agent_labels[s], r,
              summary.per_run_wins[s][r], summary.mean_wins[s],
              summary.std_wins[s], summary.run_seeds[r]);
}

void ResultsTable::add_row(const std::string& experiment,
                           const std::string& phase, const std::string& agent,
                           int run, int wins, double mean, double stddev,
                           uint64_t seed) {
  rows_.push_back(Row{experiment, phase, agent, run, wins, mean, stddev, seed});
}

std::string ResultsTable::csv() const {
  std::string out = "experiment,phase,agent,run,wins,mean,std,seed\n";
  for (const Row& r : rows_) {
    out += r.experiment;
    out += ',';
    out += r.phase;
    out += ',';
    out += r.agent;
    out += ',';
    out += std::to_string(r.run);
    out += ',';
    out += std::to_string(r.wins);
    out += ',';
    out += format_double(r.mean);
    out += ',';
    out += format_double(r.stddev);
    out += ',';
    out += std::to_string(r.seed);
    out += '\n';
  }
  return out;
}

void ResultsTable::write(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("results: cannot write " + path);
  out << csv();
  if (!out) throw std::runtime_error("results: write failed: " + path);
}

nlohmann::json move_to_json(const Move& move) {
  switch (move.kind) {
    case Move::Kind::Pass:
      return {{"kind", "pass"}};
    case Move::Kind::JokersAlone:
      return {{"kind", "jokers"}, {"count", move.copies}};
    case Move::Kind::Discard:
      return {{"kind", "discard"},
              {"face", move.face},
              {"copies", move.copies},
              {"jokers", move.jokers}};
  }
  throw std::logic_error("move_to_json: unknown kind");
}

Move move_from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "pass") return Move::pass();
  if (kind == "jokers")
    return Move::jokers_alone(j.at("count").get<uint8_t>());
  if (kind == "discard")
    return Move::discard(j.at("face").get<uint8_t>(),
                         j.at("copies").get<uint8_t>(),
                         j.at("jokers").get<uint8_t>());
  throw std::runtime_error("move_from_json: unknown kind " + kind);
}

std::vector<int> board_values(const BoardGroup& board) {
  std::vector<int> values;
  for (int i = 0; i < board.copies; ++i) values.push_back(board.face);
  for (int i = 0; i < board.jokers; ++i) values.push_back(kJokerValue);
  return values;
}

TranscriptWriter::TranscriptWriter(const std::string& path) : out_(path) {
  if (!out_)
    throw std::runtime_error("transcript: cannot write " + path);
}

void TranscriptWriter::on_step(const MatchStepInfo& info) {
  std::vector<double> rewards(kNumSeats, 0.0);
  rewards[info.seat] = info.reward;
  const nlohmann::json j{{"seed", info.match_seed},
                         {"match_index", info.match_index},
                         {"step", info.step},
                         {"seat", info.seat},
                         {"move", move_to_json(info.move)},
                         {"board_after", board_values(info.board_after)},
                         {"rewards", rewards}};
  out_ << j.dump() << '\n';
}

namespace {

struct ReplayMatch {
  uint64_t seed = 0;
  int match_index = -1;
  MatchState state;
  int next_step = 0;
  bool open = false;
};

void finish_replay_match(ReplayMatch& m, std::vector<int>& positions) {
  positions = m.state.over() ? m.state.finished_order
                             : forfeit_positions(m.state);
  m.open = false;
}

}  // namespace

ReplayStats replay_verify(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("replay: cannot open " + path);

  ReplayStats stats;
  ReplayMatch current;
  std::vector<int> prev_positions;
  std::string line;
  int line_no = 0;

  auto fail = [&](const std::string& why) {
    throw std::runtime_error("replay: " + path + ":" +
                             std::to_string(line_no) + ": " + why);
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      fail(std::string("bad JSON: ") + e.what());
    }
    const uint64_t seed = j.at("seed").get<uint64_t>();
    const int match_index = j.at("match_index").get<int>();

    if (!current.open || seed != current.seed ||
        match_index != current.match_index) {
      if (current.open) finish_replay_match(current, prev_positions);
      if (match_index == 0) prev_positions.clear();  // new series
      Rng rng(seed);
      current.seed = seed;
      current.match_index = match_index;
      current.state = new_match(rng, prev_positions);
      current.next_step = 0;
      current.open = true;
      ++stats.matches;
    }

    if (j.at("step").get<int>() != current.next_step) fail("step out of order");
    const int seat = j.at("seat").get<int>();
    if (seat != current.state.turn)
      fail("seat " + std::to_string(seat) + " acted but engine expects seat " +
           std::to_string(current.state.turn));

    const Move move = move_from_json(j.at("move"));
    const bool no_finisher_yet = current.state.finished_order.empty();
    try {
      apply_move(current.state, seat, move);
    } catch (const std::exception& e) {
      fail(std::string("illegal recorded move: ") + e.what());
    }
    const bool won_now = no_finisher_yet &&
                         !current.state.finished_order.empty() &&
                         current.state.finished_order[0] == seat;
    const double expect_reward = won_now ? 1.0 : -0.01;

    const std::vector<int> board =
        j.at("board_after").get<std::vector<int>>();
    if (board != board_values(current.state.board)) fail("board mismatch");
    const std::vector<double> rewards =
        j.at("rewards").get<std::vector<double>>();
    if (rewards.size() != kNumSeats) fail("rewards must have four entries");
    for (int s = 0; s < kNumSeats; ++s) {
      const double want = s == seat ? expect_reward : 0.0;
      if (rewards[s] != want) fail("reward mismatch");
    }

    ++current.next_step;
    ++stats.steps;
  }
  if (current.open) finish_replay_match(current, prev_positions);
  return stats;
}

}  // namespace chefshat
