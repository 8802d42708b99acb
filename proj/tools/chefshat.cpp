// Command-line front end: training, self-play, tournament and evaluation
// runners plus transcript replay verification.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"

#include "chefshat/agents.hpp"
#include "chefshat/arena.hpp"
#include "chefshat/telemetry.hpp"

namespace fs = std::filesystem;
using namespace chefshat;

namespace {

struct CommonOpts {
  std::string agent_kind = "dql";
  int games = -1;
  int generations = -1;
  int val_games = -1;
  int eval_runs = -1;
  int eval_games = -1;
  uint64_t seed = 1;
  std::string config_path;
  std::string out_dir = "out";
  std::vector<std::string> models;
  bool no_telemetry = false;
};

void add_common_flags(CLI::App* cmd, CommonOpts& o, bool with_agent) {
  if (with_agent)
    cmd->add_option("--agent", o.agent_kind, "learner kind: dql | a2c | ppo");
  cmd->add_option("--games", o.games, "games in the training block");
  cmd->add_option("--eval-runs", o.eval_runs, "evaluation runs");
  cmd->add_option("--eval-games", o.eval_games, "games per evaluation run");
  cmd->add_option("--seed", o.seed, "master seed");
  cmd->add_option("--config", o.config_path, "JSON config file");
  cmd->add_option("--out", o.out_dir, "output directory");
  cmd->add_flag("--no-telemetry", o.no_telemetry,
                "skip qtrace.csv and transcripts.jsonl");
}

struct Configs {
  AgentConfig agent;
  ExperimentConfig experiment;
};

Configs resolve_configs(const CommonOpts& o, const std::string& protocol) {
  Configs c;
  if (!o.config_path.empty()) {
    std::ifstream in(o.config_path);
    if (!in) throw std::runtime_error("cannot open config " + o.config_path);
    nlohmann::json j;
    in >> j;
    if (j.contains("agent")) c.agent = agent_config_from_json(j.at("agent"));
    if (j.contains("experiment"))
      c.experiment = experiment_config_from_json(j.at("experiment"));
  }
  c.experiment.protocol = protocol;
  c.agent.kind = o.agent_kind;
  if (c.agent.kind != "dql" && c.agent.kind != "a2c" && c.agent.kind != "ppo")
    throw std::runtime_error("unknown agent kind: " + c.agent.kind);
  c.experiment.seed = o.seed;
  if (o.games >= 0) {
    c.experiment.train_games = o.games;
    c.experiment.games_per_generation = o.games;
  }
  if (o.generations > 0) c.experiment.generations = o.generations;
  if (o.val_games > 0) c.experiment.validation_games = o.val_games;
  if (o.eval_runs > 0) c.experiment.eval_runs = o.eval_runs;
  if (o.eval_games > 0) c.experiment.eval_games = o.eval_games;
  if (c.agent.seed == 0) c.agent.seed = split_seed(c.experiment.seed, 0xA6E27);
  return c;
}

struct Sinks {
  std::unique_ptr<TranscriptWriter> transcript;
  QtraceCollector qtrace;
  MatchObserver* observer = nullptr;

  // fans out to both collectors
  struct Tee : MatchObserver {
    std::vector<MatchObserver*> targets;
    void on_match_begin(uint64_t seed, int index) override {
      for (auto* t : targets) t->on_match_begin(seed, index);
    }
    void on_step(const MatchStepInfo& info) override {
      for (auto* t : targets) t->on_step(info);
    }
    void on_match_end(const MatchRecord& rec) override {
      for (auto* t : targets) t->on_match_end(rec);
    }
  } tee;
};

Sinks make_sinks(const CommonOpts& o) {
  Sinks s;
  if (o.no_telemetry) return s;
  fs::create_directories(o.out_dir);
  s.transcript = std::make_unique<TranscriptWriter>(
      (fs::path(o.out_dir) / "transcripts.jsonl").string());
  s.tee.targets = {s.transcript.get(), &s.qtrace};
  s.observer = &s.tee;
  return s;
}

void finish_outputs(const CommonOpts& o, const Sinks& sinks,
                    const ResultsTable& results) {
  fs::create_directories(o.out_dir);
  results.write((fs::path(o.out_dir) / "results.csv").string());
  if (!o.no_telemetry)
    export_qtrace(sinks.qtrace.logs(),
                  (fs::path(o.out_dir) / "qtrace.csv").string());
}

void print_summary(const std::array<std::string, kNumSeats>& labels,
                   const EvaluationSummary& s) {
  for (int i = 0; i < kNumSeats; ++i)
    std::cout << "  " << labels[i] << ": " << format_double(s.mean_wins[i])
              << " +- " << format_double(s.std_wins[i]) << " wins per "
              << s.games << " games\n";
}

int cmd_train_vs_random(const CommonOpts& o) {
  const Configs c = resolve_configs(o, "vs_random");
  Sinks sinks = make_sinks(o);
  std::cout << "training " << c.agent.kind << " vs 3 random agents for "
            << c.experiment.train_games << " games (seed "
            << c.experiment.seed << ")\n";
  VsRandomResult result =
      run_vs_random(c.agent, c.experiment, sinks.observer, sinks.observer);
  const std::array<std::string, kNumSeats> labels = {c.agent.kind, "random1",
                                                     "random2", "random3"};
  ResultsTable results;
  results.add_summary("vs_random", "eval", labels, result.summary);
  finish_outputs(o, sinks, results);
  result.learner->save(
      (fs::path(o.out_dir) / (c.agent.kind + ".agent.json")).string());
  print_summary(labels, result.summary);
  return 0;
}

int cmd_self_play(const CommonOpts& o) {
  const Configs c = resolve_configs(o, "vs_myself");
  Sinks sinks = make_sinks(o);
  std::cout << "self-play: " << c.experiment.generations << " generations x "
            << c.experiment.games_per_generation << " games of 4x "
            << c.agent.kind << " (seed " << c.experiment.seed << ")\n";
  GenerationPool pool = run_self_play(c.agent, c.experiment, sinks.observer);
  for (const auto& snap : pool.snapshots) {
    const std::string name = "gen" + std::to_string(snap.generation + 1) +
                             (snap.rank == 0 ? "_best" : "_second") +
                             ".agent.json";
    snap.agent->save((fs::path(o.out_dir) / name).string());
  }

  // head-to-head: first, middle and final generation bests plus a random
  const int last = c.experiment.generations - 1;
  const int mid = last / 2;
  auto first_best = pool.best_of(0)->agent->clone();
  auto mid_best = pool.best_of(mid)->agent->clone();
  auto last_best = pool.best_of(last)->agent->clone();
  AgentConfig random_cfg;
  random_cfg.kind = "random";
  auto random_agent = make_agent(random_cfg);
  const std::array<Agent*, kNumSeats> table = {
      first_best.get(), mid_best.get(), last_best.get(), random_agent.get()};
  EvaluationSummary summary =
      evaluate(table, c.experiment.eval_runs, c.experiment.eval_games,
               split_seed(c.experiment.seed, 0xEEE), sinks.observer);
  const std::array<std::string, kNumSeats> labels = {
      "first_gen1", "mid_gen" + std::to_string(mid + 1),
      "final_gen" + std::to_string(last + 1), "random"};
  ResultsTable results;
  results.add_summary("vs_myself", "head_to_head", labels, summary);
  finish_outputs(o, sinks, results);
  print_summary(labels, summary);
  return 0;
}

int cmd_tournament(const CommonOpts& o) {
  if (o.models.size() != 3)
    throw std::runtime_error(
        "tournament needs exactly three --model files (dql, a2c, ppo)");
  const Configs c = resolve_configs(o, "vs_others");
  Sinks sinks = make_sinks(o);
  std::unique_ptr<Agent> dql, a2c, ppo;
  for (const std::string& path : o.models) {
    std::unique_ptr<Agent> agent = load_agent(path);
    if (agent->kind() == "dql" && !dql)
      dql = std::move(agent);
    else if (agent->kind() == "a2c" && !a2c)
      a2c = std::move(agent);
    else if (agent->kind() == "ppo" && !ppo)
      ppo = std::move(agent);
    else
      throw std::runtime_error("tournament: duplicate or unusable kind in " +
                               path);
  }
  if (!dql || !a2c || !ppo)
    throw std::runtime_error("tournament needs one dql, one a2c and one ppo");
  TournamentResult result = run_vs_others(*dql, *a2c, *ppo, c.experiment,
                                          sinks.observer, sinks.observer);
  const std::array<std::string, kNumSeats> labels = {"dql", "a2c", "ppo",
                                                     "random"};
  ResultsTable results;
  results.add_summary("vs_others", "before", labels, result.before);
  results.add_summary("vs_others", "after", labels, result.after);
  finish_outputs(o, sinks, results);
  dql->save((fs::path(o.out_dir) / "dql_after.agent.json").string());
  a2c->save((fs::path(o.out_dir) / "a2c_after.agent.json").string());
  ppo->save((fs::path(o.out_dir) / "ppo_after.agent.json").string());
  std::cout << "before training:\n";
  print_summary(labels, result.before);
  std::cout << "after training:\n";
  print_summary(labels, result.after);
  return 0;
}

int cmd_evaluate(const CommonOpts& o) {
  if (o.models.empty() || o.models.size() > kNumSeats)
    throw std::runtime_error("evaluate needs 1..4 --model files");
  ExperimentConfig exp;
  exp.seed = o.seed;
  if (o.eval_runs > 0) exp.eval_runs = o.eval_runs;
  if (o.eval_games > 0) exp.eval_games = o.eval_games;
  Sinks sinks = make_sinks(o);

  std::vector<std::unique_ptr<Agent>> agents;
  std::array<std::string, kNumSeats> labels;
  for (const std::string& path : o.models)
    agents.push_back(load_agent(path));
  AgentConfig random_cfg;
  random_cfg.kind = "random";
  while (agents.size() < kNumSeats) agents.push_back(make_agent(random_cfg));
  std::array<Agent*, kNumSeats> table{};
  for (int s = 0; s < kNumSeats; ++s) {
    table[s] = agents[s].get();
    labels[s] = agents[s]->kind() + "_s" + std::to_string(s);
  }
  EvaluationSummary summary = evaluate(table, exp.eval_runs, exp.eval_games,
                                       split_seed(exp.seed, 0xE0A1),
                                       sinks.observer);
  ResultsTable results;
  results.add_summary("evaluate", "eval", labels, summary);
  finish_outputs(o, sinks, results);
  print_summary(labels, summary);
  return 0;
}

int cmd_replay(const std::string& path) {
  const ReplayStats stats = replay_verify(path);
  std::cout << "replay ok: " << stats.matches << " matches, " << stats.steps
            << " steps verified\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Chef's Hat card game: masked-action RL training harness"};
  app.require_subcommand(1);

  CommonOpts train_opts, selfplay_opts, tournament_opts, eval_opts;
  std::string replay_path, catalog_out;

  CLI::App* train = app.add_subcommand(
      "train-vs-random", "train one learner against three random agents");
  add_common_flags(train, train_opts, true);

  CLI::App* selfplay =
      app.add_subcommand("self-play", "generational self-play routine");
  add_common_flags(selfplay, selfplay_opts, true);
  selfplay->add_option("--generations", selfplay_opts.generations,
                       "self-play generations");
  selfplay->add_option("--val-games", selfplay_opts.val_games,
                       "validation games per generation");

  CLI::App* tournament = app.add_subcommand(
      "tournament", "dql vs a2c vs ppo vs random, before/after joint training");
  add_common_flags(tournament, tournament_opts, false);
  tournament->add_option("--model", tournament_opts.models,
                         "agent snapshot files (three)");

  CLI::App* evaluate_cmd =
      app.add_subcommand("evaluate", "frozen evaluation of saved agents");
  add_common_flags(evaluate_cmd, eval_opts, false);
  evaluate_cmd->add_option("--model", eval_opts.models,
                           "agent snapshot files (1..4; random fills the rest)");

  CLI::App* replay =
      app.add_subcommand("replay", "verify a transcripts.jsonl bit-exactly");
  replay->add_option("transcript", replay_path, "transcript file")->required();

  CLI::App* catalog =
      app.add_subcommand("catalog", "emit the action catalog CSV");
  catalog->add_option("--out", catalog_out, "output file (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) return cmd_train_vs_random(train_opts);
    if (selfplay->parsed()) return cmd_self_play(selfplay_opts);
    if (tournament->parsed()) return cmd_tournament(tournament_opts);
    if (evaluate_cmd->parsed()) return cmd_evaluate(eval_opts);
    if (replay->parsed()) return cmd_replay(replay_path);
    if (catalog->parsed()) {
      if (catalog_out.empty()) {
        std::cout << catalog_csv();
      } else {
        std::ofstream out(catalog_out);
        if (!out) throw std::runtime_error("cannot write " + catalog_out);
        out << catalog_csv();
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
