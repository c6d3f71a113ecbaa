#include "hiper/cli/dispatch.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "hiper/cli/reports.hpp"
#include "hiper/cli/run_config.hpp"
#include "hiper/core/trajectory_io.hpp"
#include "hiper/parser/parser.hpp"
#include "hiper/policy/checkpoint.hpp"
#include "hiper/policy/policy.hpp"
#include "hiper/trainer/trainer.hpp"

namespace hiper {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::string out_dir = ".";
  std::string config_path;
  std::optional<std::uint64_t> seed;
};

struct Context {
  const Globals& globals;
  std::ostream& out;
  std::ostream& err;

  RunConfig config() const {
    RunConfig cfg = globals.config_path.empty() ? RunConfig{} : load_config(globals.config_path);
    if (globals.seed) cfg.ppo.seed = *globals.seed;
    cfg.out_dir = globals.out_dir;
    return cfg;
  }

  fs::path path(const std::string& name) const {
    fs::create_directories(globals.out_dir);
    return fs::path(globals.out_dir) / name;
  }

  std::ofstream open(const std::string& name) const {
    const fs::path p = path(name);
    std::ofstream f(p);
    if (!f) throw std::runtime_error("cannot write " + p.string());
    return f;
  }

  void write_json(const std::string& name, const json& j) const { open(name) << j.dump(2) << '\n'; }
};

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open '" + path + "'");
  return in;
}

std::unique_ptr<EnvModel> env_for(const RunConfig& cfg) {
  return make_env(cfg.env.name, cfg.env.length, cfg.env.horizon);
}

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

// ---- train / train-flat ----

template <typename Result>
json train_summary(const RunConfig& cfg, const Result& r, const std::string& trainer) {
  json j = {{"trainer", trainer},
            {"env", cfg.env.name},
            {"env.L", cfg.env.length},
            {"env.H", cfg.env.horizon},
            {"seed", cfg.ppo.seed},
            {"iterations", r.metrics.size()},
            {"first_success_iter",
             r.first_success_iter ? json(*r.first_success_iter) : json(nullptr)}};
  if (!r.metrics.empty()) {
    j["final_success"] = r.metrics.back().success;
    j["final_mean_return"] = r.metrics.back().mean_return;
  }
  return j;
}

int run_train(const Context& ctx, bool flat) {
  const RunConfig cfg = ctx.config();
  const auto env = env_for(cfg);
  std::ofstream metrics = ctx.open("metrics.csv");
  write_metrics_header(metrics);
  TrainHooks hooks;
  hooks.on_iteration = [&](const MetricsRow& row) {
    write_metrics_row(metrics, row);
    metrics.flush();
  };
  if (cfg.ppo.checkpoint_every > 0) {
    fs::create_directories(ctx.path("checkpoints"));
    hooks.on_checkpoint = [&](int iter, const PolicyParams& params) {
      save_policy_file((ctx.path("checkpoints") / ("policy_" + std::to_string(iter) + ".txt")).string(),
                       params);
    };
  }
  json summary;
  if (flat) {
    const FlatTrainResult r = train_flat_baseline(cfg.ppo, *env, cfg.env.n_options, hooks);
    save_policy_file(ctx.path("policy.txt").string(), r.params);
    save_flat_critic_file(ctx.path("flat_critic.txt").string(), r.critic);
    summary = train_summary(cfg, r, "flat");
  } else {
    const TrainResult r = train(cfg.ppo, *env, cfg.env.n_options, hooks);
    save_policy_file(ctx.path("policy.txt").string(), r.params);
    save_critic_file(ctx.path("critic.txt").string(), r.critic);
    summary = train_summary(cfg, r, "hierarchical");
  }
  ctx.write_json("summary.json", summary);
  ctx.out << (flat ? "train-flat" : "train") << ": " << summary["iterations"].get<int>()
          << " iterations, first success iteration "
          << (summary["first_success_iter"].is_null() ? std::string("none")
                                                      : summary["first_success_iter"].dump())
          << "\n";
  return kExitOk;
}

// ---- rollout / eval ----

PolicyParams policy_or_uniform(const std::string& path, const EnvModel& env, int n_options) {
  if (path.empty()) return PolicyParams(policy_shape_for(env, n_options));
  PolicyParams p = load_policy_file(path);
  const PolicyShape want = policy_shape_for(env, n_options);
  if (p.shape().states != want.states || p.shape().actions != want.actions) {
    throw UsageError("policy '" + path + "' does not match the configured environment");
  }
  return p;
}

int run_rollout(const Context& ctx, const std::string& policy_path, int episodes, bool greedy) {
  const RunConfig cfg = ctx.config();
  const auto env = env_for(cfg);
  const PolicyParams params = policy_or_uniform(policy_path, *env, cfg.env.n_options);
  const CounterRng rng(cfg.ppo.seed);
  std::vector<Trajectory> trajs;
  for (int e = 0; e < episodes; ++e) {
    trajs.push_back(greedy ? greedy_rollout(*env, params, env->horizon(), cfg.ppo.c_keep)
                           : rollout(*env, params, env->horizon(), rng, e, cfg.ppo.c_keep));
  }
  std::ofstream f = ctx.open("trajectories.jsonl");
  write_jsonl(f, trajs);
  ctx.out << "rollout: wrote " << trajs.size() << " episodes\n";
  return kExitOk;
}

int run_eval(const Context& ctx, const std::string& policy_path, int episodes,
             const std::string& mode) {
  const RunConfig cfg = ctx.config();
  const auto env = env_for(cfg);
  const PolicyParams params = policy_or_uniform(policy_path, *env, cfg.env.n_options);
  const EvalMode m = mode == "sample" ? EvalMode::kSample : EvalMode::kGreedy;
  const EvalResult r = evaluate(params, *env, episodes, m, cfg.ppo.seed);
  const json j = {{"mode", mode},
                  {"episodes", r.episodes},
                  {"success_rate", r.success_rate},
                  {"mean_return", r.mean_return},
                  {"mean_segments", r.stats.mean_segments},
                  {"mean_seg_len", r.stats.mean_seg_len},
                  {"switch_rate", r.stats.switch_rate},
                  {"mean_length", r.stats.mean_length}};
  ctx.write_json("eval.json", j);
  ctx.out << "eval (" << mode << "): success " << r.success_rate << ", mean return "
          << r.mean_return << "\n";
  return kExitOk;
}

// ---- advantages ----

int run_advantages(const Context& ctx, const std::string& traj_path, const std::string& critic_path,
                   const std::string& flat_path, const std::string& policy_path) {
  const RunConfig cfg = ctx.config();
  std::ifstream in = open_input(traj_path);
  const std::vector<Trajectory> trajs = read_jsonl(in);
  const ValueTables tables = load_critic_file(critic_path);
  std::optional<FlatValueTable> flat;
  if (!flat_path.empty()) flat = load_flat_critic_file(flat_path);
  std::optional<PolicyParams> params;
  if (!policy_path.empty()) params = load_policy_file(policy_path);
  const PolicyParams fallback(PolicyShape{tables.num_states(), tables.num_subgoals(), 1});
  for (const Trajectory& traj : trajs) {
    for (const TurnRecord& turn : traj.turns) {
      if (turn.t > 0 && !turn.behavior && !params) {
        throw UsageError("trajectories carry no behavior records; pass --policy");
      }
    }
  }
  const std::vector<HierarchicalAdvantages> adv =
      estimate_batch(trajs, tables, params ? *params : fallback, cfg.ppo.gae,
                     flat ? &*flat : nullptr);
  std::ofstream f = ctx.open("advantages.jsonl");
  long rows = 0;
  for (std::size_t e = 0; e < trajs.size(); ++e) {
    for (const TurnRecord& turn : trajs[e].turns) {
      json j = {{"episode", e},
                {"t", turn.t},
                {"A_low", adv[e].low[turn.t]},
                {"A_switch", opt_json(adv[e].switch_at(turn.t))},
                {"A_high", opt_json(adv[e].high_at(turn.t))},
                {"A_flat", adv[e].flat ? json((*adv[e].flat)[turn.t]) : json(nullptr)}};
      f << j.dump() << '\n';
      ++rows;
    }
  }
  ctx.out << "advantages: " << rows << " turns from " << trajs.size() << " episodes\n";
  return kExitOk;
}

// ---- parse ----

int run_parse(const Context& ctx, const std::vector<std::string>& inputs) {
  Vocabulary subgoals, actions;
  std::vector<Trajectory> trajs;
  json per_violation = json::object();
  long turns = 0, malformed = 0;
  for (const std::string& path : inputs) {
    std::ifstream in = open_input(path);
    std::vector<LogEpisode> episodes;
    try {
      episodes = read_transcript(in);
    } catch (const ParseFailure& e) {
      throw UsageError(path + ": " + e.what());
    }
    for (const LogEpisode& ep : episodes) {
      IngestedEpisode ing;
      try {
        ing = ingest_log(ep, subgoals, actions);
      } catch (const ParseFailure& e) {
        throw UsageError(path + ": " + e.what());
      }
      for (const FormatVerdict& v : ing.verdicts) {
        ++turns;
        if (!v.valid) ++malformed;
        for (Violation x : v.violations) {
          per_violation[to_string(x)] = per_violation.value(to_string(x), 0) + 1;
        }
      }
      trajs.push_back(std::move(ing.trajectory));
    }
  }
  std::ofstream f = ctx.open("trajectories.jsonl");
  write_jsonl(f, trajs);
  ctx.write_json("vocabulary.json", {{"subgoals", subgoals.names()}, {"actions", actions.names()}});
  ctx.write_json("parse_report.json", {{"episodes", trajs.size()},
                                       {"turns", turns},
                                       {"malformed_turns", malformed},
                                       {"violations", per_violation}});
  ctx.out << "parse: " << trajs.size() << " episodes, " << turns << " turns, " << malformed
          << " malformed\n";
  return kExitOk;
}

// ---- verify ----

struct VerifyOptions {
  std::string mode;
  int trials = 10000;
  int samples = 0;  // 0: mode default
  int configs = 100;
  int bootstrap = 1000;
  int max_epochs = 500;
  double lr = 0.1;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  bool learned_bias = false;
};

int run_verify(const Context& ctx, const VerifyOptions& o) {
  const RunConfig cfg = ctx.config();
  const std::uint64_t seed = cfg.ppo.seed;
  json report;
  std::string line;
  bool passed = false;
  if (o.mode == "telescope") {
    const TelescopeReport r = telescope_check(o.trials, seed);
    report = to_json(r), line = summary(r), passed = r.passed();
  } else if (o.mode == "unbiased") {
    const UnbiasednessReport r =
        unbiasedness_check(o.samples > 0 ? o.samples : 200000, seed, o.learned_bias);
    report = to_json(r), line = summary(r), passed = r.passed();
  } else if (o.mode == "variance") {
    const VarianceCheckReport r = variance_check(o.samples > 0 ? o.samples : 10000, o.seeds,
                                                 o.bootstrap);
    report = to_json(r), line = summary(r), passed = r.passed();
  } else if (o.mode == "gradcheck") {
    const GradcheckReport r = gradcheck(o.configs, seed);
    report = to_json(r), line = summary(r), passed = r.passed();
  } else {
    const CriticFixpointReport r = critic_fixpoint_check(seed, o.max_epochs, o.lr);
    report = to_json(r), line = summary(r), passed = r.passed();
  }
  report["seed"] = seed;
  ctx.write_json("verify_" + o.mode + ".json", report);
  ctx.out << line << "\n";
  return passed ? kExitOk : kExitFailed;
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hierarchical advantage estimation testbed", "hiper"};
  app.require_subcommand(1, 1);
  app.fallthrough();
  Globals g;
  std::uint64_t seed = 0;
  app.add_option("--out", g.out_dir, "Output directory")->capture_default_str();
  app.add_option("--config", g.config_path, "Config file of key = value lines")
      ->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", seed, "Seed for every random stream");

  auto* train_cmd = app.add_subcommand("train", "Train the hierarchical PPO agent");
  auto* flat_cmd = app.add_subcommand("train-flat", "Train the flat PPO baseline");

  std::string policy_path;
  int episodes = 10;
  bool greedy = false;
  auto* rollout_cmd = app.add_subcommand("rollout", "Sample episodes to JSON-Lines");
  rollout_cmd->add_option("--policy", policy_path, "Policy checkpoint (default uniform)");
  rollout_cmd->add_option("--episodes", episodes, "Number of episodes")->check(CLI::PositiveNumber);
  rollout_cmd->add_flag("--greedy", greedy, "Argmax actions");

  std::string traj_path, critic_path, flat_path;
  auto* adv_cmd = app.add_subcommand("advantages", "Per-turn advantages for logged episodes");
  adv_cmd->add_option("--trajectories", traj_path, "Trajectory JSON-Lines")->required();
  adv_cmd->add_option("--critic", critic_path, "Critic checkpoint")->required();
  adv_cmd->add_option("--flat-critic", flat_path, "Flat critic checkpoint");
  adv_cmd->add_option("--policy", policy_path, "Policy for switch probabilities");

  std::vector<std::string> inputs;
  auto* parse_cmd = app.add_subcommand("parse", "Convert agent transcripts to JSON-Lines");
  parse_cmd->add_option("inputs", inputs, "Transcript files")->required()->check(CLI::ExistingFile);

  VerifyOptions vo;
  auto* verify_cmd = app.add_subcommand("verify", "Run a verification harness");
  verify_cmd->add_option("mode", vo.mode, "telescope|unbiased|variance|gradcheck|critic-fixpoint")
      ->required()
      ->check(CLI::IsMember({"telescope", "unbiased", "variance", "gradcheck", "critic-fixpoint"}));
  verify_cmd->add_option("--trials", vo.trials, "Random trajectories (telescope)")
      ->check(CLI::PositiveNumber);
  verify_cmd->add_option("--samples", vo.samples, "Monte Carlo samples (unbiased, variance)")
      ->check(CLI::PositiveNumber);
  verify_cmd->add_option("--configs", vo.configs, "Random configurations (gradcheck)")
      ->check(CLI::PositiveNumber);
  verify_cmd->add_option("--bootstrap", vo.bootstrap, "Bootstrap resamples (variance)")
      ->check(CLI::PositiveNumber);
  verify_cmd->add_option("--seeds", vo.seeds, "Policy seeds (variance)")->delimiter(',');
  verify_cmd->add_option("--max-epochs", vo.max_epochs, "Epoch budget (critic-fixpoint)")
      ->check(CLI::PositiveNumber);
  verify_cmd->add_option("--lr", vo.lr, "Critic learning rate (critic-fixpoint)")
      ->check(CLI::PositiveNumber);
  verify_cmd->add_flag("--learned-bias", vo.learned_bias,
                       "Also measure bias with a fitted critic (unbiased)");

  std::string mode = "greedy";
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a policy checkpoint");
  eval_cmd->add_option("--policy", policy_path, "Policy checkpoint (default uniform)");
  eval_cmd->add_option("--episodes", episodes, "Number of episodes")->check(CLI::PositiveNumber);
  eval_cmd->add_option("--mode", mode, "greedy or sample")->check(CLI::IsMember({"greedy", "sample"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }
  if (*seed_opt) g.seed = seed;

  const Context ctx{g, out, err};
  try {
    if (*train_cmd) return run_train(ctx, false);
    if (*flat_cmd) return run_train(ctx, true);
    if (*rollout_cmd) return run_rollout(ctx, policy_path, episodes, greedy);
    if (*adv_cmd) return run_advantages(ctx, traj_path, critic_path, flat_path, policy_path);
    if (*parse_cmd) return run_parse(ctx, inputs);
    if (*verify_cmd) return run_verify(ctx, vo);
    if (*eval_cmd) return run_eval(ctx, policy_path, episodes, mode);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const FormatError& e) {
    err << "input error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const TrainingDiverged& e) {
    err << "training diverged: " << e.what() << "\n";
    return kExitFailed;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailed;
  }
  return kExitUsage;
}

}  // namespace hiper
