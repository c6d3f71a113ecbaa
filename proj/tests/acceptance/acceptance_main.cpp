// Acceptance gate: one PASS/FAIL line per criterion. Exit status 1 when any
// criterion fails. Training series go to the directory given as argv[1]
// (default ./acceptance_artifacts).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "hiper/cli/reports.hpp"
#include "hiper/core/segments.hpp"
#include "hiper/oracle/checks.hpp"
#include "hiper/oracle/gradient.hpp"
#include "hiper/parser/parser.hpp"
#include "hiper/policy/policy.hpp"
#include "hiper/trainer/trainer.hpp"

namespace hiper {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  bool passed = false;
  std::string detail;
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

class Gate {
 public:
  // Runs `body`, times it and prints the verdict; a criterion that exceeds its
  // runtime budget fails.
  void run(int id, const std::string& title, double budget_s, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = body();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > budget_s) {
      o.passed = false;
      o.detail += "; over the " + fmt("%.0f", budget_s) + " s budget";
    }
    std::printf("criterion %2d %s  %s: %s (%.2f s)\n", id, o.passed ? "PASS" : "FAIL", title.c_str(),
                o.detail.c_str(), secs);
    std::fflush(stdout);
    all_ &= o.passed;
  }
  bool all_passed() const { return all_; }

 private:
  bool all_ = true;
};

constexpr std::uint64_t kSeed = 1;

// ---- criterion 10 ----

std::vector<LogEpisode> read_episode_file(const std::string& name) {
  std::ifstream in(std::string(HIPER_TEST_DATA) + "/" + name);
  if (!in) throw std::runtime_error("cannot open " + name);
  return read_transcript(in);
}

std::string replace_block(const std::string& text, const std::string& tag, const std::string& body) {
  const std::string open = "<" + tag + ">", close = "</" + tag + ">";
  const auto b = text.find(open);
  const auto e = text.find(close);
  return text.substr(0, b + open.size()) + body + text.substr(e);
}

std::string remove_block(const std::string& text, const std::string& tag) {
  const std::string close = "</" + tag + ">";
  const auto b = text.find("<" + tag + ">");
  const auto e = text.find(close) + close.size();
  return text.substr(0, b) + text.substr(e);
}

std::string mutate(const std::string& text, Violation v, const std::string& subgoal) {
  switch (v) {
    case Violation::kMissingBlock: return remove_block(text, "switch");
    case Violation::kWrongOrder: {
      const auto a = text.find("<action>");
      return text.substr(a) + "\n" + text.substr(0, a);
    }
    case Violation::kBadSwitchValue: return replace_block(text, "switch", "PERHAPS");
    case Violation::kKeepAlteredSubgoal:
      return replace_block(replace_block(text, "switch", "KEEP"), "subgoal", subgoal + " again");
  }
  return text;
}

Outcome parser_conformance() {
  struct Case {
    const char* file;
    std::vector<int> boundaries;
  };
  const std::vector<Case> cases{{"cup_episode.txt", {0, 4, 6, 10}},
                                {"knife_episode.txt", {0, 3, 5, 7}}};
  int violations = 0, round_trip_failures = 0, mutated = 0, penalty_failures = 0;
  bool structure = true;
  for (const Case& c : cases) {
    const std::vector<LogEpisode> eps = read_episode_file(c.file);
    if (eps.size() != 1) return {false, std::string(c.file) + ": expected one episode"};
    const LogEpisode& ep = eps[0];
    std::vector<int> b;
    std::vector<std::string> subgoals;
    for (std::size_t t = 0; t < ep.turns.size(); ++t) {
      const ParseResult r = parse_blocks(ep.turns[t].text);
      violations += static_cast<int>(r.verdict.violations.size());
      if (!(parse_blocks(render(r.decision)).decision == r.decision)) ++round_trip_failures;
      if (r.decision.q == Switch::kSwitch) b.push_back(static_cast<int>(t));
      subgoals.push_back(r.decision.subgoal_text);
    }
    b.push_back(static_cast<int>(ep.turns.size()));
    structure &= b == c.boundaries;

    // Every violation class at every turn: the mutated turn is flagged with
    // its class and pays exactly the format penalty.
    for (std::size_t t = 0; t < ep.turns.size(); ++t) {
      for (Violation v : {Violation::kMissingBlock, Violation::kWrongOrder, Violation::kBadSwitchValue,
                          Violation::kKeepAlteredSubgoal}) {
        const std::string text = mutate(ep.turns[t].text, v, subgoals[t]);
        std::optional<std::string_view> prev;
        if (t > 0) prev = subgoals[t - 1];
        if (v == Violation::kKeepAlteredSubgoal && t == 0) continue;  // no running subgoal yet
        const ParseResult r = parse_blocks(text, prev);
        ++mutated;
        if (!r.verdict.has(v) || r.verdict.penalty != kFormatPenalty) ++penalty_failures;

        LogEpisode m = ep;
        m.turns[t].text = text;
        Vocabulary g, a;
        const IngestedEpisode ing = ingest_log(m, g, a);
        for (std::size_t u = 0; u < ing.verdicts.size(); ++u) {
          const TurnRecord& turn = ing.trajectory.turns[u];
          const double want = ing.verdicts[u].valid ? 0.0 : kFormatPenalty;
          if (std::abs(turn.raw_reward - turn.reward - want) > 1e-12 ||
              turn.malformed == ing.verdicts[u].valid) {
            ++penalty_failures;
          }
        }
        if (ing.verdicts[t].valid) ++penalty_failures;
      }
    }
  }
  const bool ok = violations == 0 && round_trip_failures == 0 && structure && penalty_failures == 0;
  return {ok, std::to_string(violations) + " violations on the logged turns, boundaries " +
                  (structure ? "[0,4,6,10] and [0,3,5,7]" : "MISMATCH") + ", " +
                  std::to_string(mutated) + " mutated turns with " + std::to_string(penalty_failures) +
                  " penalty mismatches"};
}

// ---- criteria 9 and 11 ----

struct TrainingRuns {
  std::vector<TrainResult> hier;
  std::vector<FlatTrainResult> flat;
  std::vector<double> seconds;
};

void write_series(const fs::path& path, const std::vector<MetricsRow>& rows) {
  std::ofstream out(path);
  write_metrics_header(out);
  for (const MetricsRow& r : rows) write_metrics_row(out, r);
}

std::string iter_or_none(const std::optional<int>& it) {
  return it ? std::to_string(*it) : std::string("none");
}

}  // namespace
}  // namespace hiper

int main(int argc, char** argv) {
  using namespace hiper;
  const fs::path artifacts = argc > 1 ? fs::path(argv[1]) : fs::path("acceptance_artifacts");
  fs::create_directories(artifacts);
  Gate gate;

  TelescopeReport tele;
  gate.run(1, "telescoping (low)", 10.0, [&] {
    tele = telescope_check(10000, kSeed, false);
    return Outcome{tele.passed_low(), std::to_string(tele.trials) + " trajectories, " +
                                          std::to_string(tele.low_checked) + " turns, max dev " +
                                          fmt("%.2e", tele.max_dev_low)};
  });
  gate.run(2, "telescoping (high)", 10.0, [&] {
    return Outcome{tele.passed_high(), std::to_string(tele.high_checked) + " segments, max dev " +
                                           fmt("%.2e", tele.max_dev_high)};
  });

  gate.run(3, "switching exactness", 60.0, [&] {
    const FetchChain env(3, 6);
    double worst = 0.0;
    int contexts = 0;
    for (std::uint64_t s = 1; s <= 3; ++s) {
      std::mt19937_64 eng(s);
      const SwitchExactnessReport r =
          switch_exactness_check(env, random_params(eng, policy_shape_for(env, 2)), 1.0);
      worst = std::max(worst, r.max_deviation);
      contexts += r.contexts;
    }
    return Outcome{worst <= 1e-10, "FetchChain(3,6), 3 policies, " + std::to_string(contexts) +
                                       " contexts, max dev " + fmt("%.2e", worst)};
  });

  gate.run(4, "gradient unbiasedness", 300.0, [&] {
    const UnbiasednessReport r = unbiasedness_check(200000, kSeed);
    return Outcome{r.passed(), summary(r)};
  });

  gate.run(5, "variance reduction", 300.0, [&] {
    const VarianceCheckReport r = variance_check(10000, {1, 2, 3}, 1000);
    std::string detail = summary(r);
    for (std::size_t i = 0; i < r.strict.size(); ++i) {
      if (r.strict[i].ci_diff.hi > 0.0) {
        detail += "; t=" + std::to_string(r.strict[i].t) + " ci_hi " + fmt("%.2e", r.strict[i].ci_diff.hi) +
                  " exact gap " + fmt("%.2e", r.exact_flat[i] - r.exact_low[i]);
      }
    }
    return Outcome{r.passed(), detail};
  });

  GradcheckReport grad;
  gate.run(6, "analytic gradients", 60.0, [&] {
    grad = gradcheck(100, kSeed);
    const bool ok = grad.logprob_failures == 0 && grad.loss_failures == 0 && grad.oracle_failures == 0;
    return Outcome{ok, std::to_string(grad.configurations) + " configurations, " +
                           std::to_string(grad.logprob_coords + grad.loss_coords) +
                           " coordinates, max err " +
                           fmt("%.2e", std::max(grad.max_logprob_err, grad.max_loss_err)) +
                           ", oracle FD failures " + std::to_string(grad.oracle_failures)};
  });

  gate.run(7, "critic fixed point", 60.0, [&] {
    const CriticFixpointReport r = critic_fixpoint_check(kSeed);
    return Outcome{r.passed(), summary(r)};
  });

  gate.run(8, "score identity", 60.0, [&] {
    const FetchChain env(3, 6);
    double worst = 0.0;
    for (std::uint64_t s = 1; s <= 3; ++s) {
      std::mt19937_64 eng(s);
      worst = std::max(worst,
                       expected_score(env, random_params(eng, policy_shape_for(env, 2), 2.0), 6).max_abs());
    }
    return Outcome{worst <= 1e-10, "FetchChain(3,6), 3 policies, max |E[score]| " + fmt("%.2e", worst)};
  });

  TrainingRuns runs;
  gate.run(9, "end-to-end training", 1800.0, [&] {
    const FetchChain env(5, 20);
    std::string detail;
    bool ok = true;
    for (std::uint64_t seed : {1, 2, 3}) {
      PPOConfig cfg;
      cfg.seed = seed;
      const auto t0 = std::chrono::steady_clock::now();
      runs.hier.push_back(train(cfg, env, 2));
      runs.seconds.push_back(
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
      runs.flat.push_back(train_flat_baseline(cfg, env, 2));
      const TrainResult& h = runs.hier.back();
      const FlatTrainResult& f = runs.flat.back();
      write_series(artifacts / ("metrics_seed" + std::to_string(seed) + ".csv"), h.metrics);
      write_series(artifacts / ("flat_metrics_seed" + std::to_string(seed) + ".csv"), f.metrics);
      const bool seed_ok = h.first_success_iter.has_value() && runs.seconds.back() < 600.0;
      ok &= seed_ok;
      detail += (detail.empty() ? "" : "; ") + std::string("seed ") + std::to_string(seed) +
                " success>=0.9 at iter " + iter_or_none(h.first_success_iter) + " (flat " +
                iter_or_none(f.first_success_iter) + ")";
    }
    return Outcome{ok, detail};
  });

  gate.run(10, "parser conformance", 1.0, parser_conformance);

  gate.run(11, "switching diagnostics", 1.0, [&] {
    long rows = 0;
    double worst = 0.0;
    bool ok = !runs.hier.empty();
    for (const TrainResult& r : runs.hier) {
      ok &= r.metrics.size() == 300;
      for (const MetricsRow& row : r.metrics) {
        ++rows;
        const double rel = std::abs(row.mean_segments * row.mean_seg_len - row.mean_episode_length) /
                           row.mean_episode_length;
        worst = std::max(worst, rel);
        ok &= row.switch_rate >= 0.0 && row.switch_rate <= 1.0;
      }
    }
    ok &= worst <= 0.01;
    return Outcome{ok, std::to_string(rows) + " metric rows, max rel gap " + fmt("%.2e", worst)};
  });

  std::printf("acceptance %s\n", gate.all_passed() ? "PASS" : "FAIL");
  return gate.all_passed() ? 0 : 1;
}
