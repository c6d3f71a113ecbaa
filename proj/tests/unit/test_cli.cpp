#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "hiper/cli/dispatch.hpp"
#include "hiper/cli/run_config.hpp"
#include "json.hpp"

namespace hiper {
namespace {

namespace fs = std::filesystem;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("hiper_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(std::vector<std::string> args) {
    args.insert(args.begin(), "hiper");
    std::vector<const char*> argv;
    for (const std::string& a : args) argv.push_back(a.c_str());
    out_.str("");
    err_.str("");
    return dispatch(static_cast<int>(argv.size()), argv.data(), out_, err_);
  }

  std::string read(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  std::string write(const std::string& name, const std::string& text) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p.string();
  }

  fs::path dir_;
  std::ostringstream out_, err_;
};

TEST(Config, EmptyFileGivesDefaults) {
  std::istringstream in("");
  const RunConfig c = parse_config(in);
  EXPECT_DOUBLE_EQ(c.ppo.gae.lambda_low, 0.95);
  EXPECT_DOUBLE_EQ(c.ppo.gae.lambda_high, 0.95);
  EXPECT_DOUBLE_EQ(c.ppo.kl_beta, 0.01);
  EXPECT_DOUBLE_EQ(c.ppo.c_keep, 0.3);
  EXPECT_EQ(c.env.name, "fetchchain");
  EXPECT_EQ(c.env.length, 5);
  EXPECT_EQ(c.env.horizon, 20);
}

TEST(Config, GammaOutOfRangeNamed) {
  std::istringstream in("gamma = 1.5\n");
  try {
    parse_config(in);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("gamma"), std::string::npos) << e.what();
  }
}

TEST(Config, LambdaOneAccepted) {
  std::istringstream in("lambda_low = 1.0\nlambda_high = 1\n");
  const RunConfig c = parse_config(in);
  EXPECT_EQ(c.ppo.gae.lambda_low, 1.0);
  EXPECT_EQ(c.ppo.gae.lambda_high, 1.0);
}

TEST(Config, UnknownKeyWithLine) {
  std::istringstream in("# comment\n\ngamma = 0.9\nlearning_rate = 3\n");
  try {
    parse_config(in);
    FAIL();
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("line 4"), std::string::npos) << msg;
    EXPECT_NE(msg.find("learning_rate"), std::string::npos) << msg;
  }
}

TEST(Config, MalformedLineWithLine) {
  std::istringstream in("gamma 0.9\n");
  try {
    parse_config(in);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("line 1"), std::string::npos) << e.what();
  }
}

TEST(Config, EveryDocumentedKeyParses) {
  std::istringstream in(
      "gamma = 0.9\nlambda_low = 0.5\nlambda_high = 0.6\nlambda_flat = 0.7\nclip_eps = 0.1\n"
      "c_v = 1\nkl_beta = 0.02\nc_keep = 0.1\nlr_actor = 0.2\nlr_critic = 0.05\nepochs = 2\n"
      "minibatch = 16\niterations = 10\nepisodes_per_iter = 4\neval_episodes = 3\n"
      "env = fetchchain\nenv.L = 4\nenv.H = 12\nn_options = 3\nseed = 99  # trailing comment\n");
  const RunConfig c = parse_config(in);
  EXPECT_EQ(c.ppo.gae.gamma, 0.9);
  EXPECT_EQ(c.ppo.gae.lambda_flat, 0.7);
  EXPECT_EQ(c.ppo.minibatch, 16);
  EXPECT_EQ(c.env.length, 4);
  EXPECT_EQ(c.env.horizon, 12);
  EXPECT_EQ(c.env.n_options, 3);
  EXPECT_EQ(c.ppo.seed, 99u);
}

TEST_F(CliTest, UnknownFlagExitsTwoNamingIt) {
  EXPECT_EQ(run({"--out", dir_.string(), "train", "--frobnicate"}), kExitUsage);
  EXPECT_NE(err_.str().find("--frobnicate"), std::string::npos) << err_.str();
}

TEST_F(CliTest, UnknownSubcommandExitsTwo) {
  EXPECT_EQ(run({"launch"}), kExitUsage);
  EXPECT_EQ(run({}), kExitUsage);
}

TEST_F(CliTest, ConfigErrorExitsTwo) {
  const std::string cfg = write("bad.cfg", "gamma = 1.5\n");
  EXPECT_EQ(run({"--out", dir_.string(), "--config", cfg, "train"}), kExitUsage);
  EXPECT_NE(err_.str().find("gamma"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir_ / "metrics.csv"));
}

TEST_F(CliTest, TrainTwiceIdenticalMetrics) {
  const std::string cfg = write("run.cfg", "env.L = 3\nenv.H = 8\niterations = 5\nepisodes_per_iter = 8\n");
  ASSERT_EQ(run({"--out", (dir_ / "a").string(), "--config", cfg, "--seed", "1", "train"}), kExitOk)
      << err_.str();
  ASSERT_EQ(run({"--out", (dir_ / "b").string(), "--config", cfg, "--seed", "1", "train"}), kExitOk);
  const std::string a = read(dir_ / "a" / "metrics.csv");
  EXPECT_EQ(a, read(dir_ / "b" / "metrics.csv"));
  EXPECT_EQ(std::count(a.begin(), a.end(), '\n'), 6);
  EXPECT_TRUE(fs::exists(dir_ / "a" / "policy.txt"));
  EXPECT_TRUE(fs::exists(dir_ / "a" / "critic.txt"));
  const auto summary = nlohmann::json::parse(read(dir_ / "a" / "summary.json"));
  EXPECT_EQ(summary["seed"], 1);
  EXPECT_EQ(summary["iterations"], 5);
}

TEST_F(CliTest, TrainFlatWritesFlatCritic) {
  const std::string cfg = write("run.cfg", "env.L = 3\nenv.H = 8\niterations = 2\nepisodes_per_iter = 4\ncheckpoint_every = 1\n");
  ASSERT_EQ(run({"--out", dir_.string(), "--config", cfg, "train-flat"}), kExitOk) << err_.str();
  EXPECT_TRUE(fs::exists(dir_ / "flat_critic.txt"));
  EXPECT_TRUE(fs::exists(dir_ / "checkpoints" / "policy_2.txt"));
}

TEST_F(CliTest, RolloutAdvantagesEvalPipeline) {
  const std::string cfg = write("run.cfg", "env.L = 3\nenv.H = 8\niterations = 3\nepisodes_per_iter = 8\n");
  const std::string out = dir_.string();
  ASSERT_EQ(run({"--out", out, "--config", cfg, "train"}), kExitOk);
  ASSERT_EQ(run({"--out", out, "--config", cfg, "rollout", "--policy", out + "/policy.txt",
                 "--episodes", "4"}),
            kExitOk)
      << err_.str();
  ASSERT_EQ(run({"--out", out, "--config", cfg, "advantages", "--trajectories",
                 out + "/trajectories.jsonl", "--critic", out + "/critic.txt"}),
            kExitOk)
      << err_.str();
  std::ifstream adv(dir_ / "advantages.jsonl");
  std::string line;
  int rows = 0;
  while (std::getline(adv, line)) {
    const auto j = nlohmann::json::parse(line);
    EXPECT_TRUE(j.contains("A_low"));
    EXPECT_TRUE(j["A_flat"].is_null());
    if (j["t"] == 0) {
      EXPECT_TRUE(j["A_switch"].is_null());
    }
    ++rows;
  }
  EXPECT_GT(rows, 0);
  ASSERT_EQ(run({"--out", out, "--config", cfg, "eval", "--policy", out + "/policy.txt",
                 "--episodes", "3", "--mode", "sample"}),
            kExitOk);
  const auto ev = nlohmann::json::parse(read(dir_ / "eval.json"));
  EXPECT_EQ(ev["episodes"], 3);
  EXPECT_EQ(ev["mode"], "sample");
}

TEST_F(CliTest, MismatchedPolicyRejected) {
  const std::string cfg = write("run.cfg", "env.L = 3\nenv.H = 8\niterations = 1\nepisodes_per_iter = 2\n");
  ASSERT_EQ(run({"--out", dir_.string(), "--config", cfg, "train"}), kExitOk);
  EXPECT_EQ(run({"--out", dir_.string(), "eval", "--policy", (dir_ / "policy.txt").string()}),
            kExitUsage);
}

TEST_F(CliTest, MissingInputExitsTwo) {
  EXPECT_EQ(run({"--out", dir_.string(), "advantages", "--trajectories", "/nonexistent.jsonl",
                 "--critic", "/nonexistent.txt"}),
            kExitUsage);
}

TEST_F(CliTest, ParseTranscripts) {
  const std::string data = HIPER_TEST_DATA;
  ASSERT_EQ(run({"--out", dir_.string(), "parse", data + "/cup_episode.txt",
                 data + "/knife_episode.txt"}),
            kExitOk)
      << err_.str();
  const auto report = nlohmann::json::parse(read(dir_ / "parse_report.json"));
  EXPECT_EQ(report["episodes"], 2);
  EXPECT_EQ(report["turns"], 17);
  EXPECT_EQ(report["malformed_turns"], 1);
  EXPECT_EQ(report["violations"]["keep_altered_subgoal"], 1);
  const auto vocab = nlohmann::json::parse(read(dir_ / "vocabulary.json"));
  EXPECT_EQ(vocab["subgoals"].size(), 7u);
}

TEST_F(CliTest, ParseErrorExitsTwo) {
  const std::string bad = write("bad.txt", "<switch>KEEP</switch><subgoal>x</subgoal>\n");
  EXPECT_EQ(run({"--out", dir_.string(), "parse", bad}), kExitUsage);
  EXPECT_NE(err_.str().find("line 1"), std::string::npos) << err_.str();
}

TEST_F(CliTest, VerifyTelescope) {
  EXPECT_EQ(run({"--out", dir_.string(), "--seed", "3", "verify", "telescope", "--trials", "10000"}),
            kExitOk)
      << out_.str();
  const auto r = nlohmann::json::parse(read(dir_ / "verify_telescope.json"));
  EXPECT_EQ(r["check"], "telescope");
  EXPECT_EQ(r["passed"], true);
}

TEST_F(CliTest, VerifyFailureExitsOne) {
  // Too few epochs for the critic to reach the oracle values.
  EXPECT_EQ(run({"--out", dir_.string(), "verify", "critic-fixpoint", "--max-epochs", "2"}),
            kExitFailed);
  const auto r = nlohmann::json::parse(read(dir_ / "verify_critic-fixpoint.json"));
  EXPECT_EQ(r["passed"], false);
}

TEST_F(CliTest, VerifyUnknownModeExitsTwo) {
  EXPECT_EQ(run({"--out", dir_.string(), "verify", "everything"}), kExitUsage);
}

}  // namespace
}  // namespace hiper
