#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "graphsamp/cli.hpp"

namespace graphsamp {
namespace {

namespace fs = std::filesystem;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("graphsamp_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(std::vector<std::string> args) {
    args.insert(args.begin(), "graphsamp");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    out_.str({});
    err_.str({});
    return cli::parse_and_dispatch(static_cast<int>(argv.size()), argv.data(), out_, err_);
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
  std::ostringstream out_, err_;
};

TEST_F(CliTest, PipelineEndToEnd) {
  ASSERT_EQ(run({"gen-data", "--n", "30", "--r", "0.1", "--variance", "1", "--num-train", "300", "--num-test", "5",
                 "--sigma", "0.1", "--seed", "3", "--out-dir", path("data")}),
            0)
      << err_.str();
  for (const char* f : {"layout.json", "covariance.csv", "empirical_covariance.csv", "train.csv", "test.csv",
                        "test_noisy.csv"})
    EXPECT_TRUE(fs::exists(dir_ / "data" / f)) << f;
  EXPECT_EQ(io::read_matrix_csv(path("data/train.csv")).rows(), 300);

  ASSERT_EQ(run({"learn", "--cov", path("data/empirical_covariance.csv"), "--model", "ddgl", "--out",
                 path("ddgl.json")}),
            0)
      << err_.str();
  const auto summary = io::json::parse(out_.str());
  EXPECT_EQ(summary["command"], "learn");
  const auto g = io::read_graph(path("ddgl.json"));
  EXPECT_EQ(g.n(), 30);
  EXPECT_TRUE(g.has_importance());

  for (const char* method : {"visr", "vis", "greedy", "random"}) {
    ASSERT_EQ(run({"sample", "--graph", path("ddgl.json"), "--method", method, "--k", "6", "--out",
                   path(std::string("set_") + method + ".json")}),
              0)
        << method << ": " << err_.str();
    EXPECT_EQ(io::read_set(path(std::string("set_") + method + ".json")).size(), 6);
  }
  ASSERT_EQ(run({"sample", "--graph", path("ddgl.json"), "--method", "bernoulli", "--prob", "0.5", "--seed", "2",
                 "--out", path("set_b.json")}),
            0);

  ASSERT_EQ(run({"reconstruct", "--graph", path("ddgl.json"), "--set", path("set_visr.json"), "--signals",
                 path("data/test_noisy.csv"), "--out", path("rec.csv")}),
            0)
      << err_.str();
  const Matrix rec = io::read_matrix_csv(path("rec.csv"));
  EXPECT_EQ(rec.rows(), 5);
  EXPECT_EQ(rec.cols(), 30);

  ASSERT_EQ(run({"learn", "--cov", path("data/empirical_covariance.csv"), "--model", "cgl", "--out",
                 path("cgl.json")}),
            0);
  EXPECT_FALSE(io::read_graph(path("cgl.json")).has_importance());
  EXPECT_EQ(run({"reconstruct", "--graph", path("cgl.json"), "--set", path("set_visr.json"), "--signals",
                 path("data/test_noisy.csv"), "--use-q", "false", "--out", path("rec_l.csv")}),
            0)
      << err_.str();
}

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(run({"--help"}), 0);
  EXPECT_EQ(run({}), 1);
  EXPECT_EQ(run({"sample", "--bogus"}), 1);
  EXPECT_EQ(run({"gen-data", "--n", "1", "--out-dir", path("d")}), 1);

  ASSERT_EQ(run({"gen-data", "--n", "12", "--num-train", "100", "--num-test", "2", "--out-dir", path("d")}), 0);
  ASSERT_EQ(run({"learn", "--cov", path("d/empirical_covariance.csv"), "--model", "cgl", "--out", path("cgl.json")}),
            0);
  // VIS needs importances; a CGL has none.
  EXPECT_EQ(run({"sample", "--graph", path("cgl.json"), "--method", "vis", "--k", "3", "--out", path("s.json")}), 2);
  EXPECT_NE(err_.str().find("error"), std::string::npos);
  EXPECT_EQ(run({"sample", "--graph", path("cgl.json"), "--method", "greedy", "--out", path("s.json")}), 1);
  EXPECT_EQ(run({"sample", "--graph", path("cgl.json"), "--method", "random", "--k", "13", "--out", path("s.json")}),
            1);

  // Rank-deficient covariance: the DDGL learner needs S positive definite.
  io::atomic_write(path("sing.csv"), "1,1\n1,1\n");
  EXPECT_EQ(run({"learn", "--cov", path("sing.csv"), "--model", "ddgl", "--out", path("x.json")}), 2);
  io::atomic_write(path("bad.csv"), "1,2\n3\n");
  EXPECT_EQ(run({"learn", "--cov", path("bad.csv"), "--out", path("x.json")}), 1);
}

TEST_F(CliTest, BenchWritesCompleteResults) {
  ExperimentConfig cfg;
  cfg.n = 15;
  cfg.r = 0.1;
  cfg.variance = 1.0;
  cfg.train_count = 100;
  cfg.test_count = 4;
  cfg.budgets = {3, 6};
  cfg.sigma_levels = {0.1, 1.0};
  cfg.seeds = {0, 1};
  io::atomic_write(path("cfg.json"), config_to_json(cfg).dump());
  ASSERT_EQ(run({"bench", "--config", path("cfg.json"), "--out-dir", path("b1"), "--emit-svg", "--jobs", "1"}), 0)
      << err_.str();
  ASSERT_EQ(run({"bench", "--config", path("cfg.json"), "--out-dir", path("b2"), "--jobs", "2"}), 0);
  const std::string results = io::read_file(path("b1/results.csv"));
  const auto lines = std::count(results.begin(), results.end(), '\n');
  EXPECT_EQ(static_cast<std::size_t>(lines),
            1 + cfg.methods.size() * cfg.budgets.size() * cfg.sigma_levels.size() * cfg.seeds.size());
  EXPECT_EQ(results, io::read_file(path("b2/results.csv")));
  for (const char* f : {"timings.csv", "summary.csv", "metadata.json", "series_sigma_0.1.csv", "series_sigma_1.csv",
                        "mse_vs_budget_sigma_0.1.svg"})
    EXPECT_TRUE(fs::exists(dir_ / "b1" / f)) << f;
  const auto meta = io::json::parse(io::read_file(path("b1/metadata.json")));
  EXPECT_EQ(meta["config_hash"], config_hash(cfg));

  io::atomic_write(path("bad_cfg.json"), R"({"n": 15, "colour": 3})");
  EXPECT_EQ(run({"bench", "--config", path("bad_cfg.json"), "--out-dir", path("b3")}), 1);
}

}  // namespace
}  // namespace graphsamp
