#pragma once

#include <filesystem>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "graphsamp/bench.hpp"
#include "graphsamp/graphlearn.hpp"
#include "graphsamp/io.hpp"
#include "graphsamp/reconstruct.hpp"
#include "graphsamp/sampler.hpp"
#include "graphsamp/synthdata.hpp"

namespace graphsamp::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNumerical = 2;

namespace fs = std::filesystem;
using io::json;

struct GenDataArgs {
  Index n = 100;
  double r = 0.02;
  double variance = 10.0;
  Index num_train = 1000;
  Index num_test = 100;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  std::string out_dir;
};

inline json run_gen_data(const GenDataArgs& a) {
  const auto layout = generate_layout(a.n, a.seed);
  const auto cov = gp_covariance(layout, a.r, a.variance);
  const auto train = sample_gaussian_signals(cov, a.num_train, mix_seed(a.seed, 1));
  const auto test = sample_gaussian_signals(cov, a.num_test, mix_seed(a.seed, 2));
  const auto noisy = add_noise(test, a.sigma, mix_seed(a.seed, 3));
  const fs::path dir(a.out_dir);
  io::atomic_write(dir / "layout.json", io::layout_to_json(layout).dump(2) + "\n");
  io::atomic_write(dir / "covariance.csv", io::matrix_to_csv(cov.mat()));
  io::atomic_write(dir / "empirical_covariance.csv", io::matrix_to_csv(empirical_covariance(train).mat()));
  io::atomic_write(dir / "train.csv", io::matrix_to_csv(train.signals));
  io::atomic_write(dir / "test.csv", io::matrix_to_csv(test.signals));
  io::atomic_write(dir / "test_noisy.csv", io::matrix_to_csv(noisy.signals));
  return {{"command", "gen-data"}, {"n", a.n}, {"num_train", a.num_train}, {"num_test", a.num_test},
          {"sigma", a.sigma}, {"seed", a.seed}, {"out_dir", a.out_dir}};
}

struct LearnArgs {
  std::string cov;
  std::string model = "ddgl";
  LearnConfig cfg;
  std::string out;
};

inline json run_learn(const LearnArgs& a) {
  const auto s = io::read_sym_matrix_csv(a.cov);
  const LearnResult res = a.model == "cgl" ? learn_cgl(s, a.cfg) : learn_ddgl(s, a.cfg);
  io::atomic_write(a.out, io::graph_to_json(res.model).dump() + "\n");
  return {{"command", "learn"},
          {"model", a.model},
          {"objective", res.trace.final_objective()},
          {"sweeps", res.trace.sweeps_used},
          {"converged", res.trace.converged},
          {"edges", res.model.edge_count()},
          {"out", a.out}};
}

struct SampleArgs {
  std::string graph;
  std::string method = "visr";
  Index k = 0;
  std::optional<double> gamma;
  double mu = 0.01;
  std::optional<int> p;
  std::optional<double> prob;
  std::uint64_t seed = 0;
  std::string out;
};

inline json run_sample(const SampleArgs& a) {
  const auto g = io::read_graph(a.graph);
  SamplingSet set;
  if (a.method == "vis") {
    set = vis_select(g, a.k);
  } else if (a.method == "visr") {
    set = visr_select(g, a.k, a.p);
  } else if (a.method == "greedy") {
    // D-optimal on L + Q when the graph carries importances, else on L.
    const double gamma = a.gamma ? *a.gamma : gamma_from_mu(a.mu);
    set = greedy_doptimal(g.has_importance() ? g.ddgl() : g.laplacian(), a.k, gamma);
  } else if (a.method == "random") {
    set = random_select_fixed(g.n(), a.k, a.seed);
  } else {
    set = random_select_bernoulli(g.n(), a.prob ? *a.prob : 1.0 / static_cast<double>(g.n()), a.seed);
  }
  io::atomic_write(a.out, io::set_to_json(set).dump() + "\n");
  return {{"command", "sample"}, {"method", set.method}, {"size", set.size()}, {"out", a.out}};
}

struct ReconstructArgs {
  std::string graph;
  std::string set;
  std::string signals;
  double mu = 0.01;
  bool use_q = true;
  std::string out;
};

inline json run_reconstruct(const ReconstructArgs& a) {
  const auto g = io::read_graph(a.graph);
  const auto set = io::read_set(a.set);
  const Matrix signals = io::read_matrix_csv(a.signals);
  const DenseSymMatrix omega = a.use_q ? g.ddgl() : g.laplacian();
  const GlrSolver solver(omega, set, a.mu);
  Matrix out;
  if (signals.cols() == g.n()) {
    out = solver.solve_rows(signals);
  } else if (signals.cols() == set.size()) {
    out.resize(signals.rows(), g.n());
    for (Index k = 0; k < signals.rows(); ++k) out.row(k) = solver.solve(signals.row(k).transpose()).transpose();
  } else {
    fail(ErrorCode::ShapeMismatch, "signal rows must have N or |S| columns");
  }
  io::atomic_write(a.out, io::matrix_to_csv(out));
  return {{"command", "reconstruct"}, {"signals", out.rows()}, {"use_q", a.use_q}, {"out", a.out}};
}

struct BenchArgs {
  std::string config;
  std::string out_dir;
  bool emit_svg = false;
  unsigned jobs = 0;
};

inline json run_bench(const BenchArgs& a) {
  const ExperimentConfig cfg =
      a.config.empty() ? ExperimentConfig{} : [&] {
        try {
          return config_from_json(json::parse(io::read_file(a.config)));
        } catch (const json::exception& e) {
          fail(ErrorCode::BadConfig, a.config + ": " + e.what());
        }
      }();
  cfg.validate();
  const unsigned jobs = a.jobs ? a.jobs : std::max(1u, std::thread::hardware_concurrency());
  const auto result = run_experiment(cfg, jobs);
  const auto summary = summarize(result);
  const fs::path dir(a.out_dir);
  io::atomic_write(dir / "results.csv", results_csv(result));
  io::atomic_write(dir / "timings.csv", timings_csv(result));
  io::atomic_write(dir / "summary.csv", summary_csv(summary));
  for (double sigma : cfg.sigma_levels) {
    const std::string tag = "sigma_" + io::format_double(sigma);
    io::atomic_write(dir / ("series_" + tag + ".csv"), series_csv(cfg, summary, sigma));
    if (a.emit_svg) io::atomic_write(dir / ("mse_vs_budget_" + tag + ".svg"), series_svg(cfg, summary, sigma));
  }
  const auto now = std::chrono::system_clock::now().time_since_epoch();
  json meta = {{"config_hash", result.config_hash},
               {"code_version", result.code_version},
               {"config", config_to_json(cfg)},
               {"finished_unix_seconds", std::chrono::duration_cast<std::chrono::seconds>(now).count()}};
  io::atomic_write(dir / "metadata.json", meta.dump(2) + "\n");
  return {{"command", "bench"}, {"rows", result.rows.size()}, {"config_hash", result.config_hash},
          {"out_dir", a.out_dir}};
}

/// Parses argv, runs the chosen subcommand and prints a one-line JSON summary
/// to `out`. Returns 0 on success, 1 on usage/validation errors and 2 when a
/// numerical routine fails.
inline int parse_and_dispatch(int argc, const char* const* argv, std::ostream& out = std::cout,
                              std::ostream& err = std::cerr) {
  CLI::App app{"Graph learning and graph-signal sampling toolkit", "graphsamp"};
  app.require_subcommand(1);

  GenDataArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "Generate synthetic Gaussian-process graph signals");
  gen_cmd->add_option("--n", gen.n, "Number of nodes")->check(CLI::Range(Index{2}, Index{1} << 20));
  gen_cmd->add_option("--r", gen.r, "Correlation range")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--variance", gen.variance, "Marginal variance")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--num-train", gen.num_train, "Training realizations")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--num-test", gen.num_test, "Test realizations")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--sigma", gen.sigma, "Noise std added to test signals")->check(CLI::NonNegativeNumber);
  gen_cmd->add_option("--seed", gen.seed, "RNG seed");
  gen_cmd->add_option("--out-dir", gen.out_dir, "Output directory")->required();

  LearnArgs learn;
  auto* learn_cmd = app.add_subcommand("learn", "Learn a CGL or DDGL from a covariance CSV");
  learn_cmd->add_option("--cov", learn.cov, "Covariance CSV")->required()->check(CLI::ExistingFile);
  learn_cmd->add_option("--model", learn.model, "cgl or ddgl")->check(CLI::IsMember({"cgl", "ddgl"}));
  learn_cmd->add_option("--max-sweeps", learn.cfg.max_sweeps, "Sweep limit")->check(CLI::PositiveNumber);
  learn_cmd->add_option("--tol", learn.cfg.obj_tol, "Relative objective tolerance")->check(CLI::PositiveNumber);
  learn_cmd->add_option("--weight-floor", learn.cfg.weight_floor, "Drop weights at or below this")
      ->check(CLI::NonNegativeNumber);
  learn_cmd->add_option("--regularizer", learn.cfg.regularizer, "l1 weight on edges")->check(CLI::NonNegativeNumber);
  learn_cmd->add_option("--out", learn.out, "Graph JSON output")->required();

  SampleArgs sample;
  auto* sample_cmd = app.add_subcommand("sample", "Select a sampling set from a graph JSON");
  sample_cmd->add_option("--graph", sample.graph, "Graph JSON")->required()->check(CLI::ExistingFile);
  sample_cmd->add_option("--method", sample.method, "greedy, vis, visr, random or bernoulli")
      ->check(CLI::IsMember({"greedy", "vis", "visr", "random", "bernoulli"}));
  auto* k_opt = sample_cmd->add_option("--k", sample.k, "Budget")->check(CLI::PositiveNumber);
  sample_cmd->add_option("--gamma", sample.gamma, "Greedy weight (default 2mu - mu^2)")->check(CLI::PositiveNumber);
  sample_cmd->add_option("--mu", sample.mu, "Reconstruction weight used to derive gamma")->check(CLI::PositiveNumber);
  sample_cmd->add_option("--p", sample.p, "VISR hop count (default ceil(N / 2k))")->check(CLI::PositiveNumber);
  sample_cmd->add_option("--prob", sample.prob, "Bernoulli inclusion probability (default 1/N)");
  sample_cmd->add_option("--seed", sample.seed, "RNG seed for random selectors");
  sample_cmd->add_option("--out", sample.out, "Sampling set JSON output")->required();

  ReconstructArgs rec;
  auto* rec_cmd = app.add_subcommand("reconstruct", "GLR reconstruction of sampled signals");
  rec_cmd->add_option("--graph", rec.graph, "Graph JSON")->required()->check(CLI::ExistingFile);
  rec_cmd->add_option("--set", rec.set, "Sampling set JSON")->required()->check(CLI::ExistingFile);
  rec_cmd->add_option("--signals", rec.signals, "CSV, one signal per row (N or |S| columns)")
      ->required()
      ->check(CLI::ExistingFile);
  rec_cmd->add_option("--mu", rec.mu, "Regularization weight")->check(CLI::PositiveNumber);
  rec_cmd->add_option("--use-q", rec.use_q, "true: Omega = L + Q, false: Omega = L");
  rec_cmd->add_option("--out", rec.out, "Reconstructed signals CSV")->required();

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Run the synthetic sampling benchmark");
  bench_cmd->add_option("--config", bench.config, "ExperimentConfig JSON (defaults if omitted)")
      ->check(CLI::ExistingFile);
  bench_cmd->add_option("--out-dir", bench.out_dir, "Output directory")->required();
  bench_cmd->add_flag("--emit-svg", bench.emit_svg, "Also write MSE-vs-budget SVG charts");
  bench_cmd->add_option("--jobs", bench.jobs, "Worker threads (default: logical processors)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    json summary;
    if (gen_cmd->parsed()) {
      summary = run_gen_data(gen);
    } else if (learn_cmd->parsed()) {
      summary = run_learn(learn);
    } else if (sample_cmd->parsed()) {
      if (sample.method != "bernoulli" && !*k_opt) fail(ErrorCode::BadBudget, "--k is required for " + sample.method);
      summary = run_sample(sample);
    } else if (rec_cmd->parsed()) {
      summary = run_reconstruct(rec);
    } else {
      summary = run_bench(bench);
    }
    out << summary.dump() << '\n';
    return kExitOk;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return is_numerical(e.code()) ? kExitNumerical : kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

}  // namespace graphsamp::cli
