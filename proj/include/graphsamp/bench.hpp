#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "graphsamp/graphlearn.hpp"
#include "graphsamp/io.hpp"
#include "graphsamp/reconstruct.hpp"
#include "graphsamp/sampler.hpp"
#include "graphsamp/synthdata.hpp"

#ifndef GRAPHSAMP_VERSION
#define GRAPHSAMP_VERSION "0.1.0"
#endif

namespace graphsamp {

/// Benchmark selectors. The suffix names the operator used for reconstruction
/// (L: learned CGL, LQ: learned DDGL).
enum class BenchMethod { Vis, Visr, Greedy, GreedyL, RandomL, RandomLQ, BernoulliL, BernoulliLQ };

inline constexpr std::pair<BenchMethod, const char*> kBenchMethodNames[] = {
    {BenchMethod::Vis, "vis"},
    {BenchMethod::Visr, "visr"},
    {BenchMethod::Greedy, "greedy"},
    {BenchMethod::GreedyL, "greedy-l"},
    {BenchMethod::RandomL, "random-l"},
    {BenchMethod::RandomLQ, "random-lq"},
    {BenchMethod::BernoulliL, "bernoulli-l"},
    {BenchMethod::BernoulliLQ, "bernoulli-lq"},
};

inline std::string to_string(BenchMethod m) {
  for (const auto& [method, name] : kBenchMethodNames)
    if (method == m) return name;
  return "unknown";
}

inline BenchMethod parse_bench_method(const std::string& name) {
  for (const auto& [method, tag] : kBenchMethodNames)
    if (name == tag) return method;
  fail(ErrorCode::BadConfig, "unknown method '" + name + "'");
}

inline bool uses_cgl(BenchMethod m) {
  return m == BenchMethod::GreedyL || m == BenchMethod::RandomL || m == BenchMethod::BernoulliL;
}

struct ExperimentConfig {
  Index n = 100;
  double r = 0.02;
  double variance = 10.0;
  Index train_count = 1000;
  Index test_count = 100;
  std::vector<Index> budgets{5, 10, 15, 20, 30, 40, 50};
  std::vector<double> sigma_levels{0.1, 0.5, 1.0};
  double mu = 0.01;
  /// Overrides 2 mu - mu^2 for the greedy selectors when set.
  std::optional<double> gamma;
  std::vector<BenchMethod> methods{BenchMethod::Vis, BenchMethod::Visr, BenchMethod::Greedy,
                                   BenchMethod::RandomL, BenchMethod::RandomLQ};
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  /// Node locations stay fixed across seeds.
  std::uint64_t layout_seed = 2024;
  LearnConfig learn;

  double effective_gamma() const { return gamma ? *gamma : gamma_from_mu(mu); }

  void validate() const {
    if (n < 2) fail(ErrorCode::BadConfig, "n must be >= 2");
    if (!(r > 0.0) || !(variance > 0.0)) fail(ErrorCode::BadConfig, "r and variance must be > 0");
    if (train_count < 1 || test_count < 1) fail(ErrorCode::BadConfig, "signal counts must be >= 1");
    if (budgets.empty() || sigma_levels.empty() || methods.empty() || seeds.empty()) {
      fail(ErrorCode::BadConfig, "budgets, sigma_levels, methods and seeds must be nonempty");
    }
    for (Index b : budgets)
      if (b < 1 || b > n) fail(ErrorCode::BadConfig, "budget " + std::to_string(b) + " outside [1, n]");
    for (double s : sigma_levels)
      if (!(s >= 0.0)) fail(ErrorCode::BadConfig, "sigma levels must be >= 0");
    if (!(mu > 0.0)) fail(ErrorCode::BadConfig, "mu must be > 0");
    if (gamma && !(*gamma > 0.0)) fail(ErrorCode::BadConfig, "gamma must be > 0");
    learn.validate();
  }
};

struct ResultRow {
  std::string method;
  Index budget = 0;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  Index set_size = 0;
  double mse = 0.0;
  /// Seconds spent in the selector for this (method, budget, seed).
  double wall_time = 0.0;
};

struct ExperimentResult {
  std::vector<ResultRow> rows;
  std::string config_hash;
  std::string code_version = GRAPHSAMP_VERSION;
};

/// (1/M) sum_k (1/N) ||fhat_k - f_k||^2 over matching rows.
inline double average_mse(const Matrix& reconstructed, const Matrix& originals) {
  if (reconstructed.rows() != originals.rows() || reconstructed.cols() != originals.cols()) {
    fail(ErrorCode::ShapeMismatch, "reconstructed and original signal batches differ in shape");
  }
  if (reconstructed.size() == 0) fail(ErrorCode::ShapeMismatch, "empty signal batch");
  return (reconstructed - originals).rowwise().squaredNorm().mean() / static_cast<double>(originals.cols());
}

inline double average_mse(const std::vector<Vector>& reconstructed, const std::vector<Vector>& originals) {
  if (reconstructed.size() != originals.size() || reconstructed.empty()) {
    fail(ErrorCode::ShapeMismatch, "signal list lengths differ or are empty");
  }
  double total = 0.0;
  for (std::size_t k = 0; k < originals.size(); ++k) {
    if (reconstructed[k].size() != originals[k].size() || originals[k].size() == 0) {
      fail(ErrorCode::ShapeMismatch, "signal " + std::to_string(k) + " length mismatch");
    }
    total += (reconstructed[k] - originals[k]).squaredNorm() / static_cast<double>(originals[k].size());
  }
  return total / static_cast<double>(originals.size());
}

struct Overlap {
  Index intersection = 0;
  double jaccard = 0.0;
};

inline Overlap overlap_report(const SamplingSet& a, const SamplingSet& b) {
  Overlap out;
  for (Index v : a.indices)
    if (b.contains(v)) ++out.intersection;
  const Index uni = a.size() + b.size() - out.intersection;
  out.jaccard = uni == 0 ? 1.0 : static_cast<double>(out.intersection) / static_cast<double>(uni);
  return out;
}

/// Everything learned and drawn for one seed; shared read-only by its cells.
struct SeedData {
  std::uint64_t seed = 0;
  std::optional<GraphModel> cgl;
  std::optional<GraphModel> ddgl;
  SignalBatch test;
  std::vector<SignalBatch> noisy;  // one per sigma level
};

inline SeedData prepare_seed(const ExperimentConfig& cfg, const DenseSymMatrix& truth, std::uint64_t seed) {
  SeedData d;
  d.seed = seed;
  const bool need_cgl = std::any_of(cfg.methods.begin(), cfg.methods.end(), uses_cgl);
  const bool need_ddgl = std::any_of(cfg.methods.begin(), cfg.methods.end(), [](BenchMethod m) { return !uses_cgl(m); });
  const auto s = empirical_covariance(sample_gaussian_signals(truth, cfg.train_count, mix_seed(seed, 1)));
  if (need_cgl) d.cgl = learn_cgl(s, cfg.learn).model;
  if (need_ddgl) d.ddgl = learn_ddgl(s, cfg.learn).model;
  d.test = sample_gaussian_signals(truth, cfg.test_count, mix_seed(seed, 2));
  for (std::size_t i = 0; i < cfg.sigma_levels.size(); ++i) {
    d.noisy.push_back(add_noise(d.test, cfg.sigma_levels[i], mix_seed(seed, 100 + i)));
  }
  return d;
}

inline SamplingSet select_for(const ExperimentConfig& cfg, const SeedData& d, BenchMethod m, Index budget) {
  const std::uint64_t stream = 1000 + static_cast<std::uint64_t>(budget);
  switch (m) {
    case BenchMethod::Vis: return vis_select(*d.ddgl, budget);
    case BenchMethod::Visr: return visr_select(*d.ddgl, budget);
    case BenchMethod::Greedy: return greedy_doptimal(d.ddgl->ddgl(), budget, cfg.effective_gamma());
    case BenchMethod::GreedyL: return greedy_doptimal(d.cgl->laplacian(), budget, cfg.effective_gamma());
    case BenchMethod::RandomL:
    case BenchMethod::RandomLQ: return random_select_fixed(cfg.n, budget, mix_seed(d.seed, stream));
    case BenchMethod::BernoulliL:
    case BenchMethod::BernoulliLQ:
      return random_select_bernoulli(cfg.n, static_cast<double>(budget) / static_cast<double>(cfg.n),
                                     mix_seed(d.seed, stream));
  }
  fail(ErrorCode::BadConfig, "unhandled method");
}

inline std::vector<ResultRow> run_seed(const ExperimentConfig& cfg, const SeedData& d) {
  std::vector<ResultRow> rows;
  for (BenchMethod m : cfg.methods) {
    const DenseSymMatrix omega = uses_cgl(m) ? d.cgl->laplacian() : d.ddgl->ddgl();
    for (Index budget : cfg.budgets) {
      const std::string cell = "cell method=" + to_string(m) + " budget=" + std::to_string(budget) +
                               " seed=" + std::to_string(d.seed) + ": ";
      try {
        const auto t0 = std::chrono::steady_clock::now();
        SamplingSet set = select_for(cfg, d, m, budget);
        const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const GlrSolver solver(omega, set, cfg.mu);
        for (std::size_t si = 0; si < cfg.sigma_levels.size(); ++si) {
          const Matrix fhat = solver.solve_rows(d.noisy[si].signals);
          rows.push_back({to_string(m), budget, cfg.sigma_levels[si], d.seed, set.size(),
                          average_mse(fhat, d.test.signals), elapsed});
        }
      } catch (const Error& e) {
        throw Error(e.code(), cell + e.what());
      }
    }
  }
  return rows;
}

inline io::json config_to_json(const ExperimentConfig& cfg) {
  std::vector<std::string> methods;
  for (auto m : cfg.methods) methods.push_back(to_string(m));
  io::json j = {{"n", cfg.n},
                {"r", cfg.r},
                {"variance", cfg.variance},
                {"train_count", cfg.train_count},
                {"test_count", cfg.test_count},
                {"budgets", cfg.budgets},
                {"sigma_levels", cfg.sigma_levels},
                {"mu", cfg.mu},
                {"methods", methods},
                {"seeds", cfg.seeds},
                {"layout_seed", cfg.layout_seed},
                {"learn",
                 {{"max_sweeps", cfg.learn.max_sweeps},
                  {"obj_tol", cfg.learn.obj_tol},
                  {"weight_floor", cfg.learn.weight_floor},
                  {"regularizer", cfg.learn.regularizer}}}};
  j["gamma"] = cfg.gamma ? io::json(*cfg.gamma) : io::json(nullptr);
  return j;
}

/// Missing keys keep their defaults; unknown keys are rejected.
inline ExperimentConfig config_from_json(const io::json& j) {
  static const std::vector<std::string> known{"n",     "r",       "variance", "train_count", "test_count",
                                              "budgets", "sigma_levels", "mu", "gamma",       "methods",
                                              "seeds", "layout_seed", "learn"};
  ExperimentConfig cfg;
  try {
    if (!j.is_object()) fail(ErrorCode::BadConfig, "config must be a JSON object");
    for (const auto& [key, value] : j.items()) {
      if (std::find(known.begin(), known.end(), key) == known.end()) {
        fail(ErrorCode::BadConfig, "unknown config key '" + key + "'");
      }
    }
    if (j.contains("n")) cfg.n = j["n"].get<Index>();
    if (j.contains("r")) cfg.r = j["r"].get<double>();
    if (j.contains("variance")) cfg.variance = j["variance"].get<double>();
    if (j.contains("train_count")) cfg.train_count = j["train_count"].get<Index>();
    if (j.contains("test_count")) cfg.test_count = j["test_count"].get<Index>();
    if (j.contains("budgets")) cfg.budgets = j["budgets"].get<std::vector<Index>>();
    if (j.contains("sigma_levels")) cfg.sigma_levels = j["sigma_levels"].get<std::vector<double>>();
    if (j.contains("mu")) cfg.mu = j["mu"].get<double>();
    if (j.contains("gamma") && !j["gamma"].is_null()) cfg.gamma = j["gamma"].get<double>();
    if (j.contains("methods")) {
      cfg.methods.clear();
      for (const auto& m : j["methods"]) cfg.methods.push_back(parse_bench_method(m.get<std::string>()));
    }
    if (j.contains("seeds")) cfg.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
    if (j.contains("layout_seed")) cfg.layout_seed = j["layout_seed"].get<std::uint64_t>();
    if (j.contains("learn")) {
      const auto& l = j["learn"];
      cfg.learn.max_sweeps = l.value("max_sweeps", cfg.learn.max_sweeps);
      cfg.learn.obj_tol = l.value("obj_tol", cfg.learn.obj_tol);
      cfg.learn.weight_floor = l.value("weight_floor", cfg.learn.weight_floor);
      cfg.learn.regularizer = l.value("regularizer", cfg.learn.regularizer);
    }
  } catch (const io::json::exception& e) {
    fail(ErrorCode::BadConfig, std::string("config JSON: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

/// FNV-1a over the canonical config JSON.
inline std::string config_hash(const ExperimentConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : config_to_json(cfg).dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

/// Runs every (method, budget, sigma, seed) cell. Seeds are processed by up to
/// `jobs` worker threads; rows are merged in configuration order, so the
/// output does not depend on scheduling.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg, unsigned jobs = 1) {
  cfg.validate();
  const auto layout = generate_layout(cfg.n, cfg.layout_seed);
  const auto truth = gp_covariance(layout, cfg.r, cfg.variance);

  std::vector<std::vector<ResultRow>> per_seed(cfg.seeds.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < cfg.seeds.size(); i = next++) {
      try {
        per_seed[i] = run_seed(cfg, prepare_seed(cfg, truth, cfg.seeds[i]));
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(cfg.seeds.size())));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);

  ExperimentResult result;
  result.config_hash = config_hash(cfg);
  for (auto& rows : per_seed)
    for (auto& row : rows) result.rows.push_back(std::move(row));
  // Sort into (method order, budget, sigma, seed) order.
  auto method_rank = [&](const std::string& name) {
    for (std::size_t i = 0; i < cfg.methods.size(); ++i)
      if (to_string(cfg.methods[i]) == name) return i;
    return cfg.methods.size();
  };
  auto seed_rank = [&](std::uint64_t s) {
    return static_cast<std::size_t>(std::find(cfg.seeds.begin(), cfg.seeds.end(), s) - cfg.seeds.begin());
  };
  std::stable_sort(result.rows.begin(), result.rows.end(), [&](const ResultRow& a, const ResultRow& b) {
    return std::make_tuple(method_rank(a.method), a.budget, a.sigma, seed_rank(a.seed)) <
           std::make_tuple(method_rank(b.method), b.budget, b.sigma, seed_rank(b.seed));
  });
  return result;
}

struct SummaryRow {
  std::string method;
  Index budget = 0;
  double sigma = 0.0;
  std::size_t count = 0;
  double mean_mse = 0.0;
  double stderr_mse = 0.0;
  double mean_wall_time = 0.0;
};

/// Mean and standard error over seeds per (method, budget, sigma), in row order.
inline std::vector<SummaryRow> summarize(const ExperimentResult& result) {
  std::vector<SummaryRow> out;
  std::map<std::tuple<std::string, Index, double>, std::vector<const ResultRow*>> groups;
  std::vector<std::tuple<std::string, Index, double>> order;
  for (const auto& row : result.rows) {
    auto key = std::make_tuple(row.method, row.budget, row.sigma);
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.push_back(&row);
  }
  for (const auto& key : order) {
    const auto& members = groups[key];
    SummaryRow s;
    std::tie(s.method, s.budget, s.sigma) = key;
    s.count = members.size();
    for (const auto* r : members) {
      s.mean_mse += r->mse;
      s.mean_wall_time += r->wall_time;
    }
    s.mean_mse /= static_cast<double>(s.count);
    s.mean_wall_time /= static_cast<double>(s.count);
    if (s.count > 1) {
      double ss = 0.0;
      for (const auto* r : members) ss += (r->mse - s.mean_mse) * (r->mse - s.mean_mse);
      s.stderr_mse = std::sqrt(ss / static_cast<double>(s.count - 1) / static_cast<double>(s.count));
    }
    out.push_back(std::move(s));
  }
  return out;
}

/// results.csv: deterministic, no timing columns.
inline std::string results_csv(const ExperimentResult& result) {
  std::string out = "method,budget,sigma,seed,set_size,mse\n";
  for (const auto& r : result.rows) {
    out += r.method + ',' + std::to_string(r.budget) + ',' + io::format_double(r.sigma) + ',' +
           std::to_string(r.seed) + ',' + std::to_string(r.set_size) + ',' + io::format_double(r.mse) + '\n';
  }
  return out;
}

inline std::string timings_csv(const ExperimentResult& result) {
  std::string out = "method,budget,seed,selection_seconds\n";
  for (const auto& r : result.rows) {
    if (r.sigma != result.rows.front().sigma) continue;  // one timing per (method, budget, seed)
    out += r.method + ',' + std::to_string(r.budget) + ',' + std::to_string(r.seed) + ',' +
           io::format_double(r.wall_time) + '\n';
  }
  return out;
}

inline std::string summary_csv(const std::vector<SummaryRow>& summary) {
  std::string out = "method,budget,sigma,seeds,mean_mse,stderr_mse,mean_selection_seconds\n";
  for (const auto& s : summary) {
    out += s.method + ',' + std::to_string(s.budget) + ',' + io::format_double(s.sigma) + ',' +
           std::to_string(s.count) + ',' + io::format_double(s.mean_mse) + ',' + io::format_double(s.stderr_mse) +
           ',' + io::format_double(s.mean_wall_time) + '\n';
  }
  return out;
}

/// Plot-ready series for one sigma: one row per budget, mean/stderr columns per method.
inline std::string series_csv(const ExperimentConfig& cfg, const std::vector<SummaryRow>& summary, double sigma) {
  std::string out = "budget";
  for (auto m : cfg.methods) out += ',' + to_string(m) + "_mean," + to_string(m) + "_stderr";
  out += '\n';
  for (Index b : cfg.budgets) {
    out += std::to_string(b);
    for (auto m : cfg.methods) {
      const auto it = std::find_if(summary.begin(), summary.end(), [&](const SummaryRow& s) {
        return s.method == to_string(m) && s.budget == b && s.sigma == sigma;
      });
      out += ',' + io::format_double(it->mean_mse) + ',' + io::format_double(it->stderr_mse);
    }
    out += '\n';
  }
  return out;
}

/// Minimal line chart of mean MSE against budget, one polyline per method.
inline std::string series_svg(const ExperimentConfig& cfg, const std::vector<SummaryRow>& summary, double sigma) {
  constexpr double width = 640, height = 420, left = 60, right = 140, top = 30, bottom = 50;
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& s : summary)
    if (s.sigma == sigma) lo = std::min(lo, s.mean_mse), hi = std::max(hi, s.mean_mse);
  if (!(hi > lo)) hi = lo + 1.0;
  const double bmin = static_cast<double>(*std::min_element(cfg.budgets.begin(), cfg.budgets.end()));
  double bmax = static_cast<double>(*std::max_element(cfg.budgets.begin(), cfg.budgets.end()));
  if (bmax == bmin) bmax = bmin + 1.0;
  auto px = [&](double b) { return left + (b - bmin) / (bmax - bmin) * (width - left - right); };
  auto py = [&](double v) { return top + (hi - v) / (hi - lo) * (height - top - bottom); };

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"420\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + io::format_double(left) + "\" y=\"18\">mean MSE vs budget, sigma=" + io::format_double(sigma) + "</text>\n";
  svg += "<line x1=\"60\" y1=\"370\" x2=\"500\" y2=\"370\" stroke=\"black\"/><line x1=\"60\" y1=\"30\" x2=\"60\" y2=\"370\" stroke=\"black\"/>\n";
  svg += "<text x=\"60\" y=\"390\">" + io::format_double(bmin) + "</text><text x=\"480\" y=\"390\">" + io::format_double(bmax) + "</text>\n";
  svg += "<text x=\"5\" y=\"370\">" + io::format_double(std::round(lo * 1000) / 1000) + "</text><text x=\"5\" y=\"34\">" +
         io::format_double(std::round(hi * 1000) / 1000) + "</text>\n";
  for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
    const std::string name = to_string(cfg.methods[mi]);
    std::string points;
    for (Index b : cfg.budgets) {
      for (const auto& s : summary) {
        if (s.method == name && s.budget == b && s.sigma == sigma) {
          points += io::format_double(px(static_cast<double>(b))) + ',' + io::format_double(py(s.mean_mse)) + ' ';
        }
      }
    }
    const char* color = palette[mi % std::size(palette)];
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"2\" points=\"" + points + "\"/>\n";
    svg += "<text x=\"510\" y=\"" + std::to_string(50 + 18 * mi) + "\" fill=\"" + color + "\">" + name + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace graphsamp
