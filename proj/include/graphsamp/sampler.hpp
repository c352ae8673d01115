#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "graphsamp/core.hpp"
#include "graphsamp/rng.hpp"

namespace graphsamp {

inline constexpr const char* kMethodGreedy = "greedy";
inline constexpr const char* kMethodVis = "vis";
inline constexpr const char* kMethodVisr = "visr";
inline constexpr const char* kMethodRandom = "random";
inline constexpr const char* kMethodBernoulli = "bernoulli";

/// gamma = 2 mu - mu^2, the weight under which (H + gamma Omega)^-1
/// approximates the GLR error covariance.
inline double gamma_from_mu(double mu) { return 2.0 * mu - mu * mu; }

inline void check_budget(Index k, Index n) {
  if (k < 1 || k > n) {
    fail(ErrorCode::BadBudget, "budget " + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
  }
}

/// Greedy D-optimal state: the running inverse of G = H + gamma Omega.
class DOptState {
 public:
  /// Starts from G_0 = gamma * Omega. If Omega is singular (a CGL) and
  /// `shift_singular` is set, G_0 = gamma * (Omega + 11^T/N) instead.
  DOptState(const DenseSymMatrix& omega, double gamma, bool shift_singular = true) : gamma_(gamma) {
    if (!(gamma > 0.0)) fail(ErrorCode::BadConfig, "gamma must be > 0");
    const Index n = omega.order();
    base_ = gamma * omega.mat();
    auto llt = factor_if_regular(base_);
    if (!llt) {
      if (!shift_singular) fail(ErrorCode::SingularOperator, "gamma * Omega is singular");
      base_ = gamma * (omega.mat().array() + 1.0 / static_cast<double>(n)).matrix();
      llt = factor_if_regular(base_);
      if (!llt) fail(ErrorCode::SingularOperator, "gamma * (Omega + 11^T/N) is singular");
    }
    g_inv_ = llt->solve(Matrix::Identity(n, n));
    g_inv_ = 0.5 * (g_inv_ + g_inv_.transpose());
    selected_.method = kMethodGreedy;
    mask_.assign(static_cast<std::size_t>(n), 0);
  }

  Index n() const { return g_inv_.rows(); }
  double gamma() const { return gamma_; }
  const Matrix& g_inv() const { return g_inv_; }
  const SamplingSet& selected() const { return selected_; }
  bool is_selected(Index j) const { return mask_[static_cast<std::size_t>(j)] != 0; }

  /// delta_j^T G^-1 delta_j; adding j multiplies det G by (1 + gain).
  double gain(Index j) const { return g_inv_(j, j); }

  /// Sherman-Morrison update for G + delta_j delta_j^T.
  void add(Index j) {
    if (j < 0 || j >= n()) fail(ErrorCode::IndexOutOfRange, "vertex " + std::to_string(j));
    if (is_selected(j)) fail(ErrorCode::AlreadySelected, "vertex " + std::to_string(j) + " already selected");
    const double g = gain(j);
    const Vector u = g_inv_.col(j);
    g_inv_.noalias() -= (1.0 / (1.0 + g)) * u * u.transpose();
    g_inv_ = 0.5 * (g_inv_ + g_inv_.transpose());
    mask_[static_cast<std::size_t>(j)] = 1;
    selected_.indices.push_back(j);
    selected_.scores.push_back(g);
  }

  /// G = H + G_0 for the current selection.
  Matrix operator_matrix() const {
    Matrix g = base_;
    for (Index j : selected_.indices) g(j, j) += 1.0;
    return g;
  }

  /// ||G^-1 G - I||_F.
  double inverse_residual() const {
    return (g_inv_ * operator_matrix() - Matrix::Identity(n(), n())).norm();
  }

 private:
  static std::optional<Eigen::LLT<Matrix>> factor_if_regular(const Matrix& m) {
    auto llt = linalg::try_cholesky(m);
    if (!llt) return std::nullopt;
    const auto d = llt->matrixLLT().diagonal();
    const double scale = m.diagonal().cwiseAbs().maxCoeff();
    if (d.cwiseAbs2().minCoeff() <= 1e-12 * scale) return std::nullopt;
    return llt;
  }

  Matrix base_;
  Matrix g_inv_;
  SamplingSet selected_;
  std::vector<char> mask_;
  double gamma_;
};

/// Value-returning form of DOptState::add.
inline DOptState sm_update(const DOptState& state, Index index) {
  DOptState next = state;
  next.add(index);
  return next;
}

/// Greedy maximization of logdet(H + gamma Omega) over |S| = k.
inline SamplingSet greedy_doptimal(const DenseSymMatrix& omega, Index k, double gamma,
                                   bool shift_singular = true) {
  check_budget(k, omega.order());
  DOptState state(omega, gamma, shift_singular);
  for (Index step = 0; step < k; ++step) {
    Index best = -1;
    double best_gain = -std::numeric_limits<double>::infinity();
    for (Index j = 0; j < state.n(); ++j) {
      if (state.is_selected(j)) continue;
      // Gains equal up to rounding count as ties and keep the lower index.
      if (best < 0 || state.gain(j) > best_gain + 1e-12 * std::abs(best_gain)) {
        best_gain = state.gain(j);
        best = j;
      }
    }
    state.add(best);
  }
  return state.selected();
}

/// Vertex Importance Sampling: the k largest q_i, ties to the lower index.
inline SamplingSet vis_select(const GraphModel& model, Index k) {
  const Vector& q = model.importance_or_throw();
  check_budget(k, model.n());
  std::vector<Index> order(static_cast<std::size_t>(model.n()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return q(a) > q(b); });
  SamplingSet set;
  set.method = kMethodVis;
  for (Index c = 0; c < k; ++c) {
    const Index v = order[static_cast<std::size_t>(c)];
    set.indices.push_back(v);
    set.scores.push_back(q(v));
  }
  return set;
}

/// Columns of Z(p) = sum_{l=1..p} (D^-1 A)^l and their Gram matrix.
struct RepulsionFilter {
  int p = 1;
  Matrix z;
  Matrix gram;

  Vector column(Index i) const { return z.col(i); }
};

enum class IsolatedVertexPolicy { ZeroRow, Strict };

inline RepulsionFilter build_repulsion_filter(const GraphModel& model, int p,
                                              IsolatedVertexPolicy policy = IsolatedVertexPolicy::ZeroRow) {
  if (p < 1) fail(ErrorCode::BadConfig, "hop count p must be >= 1");
  const Index n = model.n();
  Matrix walk = model.adjacency().mat();
  for (Index i = 0; i < n; ++i) {
    const double d = model.degrees()(i);
    if (d > 0.0) {
      walk.row(i) /= d;
    } else if (policy == IsolatedVertexPolicy::Strict) {
      fail(ErrorCode::IsolatedVertex, "vertex " + std::to_string(i) + " has no edges");
    }
  }
  RepulsionFilter filter;
  filter.p = p;
  filter.z = walk;
  Matrix power = walk;
  for (int l = 2; l <= p; ++l) {
    power = power * walk;
    filter.z += power;
  }
  filter.gram.noalias() = filter.z.transpose() * filter.z;
  filter.gram = 0.5 * (filter.gram + filter.gram.transpose());
  return filter;
}

/// ceil(1 / (2 alpha)) with alpha = k / N, computed in integers.
inline int auto_hop_count(Index n, Index k) {
  check_budget(k, n);
  return static_cast<int>((n + 2 * k - 1) / (2 * k));
}

/// VISR selection against a precomputed filter: repeatedly takes the
/// unselected x maximizing q_x - sum_{y in S} <z_x, z_y>.
inline SamplingSet visr_select(const Vector& q, const RepulsionFilter& filter, Index k) {
  const Index n = q.size();
  if (filter.gram.rows() != n) fail(ErrorCode::ShapeMismatch, "filter and importance sizes differ");
  check_budget(k, n);
  Vector penalty = Vector::Zero(n);
  std::vector<char> taken(static_cast<std::size_t>(n), 0);
  SamplingSet set;
  set.method = kMethodVisr;
  for (Index step = 0; step < k; ++step) {
    Index best = -1;
    double best_score = -std::numeric_limits<double>::infinity();
    for (Index x = 0; x < n; ++x) {
      if (taken[static_cast<std::size_t>(x)]) continue;
      const double score = q(x) - penalty(x);
      if (score > best_score) {
        best_score = score;
        best = x;
      }
    }
    taken[static_cast<std::size_t>(best)] = 1;
    set.indices.push_back(best);
    set.scores.push_back(best_score);
    penalty += filter.gram.col(best);
  }
  return set;
}

inline SamplingSet visr_select(const GraphModel& model, Index k, std::optional<int> p = std::nullopt) {
  const Vector& q = model.importance_or_throw();
  const int hops = p ? *p : auto_hop_count(model.n(), k);
  return visr_select(q, build_repulsion_filter(model, hops), k);
}

/// Uniform k-subset without replacement (partial Fisher-Yates).
inline SamplingSet random_select_fixed(Index n, Index k, std::uint64_t seed) {
  if (n < 1 || k < 1 || k > n) {
    fail(ErrorCode::BadBudget, "random budget " + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
  }
  std::vector<Index> pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), Index{0});
  Rng rng(seed);
  SamplingSet set;
  set.method = kMethodRandom;
  for (Index c = 0; c < k; ++c) {
    const auto pick = c + static_cast<Index>(rng.below(static_cast<std::uint64_t>(n - c)));
    std::swap(pool[static_cast<std::size_t>(c)], pool[static_cast<std::size_t>(pick)]);
    set.indices.push_back(pool[static_cast<std::size_t>(c)]);
  }
  return set;
}

/// One Bernoulli draw; may be empty.
inline SamplingSet bernoulli_draw(Index n, double prob, std::uint64_t seed) {
  if (!(prob > 0.0 && prob <= 1.0)) fail(ErrorCode::BadProbability, "inclusion probability must be in (0, 1]");
  if (n < 1) fail(ErrorCode::BadSize, "graph order must be >= 1");
  Rng rng(seed);
  SamplingSet set;
  set.method = kMethodBernoulli;
  for (Index v = 0; v < n; ++v)
    if (rng.uniform() < prob) set.indices.push_back(v);
  return set;
}

/// Independent inclusion with probability `prob`; an empty draw is repeated
/// with seed + 1 until nonempty.
inline SamplingSet random_select_bernoulli(Index n, double prob, std::uint64_t seed) {
  for (std::uint64_t s = seed;; ++s) {
    auto set = bernoulli_draw(n, prob, s);
    if (!set.indices.empty()) return set;
  }
}

}  // namespace graphsamp
