#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "graphsamp/core.hpp"

namespace graphsamp {

struct LearnConfig {
  int max_sweeps = 200;
  /// Relative objective decrease below which a sweep counts as converged.
  double obj_tol = 1e-7;
  /// Learned edge weights at or below this are dropped from the returned graph.
  double weight_floor = 1e-6;
  /// l1 weight on the off-diagonal Laplacian entries (adds 2 * regularizer * sum w).
  double regularizer = 0.0;

  void validate() const {
    if (max_sweeps < 1) fail(ErrorCode::BadConfig, "max_sweeps must be >= 1");
    if (!(obj_tol > 0.0)) fail(ErrorCode::BadConfig, "obj_tol must be > 0");
    if (!(weight_floor >= 0.0)) fail(ErrorCode::BadConfig, "weight_floor must be >= 0");
    if (!(regularizer >= 0.0)) fail(ErrorCode::BadConfig, "regularizer must be >= 0");
  }
};

struct LearnTrace {
  double initial_objective = 0.0;
  std::vector<double> objective_per_sweep;
  bool converged = false;
  int sweeps_used = 0;

  double final_objective() const {
    return objective_per_sweep.empty() ? initial_objective : objective_per_sweep.back();
  }
};

struct LearnResult {
  GraphModel model;
  LearnTrace trace;
};

/// -logdet(L + 11^T/N) + tr(L S).
inline double cgl_objective(const DenseSymMatrix& laplacian, const DenseSymMatrix& s) {
  if (laplacian.order() != s.order()) fail(ErrorCode::ShapeMismatch, "L and S orders differ");
  const Index n = laplacian.order();
  Matrix shifted = laplacian.mat();
  shifted.array() += 1.0 / static_cast<double>(n);
  const double ld = linalg::logdet_spd(shifted, ErrorCode::SingularShiftedL);
  return -ld + (laplacian.mat().cwiseProduct(s.mat())).sum();
}

/// -logdet(L + diag(q)) + tr((L + diag(q)) S).
inline double ddgl_objective(const DenseSymMatrix& laplacian, const Vector& q, const DenseSymMatrix& s) {
  if (laplacian.order() != s.order() || q.size() != s.order()) {
    fail(ErrorCode::ShapeMismatch, "L, q and S sizes differ");
  }
  Matrix k = laplacian.mat();
  k.diagonal() += q;
  const double ld = linalg::logdet_spd(k, ErrorCode::NotPD);
  return -ld + (k.cwiseProduct(s.mat())).sum();
}

namespace detail {

/// Edge weights of a complete graph stored on the strict upper triangle.
class EdgeWeights {
 public:
  explicit EdgeWeights(Index n) : w_(Matrix::Zero(n, n)) {}

  Index n() const { return w_.rows(); }
  double operator()(Index i, Index j) const { return i < j ? w_(i, j) : w_(j, i); }
  void set(Index i, Index j, double value) { (i < j ? w_(i, j) : w_(j, i)) = value; }

  Matrix laplacian() const {
    Matrix a = adjacency(0.0);
    Matrix l = -a;
    l.diagonal() = a.rowwise().sum();
    return l;
  }

  Matrix adjacency(double floor) const {
    Matrix a = Matrix::Zero(n(), n());
    for (Index j = 0; j < n(); ++j)
      for (Index i = 0; i < j; ++i)
        if (w_(i, j) > floor) a(i, j) = a(j, i) = w_(i, j);
    return a;
  }

  double sum() const { return w_.sum(); }

  bool connected() const {
    std::vector<char> seen(static_cast<std::size_t>(n()), 0);
    std::vector<Index> stack{0};
    seen[0] = 1;
    Index reached = 1;
    while (!stack.empty()) {
      const Index v = stack.back();
      stack.pop_back();
      for (Index u = 0; u < n(); ++u) {
        if (u != v && !seen[static_cast<std::size_t>(u)] && (*this)(u, v) > 0.0) {
          seen[static_cast<std::size_t>(u)] = 1;
          ++reached;
          stack.push_back(u);
        }
      }
    }
    return reached == n();
  }

 private:
  Matrix w_;
};

/// Exact minimizer over t >= -w of -log(1 + t a) + t b, for a, b > 0.
inline double edge_step(double a, double b, double w) {
  return std::max(1.0 / b - 1.0 / a, -w);
}

/// One pass of exact edge-coordinate minimization in ascending (i, j) order.
/// `c` holds the inverse of the current model matrix and is kept in sync with
/// rank-one corrections; `s` supplies the data term.
inline void edge_sweep(EdgeWeights& w, Matrix& c, const Matrix& s, double penalty) {
  const Index n = w.n();
  const double b_min = 1e-14 * std::max(s.diagonal().cwiseAbs().maxCoeff(), 1e-300);
  Vector u(n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      const double a = c(i, i) + c(j, j) - 2.0 * c(i, j);
      const double b = std::max(s(i, i) + s(j, j) - 2.0 * s(i, j) + penalty, b_min);
      const double w_ij = w(i, j);
      if (!(a > 0.0)) continue;
      const double step = edge_step(a, b, w_ij);
      if (step == 0.0 || std::abs(step) <= 1e-15 * std::max(w_ij, 1e-300)) continue;
      w.set(i, j, w_ij + step == 0.0 ? 0.0 : std::max(w_ij + step, 0.0));
      u = c.col(i) - c.col(j);
      c.noalias() -= (step / (1.0 + step * a)) * u * u.transpose();
    }
  }
}

inline double penalized(double objective, const EdgeWeights& w, double regularizer) {
  return objective + 2.0 * regularizer * w.sum();
}

inline bool sweep_converged(double previous, double current, double tol) {
  return (previous - current) <= tol * std::max(std::abs(previous), 1.0);
}

inline void check_first_sweep(const LearnTrace& trace) {
  const double slack = 1e-10 * std::max(std::abs(trace.initial_objective), 1.0);
  if (trace.objective_per_sweep.front() > trace.initial_objective + slack) {
    fail(ErrorCode::NoProgress, "first sweep increased the objective");
  }
}

}  // namespace detail

/// Learns a combinatorial graph Laplacian from an empirical covariance by
/// exact coordinate minimization over the edge weights.
inline LearnResult learn_cgl(const DenseSymMatrix& s, const LearnConfig& cfg = {}) {
  cfg.validate();
  const Index n = s.order();
  if (n < 2) fail(ErrorCode::BadSize, "graph learning needs N >= 2");
  if (!linalg::is_psd(s.mat())) fail(ErrorCode::NotPSD, "covariance is not positive semi-definite");

  // tr(L S) only sees S through P S P with P = I - 11^T/N.
  const double inv_n = 1.0 / static_cast<double>(n);
  const Matrix centering = Matrix::Identity(n, n) - Matrix::Constant(n, n, inv_n);
  Matrix sc = centering * s.mat() * centering;
  sc = 0.5 * (sc + sc.transpose());
  const double centered_trace = sc.trace();
  if (!(centered_trace > 0.0)) fail(ErrorCode::NotPD, "centered covariance is zero");

  // Start from the unconstrained optimum (P S P + 11^T/N)^-1 - 11^T/N with
  // positive off-diagonals clamped away.
  Matrix k0 = sc;
  k0.array() += inv_n;
  k0.diagonal().array() += 1e-10 * centered_trace * inv_n;
  const Matrix p0 = linalg::inverse_spd(k0, ErrorCode::NotPD);
  detail::EdgeWeights w(n);
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) w.set(i, j, std::max(inv_n - p0(i, j), 0.0));
  if (!w.connected()) {
    const double bridge = 0.1 / centered_trace;
    for (Index i = 0; i < n; ++i)
      for (Index j = i + 1; j < n; ++j) w.set(i, j, w(i, j) + bridge);
  }

  const DenseSymMatrix data = DenseSymMatrix::symmetrized(sc);
  auto objective = [&](const Matrix& l) {
    return detail::penalized(cgl_objective(DenseSymMatrix::symmetrized(l), data), w, cfg.regularizer);
  };

  LearnTrace trace;
  trace.initial_objective = objective(w.laplacian());
  double previous = trace.initial_objective;
  for (int sweep = 0; sweep < cfg.max_sweeps; ++sweep) {
    Matrix shifted = w.laplacian();
    shifted.array() += inv_n;
    Matrix c = linalg::inverse_spd(shifted, ErrorCode::SingularShiftedL);
    detail::edge_sweep(w, c, sc, 2.0 * cfg.regularizer);
    const double current = objective(w.laplacian());
    trace.objective_per_sweep.push_back(current);
    trace.sweeps_used = sweep + 1;
    if (sweep == 0) detail::check_first_sweep(trace);
    if (detail::sweep_converged(previous, current, cfg.obj_tol)) {
      trace.converged = true;
      break;
    }
    previous = current;
  }

  return {build_graph_model(DenseSymMatrix(w.adjacency(cfg.weight_floor))), std::move(trace)};
}

/// Jointly learns edge weights and vertex importances (a diagonally dominant
/// Laplacian L + Q), alternating edge sweeps with closed-form q updates.
inline LearnResult learn_ddgl(const DenseSymMatrix& s, const LearnConfig& cfg = {}) {
  cfg.validate();
  const Index n = s.order();
  if (n < 2) fail(ErrorCode::BadSize, "graph learning needs N >= 2");
  if (!linalg::try_cholesky(s.mat())) fail(ErrorCode::NotPD, "covariance is not positive definite");

  const double trace_s = s.mat().trace();
  // Floor for q, scaled so that a unit-diagonal covariance gets 1e-6.
  const double q_floor = 1e-6 * static_cast<double>(n) / trace_s;

  Matrix jittered = s.mat();
  jittered.diagonal().array() += 1e-10 * trace_s / static_cast<double>(n);
  const Matrix p0 = linalg::inverse_spd(jittered, ErrorCode::NotPD);
  detail::EdgeWeights w(n);
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) w.set(i, j, std::max(-p0(i, j), 0.0));
  Vector q(n);
  {
    const Matrix l0 = w.laplacian();
    for (Index i = 0; i < n; ++i) q(i) = std::max(p0(i, i) - l0(i, i), q_floor);
  }

  auto model_matrix = [&]() {
    Matrix k = w.laplacian();
    k.diagonal() += q;
    return k;
  };
  auto objective = [&](const Matrix& k) {
    const double ld = linalg::logdet_spd(k, ErrorCode::NotPD);
    return detail::penalized(-ld + k.cwiseProduct(s.mat()).sum(), w, cfg.regularizer);
  };

  LearnTrace trace;
  trace.initial_objective = objective(model_matrix());
  double previous = trace.initial_objective;
  for (int sweep = 0; sweep < cfg.max_sweeps; ++sweep) {
    Matrix c = linalg::inverse_spd(model_matrix(), ErrorCode::NotPD);
    detail::edge_sweep(w, c, s.mat(), 2.0 * cfg.regularizer);
    // q_i solves S_ii = [(L + Q)^-1]_ii in closed form: adding t to q_i maps
    // C_ii to C_ii / (1 + t C_ii).
    for (Index i = 0; i < n; ++i) {
      const double target = std::max(q(i) + 1.0 / s(i, i) - 1.0 / c(i, i), q_floor);
      const double step = target - q(i);
      if (step == 0.0) continue;
      q(i) = target;
      const Vector u = c.col(i);
      c.noalias() -= (step / (1.0 + step * u(i))) * u * u.transpose();
    }
    const double current = objective(model_matrix());
    trace.objective_per_sweep.push_back(current);
    trace.sweeps_used = sweep + 1;
    if (sweep == 0) detail::check_first_sweep(trace);
    if (detail::sweep_converged(previous, current, cfg.obj_tol)) {
      trace.converged = true;
      break;
    }
    previous = current;
  }

  return {build_graph_model(DenseSymMatrix(w.adjacency(cfg.weight_floor)), q), std::move(trace)};
}

}  // namespace graphsamp
