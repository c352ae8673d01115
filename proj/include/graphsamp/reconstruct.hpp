#pragma once

#include <string>

#include "graphsamp/core.hpp"
#include "graphsamp/sampler.hpp"

namespace graphsamp {

struct ReconstructionProblem {
  DenseSymMatrix omega;
  SamplingSet set;
  double mu = 0.01;
  Vector observations;

  void validate() const {
    if (!(mu > 0.0)) fail(ErrorCode::BadConfig, "mu must be > 0");
    if (set.indices.empty()) fail(ErrorCode::BadBudget, "reconstruction needs a nonempty sampling set");
    set.validate(omega.order());
    if (observations.size() != set.size()) {
      fail(ErrorCode::ShapeMismatch, "observation count differs from sampling set size");
    }
  }
};

namespace detail {

inline Matrix plus_sampling(const Matrix& scaled_omega, const SamplingSet& set) {
  Matrix b = scaled_omega;
  for (Index v : set.indices) b(v, v) += 1.0;
  return b;
}

}  // namespace detail

/// Factors B = H + mu * Omega once and reconstructs any number of sampled
/// signals against it.
class GlrSolver {
 public:
  GlrSolver(const DenseSymMatrix& omega, SamplingSet set, double mu) : set_(std::move(set)), mu_(mu) {
    if (!(mu > 0.0)) fail(ErrorCode::BadConfig, "mu must be > 0");
    if (set_.indices.empty()) fail(ErrorCode::BadBudget, "reconstruction needs a nonempty sampling set");
    set_.validate(omega.order());
    b_ = detail::plus_sampling(mu * omega.mat(), set_);
    llt_.compute(b_);
    if (llt_.info() != Eigen::Success || !(llt_.matrixLLT().diagonal().minCoeff() > 0.0)) {
      fail(ErrorCode::SolveFailure, "H + mu * Omega is not positive definite");
    }
  }

  Index n() const { return b_.rows(); }

  /// (H + mu Omega)^-1 I_S y_S.
  Vector solve(const Vector& observations) const {
    if (observations.size() != set_.size()) {
      fail(ErrorCode::ShapeMismatch, "observation count differs from sampling set size");
    }
    return llt_.solve(upsample(observations));
  }

  /// Reconstructs every row of `signals` (full N-length rows; only the
  /// sampled coordinates are read).
  Matrix solve_rows(const Matrix& signals) const {
    if (signals.cols() != n()) fail(ErrorCode::ShapeMismatch, "signal length differs from graph order");
    Matrix rhs = Matrix::Zero(n(), signals.rows());
    for (Index v : set_.indices) rhs.row(v) = signals.col(v).transpose();
    return llt_.solve(rhs).transpose();
  }

  Vector upsample(const Vector& observations) const {
    Vector rhs = Vector::Zero(n());
    for (Index c = 0; c < set_.size(); ++c) rhs(set_.indices[static_cast<std::size_t>(c)]) = observations(c);
    return rhs;
  }

  const Matrix& coefficient_matrix() const { return b_; }

 private:
  SamplingSet set_;
  double mu_;
  Matrix b_;
  Eigen::LLT<Matrix> llt_;
};

inline Vector glr_reconstruct(const ReconstructionProblem& problem) {
  problem.validate();
  return GlrSolver(problem.omega, problem.set, problem.mu).solve(problem.observations);
}

/// Exact GLR error covariance under unit noise:
/// B^-1 - (mu - mu^2) B^-1 Omega B^-1 with B = H + mu Omega.
inline DenseSymMatrix error_covariance_exact(const DenseSymMatrix& omega, const SamplingSet& set, double mu) {
  if (!(mu > 0.0)) fail(ErrorCode::BadConfig, "mu must be > 0");
  set.validate(omega.order());
  const Matrix b = detail::plus_sampling(mu * omega.mat(), set);
  const Matrix b_inv = linalg::inverse_spd(b, ErrorCode::SolveFailure);
  return DenseSymMatrix::symmetrized(b_inv - (mu - mu * mu) * b_inv * omega.mat() * b_inv);
}

/// Small-mu approximation (H + gamma Omega)^-1, gamma = 2 mu - mu^2.
inline DenseSymMatrix error_covariance_approx(const DenseSymMatrix& omega, const SamplingSet& set, double mu) {
  if (!(mu > 0.0)) fail(ErrorCode::BadConfig, "mu must be > 0");
  set.validate(omega.order());
  const Matrix g = detail::plus_sampling(gamma_from_mu(mu) * omega.mat(), set);
  return DenseSymMatrix::symmetrized(linalg::inverse_spd(g, ErrorCode::SolveFailure));
}

/// -logdet(H + gamma Omega).
inline double doptimal_objective(const DenseSymMatrix& omega, const SamplingSet& set, double gamma) {
  set.validate(omega.order());
  const Matrix g = detail::plus_sampling(gamma * omega.mat(), set);
  return -linalg::logdet_spd(g, ErrorCode::NotPD);
}

}  // namespace graphsamp
