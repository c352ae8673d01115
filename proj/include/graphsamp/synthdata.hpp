#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "graphsamp/core.hpp"
#include "graphsamp/rng.hpp"

namespace graphsamp {

struct Point2 {
  double x;
  double y;
};

/// Node positions in the unit square.
struct NodeLayout {
  std::vector<Point2> points;
  std::uint64_t seed = 0;

  Index n() const { return static_cast<Index>(points.size()); }
};

/// K realizations of an N-dimensional graph signal, one per row.
struct SignalBatch {
  Matrix signals;
  std::uint64_t seed = 0;
  double noise_sigma = 0.0;

  Index count() const { return signals.rows(); }
  Index n() const { return signals.cols(); }
};

inline NodeLayout generate_layout(Index n, std::uint64_t seed) {
  if (n < 2) fail(ErrorCode::BadSize, "layout needs at least 2 nodes, got " + std::to_string(n));
  Rng rng(seed);
  NodeLayout layout;
  layout.seed = seed;
  layout.points.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const double x = rng.uniform();
    const double y = rng.uniform();
    layout.points.push_back({x, y});
  }
  return layout;
}

/// Exponential-kernel Gaussian-process covariance: S_ij = variance * exp(-d_ij / range).
inline DenseSymMatrix gp_covariance(const NodeLayout& layout, double range, double variance) {
  if (!(range > 0.0)) fail(ErrorCode::DegenerateRange, "correlation range must be > 0");
  if (!(variance > 0.0)) fail(ErrorCode::DegenerateRange, "variance must be > 0");
  const Index n = layout.n();
  Matrix s(n, n);
  for (Index i = 0; i < n; ++i) {
    s(i, i) = variance;
    for (Index j = 0; j < i; ++j) {
      const auto& p = layout.points[static_cast<std::size_t>(i)];
      const auto& q = layout.points[static_cast<std::size_t>(j)];
      const double d = std::hypot(p.x - q.x, p.y - q.y);
      s(i, j) = s(j, i) = variance * std::exp(-d / range);
    }
  }
  return DenseSymMatrix(std::move(s));
}

namespace detail {

/// F with F F^T = cov. Cholesky first; on failure add 1e-10 * trace / N to the
/// diagonal (cumulatively, up to 3 times); finally a clipped eigen square root,
/// which covers exactly singular PSD input such as the zero matrix.
inline Matrix covariance_factor(const DenseSymMatrix& cov) {
  const Matrix& c = cov.mat();
  const Index n = c.rows();
  if (!linalg::is_psd(c)) fail(ErrorCode::NotPSD, "covariance is not positive semi-definite");
  const double jitter = 1e-10 * c.trace() / static_cast<double>(n);
  Matrix work = c;
  for (int attempt = 0; attempt <= 3; ++attempt) {
    if (attempt > 0) {
      if (!(jitter > 0.0)) break;
      work.diagonal().array() += jitter;
    }
    if (auto llt = linalg::try_cholesky(work)) return llt->matrixL();
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(c);
  const Vector root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal();
}

}  // namespace detail

inline SignalBatch sample_gaussian_signals(const DenseSymMatrix& cov, Index count, std::uint64_t seed) {
  if (count < 1) fail(ErrorCode::BadSize, "signal count must be >= 1");
  const Matrix factor = detail::covariance_factor(cov);
  const Index n = cov.order();
  Rng rng(seed);
  SignalBatch batch;
  batch.seed = seed;
  batch.signals.resize(count, n);
  Vector z(n);
  for (Index k = 0; k < count; ++k) {
    for (Index i = 0; i < n; ++i) z(i) = rng.normal();
    batch.signals.row(k) = (factor * z).transpose();
  }
  return batch;
}

inline SignalBatch add_noise(const SignalBatch& batch, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) fail(ErrorCode::BadConfig, "noise sigma must be >= 0");
  SignalBatch out = batch;
  out.noise_sigma = sigma;
  if (sigma == 0.0) return out;
  Rng rng(seed);
  for (Index k = 0; k < out.count(); ++k)
    for (Index i = 0; i < out.n(); ++i) out.signals(k, i) += sigma * rng.normal();
  return out;
}

/// (1/K) sum_k f_k f_k^T.
inline DenseSymMatrix empirical_covariance(const SignalBatch& batch) {
  if (batch.count() < 1) fail(ErrorCode::EmptyBatch, "empirical covariance of an empty batch");
  const Matrix& f = batch.signals;
  Matrix s = Matrix::Zero(f.cols(), f.cols());
  s.selfadjointView<Eigen::Lower>().rankUpdate(f.transpose(), 1.0 / static_cast<double>(f.rows()));
  s.triangularView<Eigen::StrictlyUpper>() = s.transpose();
  return DenseSymMatrix::symmetrized(s);
}

}  // namespace graphsamp
