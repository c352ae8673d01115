#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "graphsamp/error.hpp"

namespace graphsamp {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Relative tolerance used for every positive semi-definiteness decision.
inline constexpr double kPsdTolerance = 1e-8;

/// Square symmetric real matrix. Symmetry is exact: construction mirrors the
/// upper triangle after checking the input is symmetric to round-off.
class DenseSymMatrix {
 public:
  DenseSymMatrix() = default;

  explicit DenseSymMatrix(Matrix m, double sym_tol = 1e-9) : m_(std::move(m)) {
    if (m_.rows() < 1 || m_.rows() != m_.cols()) {
      fail(ErrorCode::BadSize, "symmetric matrix must be square with order >= 1, got " +
                                   std::to_string(m_.rows()) + "x" + std::to_string(m_.cols()));
    }
    if (!m_.allFinite()) fail(ErrorCode::BadSize, "matrix has non-finite entries");
    const double scale = std::max(1.0, m_.cwiseAbs().maxCoeff());
    if ((m_ - m_.transpose()).cwiseAbs().maxCoeff() > sym_tol * scale) {
      fail(ErrorCode::NotSymmetric, "matrix is not symmetric");
    }
    symmetrize();
  }

  /// Builds from an expression known to be symmetric up to round-off
  /// (products like B^-1 Omega B^-1); no tolerance check.
  static DenseSymMatrix symmetrized(const Matrix& m) {
    DenseSymMatrix out;
    out.m_ = 0.5 * (m + m.transpose());
    return out;
  }

  static DenseSymMatrix identity(Index n) { return DenseSymMatrix(Matrix::Identity(n, n)); }
  static DenseSymMatrix zero(Index n) { return DenseSymMatrix(Matrix::Zero(n, n)); }

  Index order() const { return m_.rows(); }
  double operator()(Index i, Index j) const { return m_(i, j); }
  const Matrix& mat() const { return m_; }

 private:
  void symmetrize() {
    m_.triangularView<Eigen::StrictlyLower>() = m_.transpose().triangularView<Eigen::StrictlyLower>();
  }

  Matrix m_;
};

namespace linalg {

struct EigenRange {
  double min;
  double max;
};

inline EigenRange eigen_range(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  return {es.eigenvalues()(0), es.eigenvalues()(es.eigenvalues().size() - 1)};
}

inline bool is_psd(const Matrix& m, double rel_tol = kPsdTolerance) {
  const auto r = eigen_range(m);
  return r.min >= -rel_tol * std::max(std::abs(r.max), 0.0);
}

/// Cholesky factor of an SPD matrix, or nullopt if the factorization breaks down.
inline std::optional<Eigen::LLT<Matrix>> try_cholesky(const Matrix& m) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) return std::nullopt;
  // Pivots at rounding level relative to the diagonal mean the matrix is
  // numerically singular even though the factorization ran through.
  const auto d = llt.matrixLLT().diagonal();
  if (!d.allFinite() || !(d.minCoeff() > 0.0)) return std::nullopt;
  if (d.array().square().minCoeff() <= 1e-14 * m.diagonal().cwiseAbs().maxCoeff()) return std::nullopt;
  return llt;
}

inline double logdet(const Eigen::LLT<Matrix>& llt) {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

/// log det of an SPD matrix; throws `code` when it is not positive definite.
inline double logdet_spd(const Matrix& m, ErrorCode code = ErrorCode::NotPD) {
  auto llt = try_cholesky(m);
  if (!llt) fail(code, "matrix is not positive definite");
  return logdet(*llt);
}

inline Matrix inverse_spd(const Matrix& m, ErrorCode code = ErrorCode::NotPD) {
  auto llt = try_cholesky(m);
  if (!llt) fail(code, "matrix is not positive definite");
  Matrix inv = llt->solve(Matrix::Identity(m.rows(), m.cols()));
  return 0.5 * (inv + inv.transpose());
}

inline double frobenius_rel(const Matrix& a, const Matrix& ref) {
  const double denom = ref.norm();
  return denom > 0.0 ? (a - ref).norm() / denom : (a - ref).norm();
}

}  // namespace linalg

/// Moore-Penrose pseudo-inverse of a PSD matrix via eigendecomposition.
/// Eigenvalues below `rank_tol * lambda_max` are treated as zero.
inline DenseSymMatrix pinv_psd(const DenseSymMatrix& m, double rank_tol = 1e-10) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m.mat());
  const Vector& lambda = es.eigenvalues();
  const double lmax = lambda.maxCoeff();
  if (lambda.minCoeff() < -kPsdTolerance * std::max(lmax, 0.0)) {
    fail(ErrorCode::NotPSD, "pinv_psd: smallest eigenvalue " + std::to_string(lambda.minCoeff()));
  }
  Vector inv = Vector::Zero(lambda.size());
  for (Index i = 0; i < lambda.size(); ++i) {
    if (lmax > 0.0 && lambda(i) > rank_tol * lmax) inv(i) = 1.0 / lambda(i);
  }
  const Matrix& u = es.eigenvectors();
  return DenseSymMatrix::symmetrized(u * inv.asDiagonal() * u.transpose());
}

/// Undirected weighted graph with its combinatorial Laplacian L = D - A and an
/// optional vertex-importance diagonal Q (the DDGL is L + Q).
class GraphModel {
 public:
  Index n() const { return adjacency_.order(); }
  const DenseSymMatrix& adjacency() const { return adjacency_; }
  const Vector& degrees() const { return degrees_; }
  const DenseSymMatrix& laplacian() const { return laplacian_; }
  const std::optional<Vector>& vertex_importance() const { return importance_; }
  bool has_importance() const { return importance_.has_value(); }

  const Vector& importance_or_throw() const {
    if (!importance_) fail(ErrorCode::MissingImportance, "graph has no vertex importance (q)");
    return *importance_;
  }

  /// L + diag(q); requires vertex importance.
  DenseSymMatrix ddgl() const {
    Matrix m = laplacian_.mat();
    m.diagonal() += importance_or_throw();
    return DenseSymMatrix::symmetrized(m);
  }

  Index edge_count(double floor = 0.0) const {
    Index count = 0;
    for (Index j = 0; j < n(); ++j)
      for (Index i = 0; i < j; ++i)
        if (adjacency_(i, j) > floor) ++count;
    return count;
  }

 private:
  friend GraphModel build_graph_model(const DenseSymMatrix&, std::optional<Vector>);
  GraphModel() = default;

  DenseSymMatrix adjacency_;
  Vector degrees_;
  DenseSymMatrix laplacian_;
  std::optional<Vector> importance_;
};

inline GraphModel build_graph_model(const DenseSymMatrix& adjacency,
                                    std::optional<Vector> vertex_importance = std::nullopt) {
  const Index n = adjacency.order();
  const Matrix& a = adjacency.mat();
  for (Index i = 0; i < n; ++i) {
    if (a(i, i) != 0.0) fail(ErrorCode::NonzeroDiagonal, "adjacency diagonal at " + std::to_string(i));
    for (Index j = 0; j < n; ++j) {
      if (a(i, j) < 0.0) {
        fail(ErrorCode::NegativeWeight,
             "negative weight at (" + std::to_string(i) + "," + std::to_string(j) + ")");
      }
    }
  }
  if (vertex_importance) {
    if (vertex_importance->size() != n) {
      fail(ErrorCode::ShapeMismatch, "vertex importance length differs from graph order");
    }
    for (Index i = 0; i < n; ++i) {
      if (!((*vertex_importance)(i) > 0.0)) {
        fail(ErrorCode::NonPositiveImportance, "q_" + std::to_string(i) + " <= 0");
      }
    }
  }

  GraphModel g;
  g.adjacency_ = adjacency;
  g.degrees_ = a.rowwise().sum();
  Matrix l = -a;
  l.diagonal() = g.degrees_;
  g.laplacian_ = DenseSymMatrix::symmetrized(l);
  g.importance_ = std::move(vertex_importance);
  return g;
}

/// Checks every GraphModel invariant numerically; used by tests and by the
/// learners before returning.
inline bool satisfies_invariants(const GraphModel& g) {
  const Matrix& l = g.laplacian().mat();
  const double scale = std::max(1.0, l.cwiseAbs().maxCoeff());
  if (l.rowwise().sum().cwiseAbs().maxCoeff() > 1e-9 * scale) return false;
  for (Index i = 0; i < l.rows(); ++i) {
    if (l(i, i) < 0.0) return false;
    for (Index j = 0; j < l.cols(); ++j)
      if (i != j && l(i, j) > 0.0) return false;
  }
  if (!linalg::is_psd(l)) return false;
  if (g.has_importance()) {
    if ((g.vertex_importance()->array() <= 0.0).any()) return false;
    if (!linalg::try_cholesky(g.ddgl().mat())) return false;
  }
  return true;
}

/// Ordered selection of distinct vertices, with the score each one had when picked.
struct SamplingSet {
  std::vector<Index> indices;
  std::vector<double> scores;
  std::string method;

  Index size() const { return static_cast<Index>(indices.size()); }

  bool contains(Index v) const {
    return std::find(indices.begin(), indices.end(), v) != indices.end();
  }

  void validate(Index n) const {
    std::unordered_set<Index> seen;
    for (Index v : indices) {
      if (v < 0 || v >= n) {
        fail(ErrorCode::IndexOutOfRange, "vertex " + std::to_string(v) + " outside [0, " + std::to_string(n) + ")");
      }
      if (!seen.insert(v).second) fail(ErrorCode::AlreadySelected, "duplicate vertex " + std::to_string(v));
    }
    if (!scores.empty() && scores.size() != indices.size()) {
      fail(ErrorCode::ShapeMismatch, "scores length differs from indices length");
    }
  }
};

/// Diagonal 0/1 sampling matrix H = I_S I_S^T.
inline Eigen::DiagonalMatrix<double, Eigen::Dynamic> sampling_operator(const SamplingSet& set, Index n) {
  set.validate(n);
  Vector h = Vector::Zero(n);
  for (Index v : set.indices) h(v) = 1.0;
  return Eigen::DiagonalMatrix<double, Eigen::Dynamic>(h);
}

/// The N x |S| selection matrix I_S, column c is the delta at indices[c].
inline Matrix selection_matrix(const SamplingSet& set, Index n) {
  set.validate(n);
  Matrix is = Matrix::Zero(n, set.size());
  for (Index c = 0; c < set.size(); ++c) is(set.indices[static_cast<std::size_t>(c)], c) = 1.0;
  return is;
}

}  // namespace graphsamp
