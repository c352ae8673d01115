#include <gtest/gtest.h>

#include <random>
#include <set>

#include "graphsamp/sampler.hpp"
#include "oracles.hpp"

namespace graphsamp {
namespace {

std::vector<Index> ascending(std::vector<Index> v) {
  std::sort(v.begin(), v.end());
  return v;
}

TEST(Greedy, FirstPickIsLargestInverseDiagonal) {
  const Matrix omega = Vector((Vector(3) << 1, 2, 4).finished()).asDiagonal();
  // Oracle: logdet(delta delta^T + Omega) for each singleton.
  Index best = -1;
  double best_val = -1e300;
  for (Index j = 0; j < 3; ++j) {
    const double v = oracle::subset_logdet(omega, {j});
    if (v > best_val) best_val = v, best = j;
  }
  ASSERT_EQ(best, 0);
  const auto set = greedy_doptimal(DenseSymMatrix(omega), 1, 1.0);
  EXPECT_EQ(set.indices, std::vector<Index>{0});
  EXPECT_NEAR(set.scores[0], 1.0, 1e-15);
}

TEST(Greedy, TiesBreakToLowestIndex) {
  const auto set = greedy_doptimal(DenseSymMatrix::identity(5), 2, 1.0);
  EXPECT_EQ(set.indices, (std::vector<Index>{0, 1}));
}

TEST(Greedy, MatchesBruteForceGreedyAndPrefixStable) {
  std::mt19937_64 gen(101);
  for (int trial = 0; trial < 30; ++trial) {
    const Index n = 4 + trial % 9;
    const Index k = 1 + trial % 4;
    const double gamma = 0.3 + 0.1 * (trial % 5);
    const Matrix omega = oracle::random_pd(n, gen);
    const auto set = greedy_doptimal(DenseSymMatrix::symmetrized(omega), k, gamma);
    EXPECT_EQ(set.indices, oracle::brute_greedy(gamma * omega, k));
    for (Index m = 1; m < k; ++m) {
      const auto prefix = greedy_doptimal(DenseSymMatrix::symmetrized(omega), m, gamma);
      EXPECT_TRUE(std::equal(prefix.indices.begin(), prefix.indices.end(), set.indices.begin()));
    }
  }
}

TEST(Greedy, ObjectiveStrictlyIncreases) {
  std::mt19937_64 gen(5);
  const Matrix omega = oracle::random_pd(15, gen);
  const auto set = greedy_doptimal(DenseSymMatrix::symmetrized(omega), 15, 0.1);
  double prev = oracle::logdet_lu(0.1 * omega);
  std::vector<Index> prefix;
  for (std::size_t c = 0; c < set.indices.size(); ++c) {
    prefix.push_back(set.indices[c]);
    const double cur = oracle::subset_logdet(0.1 * omega, prefix);
    EXPECT_GT(cur, prev);
    EXPECT_NEAR(cur - prev, std::log1p(set.scores[c]), 1e-8);
    prev = cur;
  }
}

TEST(Greedy, SingularOperatorHandling) {
  const Matrix l = oracle::laplacian_of(oracle::cycle_adjacency(6));
  try {
    greedy_doptimal(DenseSymMatrix(l), 2, 1.0, /*shift_singular=*/false);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SingularOperator);
  }
  const auto set = greedy_doptimal(DenseSymMatrix(l), 3, 1.0);
  EXPECT_EQ(set.size(), 3);
  Matrix shifted = l;
  shifted.array() += 1.0 / 6.0;
  EXPECT_EQ(set.indices, oracle::brute_greedy(shifted, 3));
}

TEST(Greedy, BudgetValidation) {
  EXPECT_THROW(greedy_doptimal(DenseSymMatrix::identity(3), 0, 1.0), Error);
  EXPECT_THROW(greedy_doptimal(DenseSymMatrix::identity(3), 4, 1.0), Error);
}

TEST(ShermanMorrison, IdentityExample) {
  DOptState state(DenseSymMatrix::identity(2), 1.0);
  const auto next = sm_update(state, 0);
  EXPECT_TRUE(next.g_inv().isApprox((Matrix(2, 2) << 0.5, 0, 0, 1).finished(), 1e-15));
  EXPECT_TRUE(state.selected().indices.empty());
  try {
    sm_update(next, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::AlreadySelected);
  }
}

TEST(ShermanMorrison, MatchesDirectInverse) {
  std::mt19937_64 gen(33);
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = 3 + trial;
    const Matrix omega = oracle::random_pd(n, gen);
    DOptState state(DenseSymMatrix::symmetrized(omega), 0.7);
    const Index j = trial % n;
    state.add(j);
    Matrix g = 0.7 * omega;
    g(j, j) += 1.0;
    EXPECT_LE(linalg::frobenius_rel(state.g_inv(), oracle::inverse_lu(g)), 1e-8);
  }
}

TEST(ShermanMorrison, AllUpdatesReachFullSampling) {
  std::mt19937_64 gen(4);
  const Index n = 40;
  const Matrix omega = oracle::random_pd(n, gen);
  DOptState state(DenseSymMatrix::symmetrized(omega), 0.5);
  for (Index j = n - 1; j >= 0; --j) {
    state.add(j);
    EXPECT_LE(state.inverse_residual(), 1e-6 * static_cast<double>(n));
  }
  const Matrix full = Matrix::Identity(n, n) + 0.5 * omega;
  EXPECT_LE(linalg::frobenius_rel(state.g_inv(), oracle::inverse_lu(full)), 1e-8);
}

GraphModel with_importance(const Matrix& a, const Vector& q) { return build_graph_model(DenseSymMatrix(a), q); }

TEST(Vis, SortsByImportance) {
  const Matrix a = oracle::path_adjacency(3);
  EXPECT_EQ(vis_select(with_importance(a, (Vector(3) << 3, 1, 2).finished()), 2).indices,
            (std::vector<Index>{0, 2}));
  EXPECT_EQ(vis_select(with_importance(a, Vector::Ones(3)), 3).indices, (std::vector<Index>{0, 1, 2}));
}

TEST(Vis, ScaleInvariant) {
  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> u(0.1, 2.0);
  const Matrix a = oracle::random_adjacency(20, 0.2, gen);
  Vector q(20);
  for (Index i = 0; i < 20; ++i) q(i) = u(gen);
  const auto base = vis_select(with_importance(a, q), 7).indices;
  for (double c : {0.01, 3.0, 1e4}) EXPECT_EQ(vis_select(with_importance(a, c * q), 7).indices, base);
}

TEST(Vis, MissingImportance) {
  const auto g = build_graph_model(DenseSymMatrix(oracle::path_adjacency(3)));
  try {
    vis_select(g, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingImportance);
  }
  EXPECT_THROW(visr_select(g, 1), Error);
}

TEST(RepulsionFilter, TwoNodePath) {
  const auto g = build_graph_model(DenseSymMatrix(oracle::path_adjacency(2)));
  EXPECT_EQ(build_repulsion_filter(g, 1).z, (Matrix(2, 2) << 0, 1, 1, 0).finished());
  EXPECT_EQ(build_repulsion_filter(g, 2).z, (Matrix(2, 2) << 1, 1, 1, 1).finished());
}

TEST(RepulsionFilter, ColumnsAreLocalizedToHopBall) {
  std::mt19937_64 gen(12);
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = 5 + trial;
    const Matrix a = oracle::random_adjacency(n, 2.5 / static_cast<double>(n), gen);
    const auto g = build_graph_model(DenseSymMatrix(a));
    const auto dist = oracle::hop_distances(a);
    for (int p = 1; p <= 3; ++p) {
      const auto f = build_repulsion_filter(g, p);
      for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j)
          if (dist[std::size_t(i)][std::size_t(j)] > p) { EXPECT_EQ(f.z(j, i), 0.0); }
      for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) EXPECT_NEAR(f.gram(i, j), f.column(i).dot(f.column(j)), 1e-10);
      EXPECT_TRUE(linalg::is_psd(f.gram));
    }
  }
}

TEST(RepulsionFilter, IsolatedVertexPolicy) {
  Matrix a = Matrix::Zero(3, 3);
  a(0, 1) = a(1, 0) = 1.0;
  const auto g = build_graph_model(DenseSymMatrix(a));
  const auto f = build_repulsion_filter(g, 2);
  EXPECT_TRUE(f.z.row(2).isZero(0.0));
  EXPECT_TRUE(f.z.col(2).isZero(0.0));
  try {
    build_repulsion_filter(g, 1, IsolatedVertexPolicy::Strict);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IsolatedVertex);
  }
}

TEST(Visr, SingleSelectionEqualsVis) {
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(0.1, 2.0);
  const Matrix a = oracle::random_adjacency(15, 0.3, gen);
  Vector q(15);
  for (Index i = 0; i < 15; ++i) q(i) = u(gen);
  const auto g = with_importance(a, q);
  EXPECT_EQ(visr_select(g, 1).indices, vis_select(g, 1).indices);
}

TEST(Visr, AutomaticHopCount) {
  EXPECT_EQ(auto_hop_count(100, 20), 3);
  EXPECT_EQ(auto_hop_count(100, 50), 1);
  EXPECT_EQ(auto_hop_count(100, 5), 10);
  EXPECT_EQ(auto_hop_count(100, 25), 2);
}

TEST(Visr, FourNodePathSecondPick) {
  const Vector q = (Vector(4) << 10, 9.9, 1, 1).finished();
  const auto g = with_importance(oracle::path_adjacency(4), q);
  const auto set = visr_select(g, 2, 1);
  ASSERT_EQ(set.indices.front(), 0);
  // Brute-force evaluation of q_x - <z_x, z_0> over the three candidates.
  const Matrix walk = g.degrees().cwiseInverse().asDiagonal() * g.adjacency().mat();
  Index best = -1;
  double best_score = -1e300;
  for (Index x = 1; x < 4; ++x) {
    const double score = q(x) - walk.col(x).dot(walk.col(0));
    if (score > best_score) best_score = score, best = x;
  }
  EXPECT_EQ(set.indices[1], best);
  EXPECT_NEAR(set.scores[1], best_score, 1e-12);
}

TEST(Visr, CyclePenaltyStructure) {
  // On a cycle with p = 1, z_i is supported on {i-1, i+1}: adjacent vertices
  // have disjoint supports, vertices two apart share one neighbour.
  const Index n = 12;
  const auto g = with_importance(oracle::cycle_adjacency(n), Vector::Ones(n));
  const auto f = build_repulsion_filter(g, 1);
  const auto dist = oracle::hop_distances(oracle::cycle_adjacency(n));
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      const auto d = dist[std::size_t(i)][std::size_t(j)];
      if (d == 0) { EXPECT_NEAR(f.gram(i, j), 0.5, 1e-15); }
      if (d == 1) { EXPECT_EQ(f.gram(i, j), 0.0); }
      if (d == 2) { EXPECT_NEAR(f.gram(i, j), 0.25, 1e-15); }
      if (d > 2) { EXPECT_EQ(f.gram(i, j), 0.0); }
    }
  }
  // So the second pick after vertex 0 is its neighbour 1.
  EXPECT_EQ(visr_select(g, 2, 1).indices, (std::vector<Index>{0, 1}));
}

TEST(Visr, SeparatesSelectionsWhenFilterIncludesTwoHops) {
  const Index n = 30;
  const auto g = with_importance(oracle::cycle_adjacency(n), Vector::Ones(n));
  const auto dist = oracle::hop_distances(oracle::cycle_adjacency(n));
  const auto set = visr_select(g, 6, 2);
  for (Index a : set.indices)
    for (Index b : set.indices)
      if (a != b) { EXPECT_GE(dist[std::size_t(a)][std::size_t(b)], 2); }
}

TEST(RandomFixed, Basics) {
  EXPECT_EQ(ascending(random_select_fixed(6, 6, 1).indices), (std::vector<Index>{0, 1, 2, 3, 4, 5}));
  EXPECT_EQ(random_select_fixed(50, 10, 3).indices, random_select_fixed(50, 10, 3).indices);
  EXPECT_THROW(random_select_fixed(5, 0, 1), Error);
  EXPECT_THROW(random_select_fixed(5, 6, 1), Error);
  const auto s = random_select_fixed(40, 15, 8);
  EXPECT_EQ(std::set<Index>(s.indices.begin(), s.indices.end()).size(), 15u);
}

TEST(RandomFixed, UniformOverSeeds) {
  int zeros = 0;
  for (std::uint64_t seed = 0; seed < 10000; ++seed) zeros += random_select_fixed(2, 1, seed).indices[0] == 0;
  EXPECT_NEAR(zeros / 10000.0, 0.5, 0.02);
}

TEST(Bernoulli, Basics) {
  EXPECT_EQ(random_select_bernoulli(7, 1.0, 0).indices.size(), 7u);
  EXPECT_EQ(random_select_bernoulli(100, 0.05, 4).indices, random_select_bernoulli(100, 0.05, 4).indices);
  EXPECT_THROW(random_select_bernoulli(10, 0.0, 1), Error);
  EXPECT_THROW(random_select_bernoulli(10, 1.5, 1), Error);
  for (std::uint64_t seed = 0; seed < 200; ++seed) EXPECT_FALSE(random_select_bernoulli(100, 0.01, seed).indices.empty());
}

TEST(Bernoulli, UnconditionedMeanSize) {
  double total = 0.0;
  for (std::uint64_t seed = 0; seed < 10000; ++seed) total += static_cast<double>(bernoulli_draw(100, 0.01, seed).size());
  EXPECT_NEAR(total / 10000.0, 1.0, 0.1);
}

}  // namespace
}  // namespace graphsamp
