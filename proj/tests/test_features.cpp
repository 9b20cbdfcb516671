#include <numeric>

#include <gtest/gtest.h>

#include "gdl/features.hpp"
#include "gdl/random.hpp"
#include "oracles.hpp"

using namespace gdl;

namespace {

AdjacencyList path(int n) {
  AdjacencyList a(static_cast<std::size_t>(n));
  for (int i = 0; i + 1 < n; ++i) {
    a[static_cast<std::size_t>(i)].push_back(i + 1);
    a[static_cast<std::size_t>(i + 1)].push_back(i);
  }
  return a;
}

AdjacencyList complete(int n) {
  AdjacencyList a(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) a[static_cast<std::size_t>(i)].push_back(j);
  return a;
}

AdjacencyList cycle(int n) {
  auto a = path(n);
  a[0].push_back(n - 1);
  a[static_cast<std::size_t>(n - 1)].push_back(0);
  return a;
}

AdjacencyList star(int leaves) {
  AdjacencyList a(static_cast<std::size_t>(leaves + 1));
  for (int i = 1; i <= leaves; ++i) {
    a[0].push_back(i);
    a[static_cast<std::size_t>(i)].push_back(0);
  }
  return a;
}

}  // namespace

TEST(EncodeLabels, ThirteenNodeColumn) {
  const auto v = encode_labels(oracle::thirteen_node());
  const std::vector<double> expect = {0, 4, 6, 3, 5, 4, 6, 3, 1, 4, 6, 5, 2};
  ASSERT_EQ(v.size(), 13);
  for (int i = 0; i < 13; ++i) EXPECT_EQ(v(i), expect[static_cast<std::size_t>(i)]);
}

TEST(EncodeLabels, ConstantChain) {
  std::vector<Edge> edges;
  for (int i = 0; i < 5; ++i) edges.push_back({i, i + 1});
  const CircuitGraph g("n", labels_from_string("NNNNNN"), edges);
  EXPECT_TRUE((encode_labels(g).array() == 3.0).all());
}

TEST(EncodeLabels, FollowsPermutation) {
  const auto g = oracle::thirteen_node();
  std::vector<int> perm(13);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(3);
  rng.shuffle(perm);
  const auto a = encode_labels(g);
  const auto b = encode_labels(g.permuted(perm));
  for (int i = 0; i < 13; ++i) EXPECT_EQ(b(perm[static_cast<std::size_t>(i)]), a(i));
}

TEST(EigenvectorCentrality, CompleteGraphIsUniform) {
  const auto v = eigenvector_centrality(complete(4));
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(v(i), 0.5, 1e-9);
}

TEST(EigenvectorCentrality, PathOfThree) {
  const auto v = eigenvector_centrality(path(3));
  EXPECT_NEAR(v(0), 0.5, 1e-9);
  EXPECT_NEAR(v(1), std::sqrt(0.5), 1e-9);
  EXPECT_NEAR(v(2), 0.5, 1e-9);
}

TEST(EigenvectorCentrality, Star) {
  const auto v = eigenvector_centrality(star(3));
  EXPECT_NEAR(v(0), std::sqrt(0.5), 1e-9);
  for (int i = 1; i < 4; ++i) EXPECT_NEAR(v(i), 1.0 / std::sqrt(6.0), 1e-9);
}

TEST(EigenvectorCentrality, BipartiteEvenCycleConverges) {
  const auto v = eigenvector_centrality(cycle(6));
  for (int i = 0; i < 6; ++i) EXPECT_NEAR(v(i), 1.0 / std::sqrt(6.0), 1e-9);
}

TEST(EigenvectorCentrality, ResidualHoldsAtTolerance) {
  Rng rng(21);
  int checked = 0;
  while (checked < 100) {
    const int n = 3 + static_cast<int>(rng.below(10));
    const auto m = oracle::random_adjacency(n, 0.35, rng);
    if (!oracle::connected(m)) continue;
    const auto a = oracle::to_list(m);
    const auto v = eigenvector_centrality(a);
    Vector av = Vector::Zero(n);
    for (int i = 0; i < n; ++i)
      for (int j : a[static_cast<std::size_t>(i)]) av(i) += v(j);
    const double lambda = v.dot(av);
    EXPECT_LE((av - lambda * v).norm(), 1e-10 * v.norm() + 1e-14);
    EXPECT_NEAR(v.norm(), 1.0, 1e-12);
    EXPECT_GE(v.minCoeff(), 0.0);
    ++checked;
  }
}

TEST(EigenvectorCentrality, IterationLimitThrows) {
  EXPECT_THROW(eigenvector_centrality(oracle::thirteen_node(), 1e-14, 1), ConvergenceError);
}

TEST(EigenvectorCentrality, MatchesDenseSolver) {
  Rng rng(99);
  int checked = 0;
  for (int t = 0; t < 300; ++t) {
    const int n = 2 + static_cast<int>(rng.below(6));
    const auto m = oracle::random_adjacency(n, 0.5, rng);
    if (!oracle::connected(m)) continue;
    const auto got = eigenvector_centrality(oracle::to_list(m));
    const auto want = oracle::dense_eigenvector_centrality(m);
    EXPECT_LE((got - want).cwiseAbs().maxCoeff(), 1e-8);
    ++checked;
  }
  EXPECT_GT(checked, 50);
}

TEST(Betweenness, PathOfThree) {
  const auto b = betweenness_centrality(path(3));
  EXPECT_EQ(b(0), 0.0);
  EXPECT_EQ(b(1), 1.0);
  EXPECT_EQ(b(2), 0.0);
}

TEST(Betweenness, FourCycle) {
  const auto b = betweenness_centrality(cycle(4));
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(b(i), 1.0 / 6.0, 1e-15);
}

TEST(Betweenness, TinyGraphsAreZero) {
  EXPECT_EQ(betweenness_centrality(path(2)).norm(), 0.0);
  EXPECT_EQ(betweenness_centrality(AdjacencyList(1)).size(), 1);
}

TEST(Betweenness, MatchesPathEnumeration) {
  Rng rng(7);
  int checked = 0;
  for (int t = 0; t < 300; ++t) {
    const int n = 3 + static_cast<int>(rng.below(5));
    const auto m = oracle::random_adjacency(n, 0.45, rng);
    if (!oracle::connected(m)) continue;
    const auto got = betweenness_centrality(oracle::to_list(m));
    const auto want = oracle::brute_force_betweenness(m);
    for (int i = 0; i < n; ++i) EXPECT_NEAR(got(i), want[static_cast<std::size_t>(i)], 1e-12);
    ++checked;
  }
  EXPECT_GT(checked, 50);
}

TEST(AssembleFeatures, Shapes) {
  const auto g = oracle::thirteen_node();
  const auto base = assemble_features(g, FeatureMode::Baseline);
  EXPECT_EQ(base.rows(), 13);
  EXPECT_EQ(base.cols(), 1);
  const auto three = assemble_features(g, FeatureMode::ThreeFeature);
  EXPECT_EQ(three.rows(), 13);
  EXPECT_EQ(three.cols(), 3);
  EXPECT_EQ(three.columns.size(), 3u);
  EXPECT_EQ(assemble_features(g, FeatureMode::OneHot).cols(), 7);
  EXPECT_EQ(feature_width(FeatureMode::ThreeFeature), 3);
}

TEST(AssembleFeatures, ColumnOrderAndFiniteness) {
  const auto g = oracle::thirteen_node();
  const auto x = assemble_features(g, FeatureMode::ThreeFeature);
  EXPECT_TRUE(x.values.allFinite());
  EXPECT_TRUE((x.values.col(0).array() == encode_labels(g).array()).all());
  EXPECT_LE((x.values.col(1) - eigenvector_centrality(g)).norm(), 0.0);
  EXPECT_LE((x.values.col(2) - betweenness_centrality(g)).norm(), 0.0);
  EXPECT_GE(x.values.col(1).minCoeff(), 0.0);
  EXPECT_GE(x.values.col(2).minCoeff(), 0.0);
}

TEST(AssembleFeatures, PermutationEquivariant) {
  const auto g = oracle::thirteen_node();
  Rng rng(17);
  const auto x = assemble_features(g, FeatureMode::ThreeFeature).values;
  for (int t = 0; t < 20; ++t) {
    std::vector<int> perm(13);
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);
    const auto y = assemble_features(g.permuted(perm), FeatureMode::ThreeFeature).values;
    for (int i = 0; i < 13; ++i) {
      EXPECT_EQ(y(perm[static_cast<std::size_t>(i)], 0), x(i, 0));
      EXPECT_NEAR(y(perm[static_cast<std::size_t>(i)], 1), x(i, 1), 1e-12);
      EXPECT_NEAR(y(perm[static_cast<std::size_t>(i)], 2), x(i, 2), 1e-12);
    }
  }
}

TEST(AssembleFeatures, CentralitiesIgnoreLabels) {
  const auto g = oracle::thirteen_node();
  const CircuitGraph relabeled("x", labels_from_string("NNNNNNNNNNNNN"), g.edges());
  const auto a = assemble_features(g, FeatureMode::ThreeFeature).values;
  const auto b = assemble_features(relabeled, FeatureMode::ThreeFeature).values;
  EXPECT_EQ(a.col(1), b.col(1));
  EXPECT_EQ(a.col(2), b.col(2));
}

TEST(AssembleFeatures, CsvHasHeaderAndRows) {
  const auto csv = features_to_csv(assemble_features(oracle::rc_lowpass(), FeatureMode::ThreeFeature));
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 6);
  EXPECT_EQ(csv.rfind("label_code", 0), 0u) << csv;
}

TEST(FeatureMode, Parse) {
  EXPECT_EQ(parse_feature_mode("baseline"), FeatureMode::Baseline);
  EXPECT_EQ(parse_feature_mode("three"), FeatureMode::ThreeFeature);
  EXPECT_THROW(parse_feature_mode("four"), std::invalid_argument);
}
