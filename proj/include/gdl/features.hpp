#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gdl/graph.hpp"

namespace gdl {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

enum class FeatureColumn { LabelCode, EigenvectorCentrality, BetweennessCentrality, OneHot };

enum class FeatureMode {
  Baseline,      ///< n x 1: label code
  ThreeFeature,  ///< n x 3: label code, eigenvector, betweenness
  OneHot,        ///< n x 7: one-hot label (optional alternative encoding)
};

FeatureMode parse_feature_mode(const std::string& name);
std::string to_string(FeatureMode mode);
int feature_width(FeatureMode mode);

struct FeatureMatrix {
  Matrix values;
  std::vector<std::string> columns;

  int rows() const { return static_cast<int>(values.rows()); }
  int cols() const { return static_cast<int>(values.cols()); }
};

/// I=0, O=1, G=2, N=3, R=4, C=5, L=6.
double label_code(Label label);
Vector encode_labels(const CircuitGraph& g);

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// Perron vector of the adjacency matrix by power iteration from the
/// all-ones vector. The iteration runs on A + I, which has the same
/// eigenvectors but no -lambda partner, so bipartite graphs converge too.
/// Result is nonnegative with unit 2-norm and satisfies
/// ||Av - lambda v|| <= tol ||v||.
Vector eigenvector_centrality(const AdjacencyList& adjacency, double tol = 1e-10,
                              int max_iter = 10000);
Vector eigenvector_centrality(const CircuitGraph& g, double tol = 1e-10, int max_iter = 10000);

/// Unordered-pair betweenness normalized by (n-1)(n-2)/2 (Brandes
/// accumulation). All zeros when n < 3.
Vector betweenness_centrality(const AdjacencyList& adjacency);
Vector betweenness_centrality(const CircuitGraph& g);

FeatureMatrix assemble_features(const CircuitGraph& g, FeatureMode mode);

std::string features_to_csv(const FeatureMatrix& x);

}  // namespace gdl
