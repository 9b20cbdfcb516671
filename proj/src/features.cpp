#include "gdl/features.hpp"

#include <cmath>
#include <deque>
#include <sstream>

namespace gdl {

FeatureMode parse_feature_mode(const std::string& name) {
  if (name == "baseline") return FeatureMode::Baseline;
  if (name == "three" || name == "three-feature") return FeatureMode::ThreeFeature;
  if (name == "onehot" || name == "one-hot") return FeatureMode::OneHot;
  throw std::invalid_argument("unknown feature mode '" + name + "'");
}

std::string to_string(FeatureMode mode) {
  switch (mode) {
    case FeatureMode::Baseline: return "baseline";
    case FeatureMode::ThreeFeature: return "three";
    case FeatureMode::OneHot: return "onehot";
  }
  return "baseline";
}

int feature_width(FeatureMode mode) {
  switch (mode) {
    case FeatureMode::Baseline: return 1;
    case FeatureMode::ThreeFeature: return 3;
    case FeatureMode::OneHot: return static_cast<int>(kLabelAlphabet.size());
  }
  return 1;
}

double label_code(Label label) { return static_cast<double>(static_cast<int>(label)); }

Vector encode_labels(const CircuitGraph& g) {
  Vector v(g.node_count());
  for (int i = 0; i < g.node_count(); ++i) v[i] = label_code(g.label(i));
  return v;
}

Vector eigenvector_centrality(const AdjacencyList& adjacency, double tol, int max_iter) {
  const int n = static_cast<int>(adjacency.size());
  if (n == 0) return Vector();
  auto multiply = [&](const Vector& x) {
    Vector y = Vector::Zero(n);
    for (int i = 0; i < n; ++i)
      for (int j : adjacency[static_cast<std::size_t>(i)]) y[i] += x[j];
    return y;
  };

  Vector v = Vector::Ones(n).normalized();
  double residual = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    const Vector av = multiply(v);
    const double lambda = v.dot(av);
    residual = (av - lambda * v).norm();
    if (residual <= tol) {
      return v.cwiseMax(0.0);
    }
    v = (av + v).normalized();
  }
  throw ConvergenceError("eigenvector centrality did not converge after " +
                             std::to_string(max_iter) + " iterations (residual " +
                             std::to_string(residual) + ")",
                         residual);
}

Vector eigenvector_centrality(const CircuitGraph& g, double tol, int max_iter) {
  return eigenvector_centrality(g.adjacency_list(), tol, max_iter);
}

Vector betweenness_centrality(const AdjacencyList& adjacency) {
  const int n = static_cast<int>(adjacency.size());
  Vector cb = Vector::Zero(n);
  if (n < 3) return cb;

  std::vector<int> order;
  std::vector<double> sigma(static_cast<std::size_t>(n)), delta(static_cast<std::size_t>(n));
  std::vector<int> dist(static_cast<std::size_t>(n));
  std::vector<std::vector<int>> preds(static_cast<std::size_t>(n));
  for (int s = 0; s < n; ++s) {
    order.clear();
    for (int v = 0; v < n; ++v) {
      preds[static_cast<std::size_t>(v)].clear();
      sigma[static_cast<std::size_t>(v)] = 0.0;
      delta[static_cast<std::size_t>(v)] = 0.0;
      dist[static_cast<std::size_t>(v)] = -1;
    }
    sigma[static_cast<std::size_t>(s)] = 1.0;
    dist[static_cast<std::size_t>(s)] = 0;
    std::deque<int> queue{s};
    while (!queue.empty()) {
      const int v = queue.front();
      queue.pop_front();
      order.push_back(v);
      for (int w : adjacency[static_cast<std::size_t>(v)]) {
        auto& dw = dist[static_cast<std::size_t>(w)];
        if (dw < 0) {
          dw = dist[static_cast<std::size_t>(v)] + 1;
          queue.push_back(w);
        }
        if (dw == dist[static_cast<std::size_t>(v)] + 1) {
          sigma[static_cast<std::size_t>(w)] += sigma[static_cast<std::size_t>(v)];
          preds[static_cast<std::size_t>(w)].push_back(v);
        }
      }
    }
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const int w = *it;
      for (int v : preds[static_cast<std::size_t>(w)]) {
        delta[static_cast<std::size_t>(v)] += sigma[static_cast<std::size_t>(v)] /
                                              sigma[static_cast<std::size_t>(w)] *
                                              (1.0 + delta[static_cast<std::size_t>(w)]);
      }
      if (w != s) cb[w] += delta[static_cast<std::size_t>(w)];
    }
  }
  // Every unordered pair was accumulated from both endpoints.
  const double pairs = 0.5 * (n - 1) * (n - 2);
  return cb / (2.0 * pairs);
}

Vector betweenness_centrality(const CircuitGraph& g) {
  return betweenness_centrality(g.adjacency_list());
}

FeatureMatrix assemble_features(const CircuitGraph& g, FeatureMode mode) {
  const int n = g.node_count();
  FeatureMatrix x;
  switch (mode) {
    case FeatureMode::Baseline:
      x.values = encode_labels(g);
      x.columns = {"label_code"};
      break;
    case FeatureMode::ThreeFeature: {
      const auto adj = g.adjacency_list();
      x.values.resize(n, 3);
      x.values.col(0) = encode_labels(g);
      x.values.col(1) = eigenvector_centrality(adj);
      x.values.col(2) = betweenness_centrality(adj);
      x.columns = {"label_code", "eigenvector_centrality", "betweenness_centrality"};
      break;
    }
    case FeatureMode::OneHot:
      x.values = Matrix::Zero(n, feature_width(mode));
      for (int i = 0; i < n; ++i) x.values(i, static_cast<int>(g.label(i))) = 1.0;
      for (char c : kLabelAlphabet) x.columns.push_back(std::string("is_") + c);
      break;
  }
  return x;
}

std::string features_to_csv(const FeatureMatrix& x) {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t c = 0; c < x.columns.size(); ++c) os << (c ? "," : "") << x.columns[c];
  os << '\n';
  for (int i = 0; i < x.rows(); ++i) {
    for (int j = 0; j < x.cols(); ++j) os << (j ? "," : "") << x.values(i, j);
    os << '\n';
  }
  return os.str();
}

}  // namespace gdl
