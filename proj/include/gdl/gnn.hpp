#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gdl/features.hpp"
#include "gdl/graph.hpp"
#include "gdl/random.hpp"

namespace gdl {

using Logits = Eigen::RowVector2d;

/// X' = relu(X W_self + (A X) W_neighbor); both weights are c_in x c_out and
/// every edge weight is 1.
struct GcnLayer {
  Matrix w_self;
  Matrix w_neighbor;

  int in_width() const { return static_cast<int>(w_self.rows()); }
  int out_width() const { return static_cast<int>(w_self.cols()); }
};

/// Trainable tensors. Also used as the gradient and Adam moment container.
struct Parameters {
  std::vector<GcnLayer> layers;
  /// 2 x h, so that logits = r W^T + b.
  Matrix readout_weight;
  Eigen::RowVector2d readout_bias = Eigen::RowVector2d::Zero();

  Parameters zeros_like() const;
  std::size_t size() const;
  /// Flat view in a fixed order: layers (self, neighbor), readout weight, bias.
  std::vector<double> flatten() const;
  void unflatten(std::span<const double> flat);
};

/// Three GCN layers, global mean pool, dropout, linear readout to 2 logits.
struct GdlModel {
  Parameters params;
  int input_width = 1;
  int hidden = 64;
  double dropout_p = 0.5;
  std::uint64_t init_seed = 0;

  /// Uniform +-1/sqrt(fan_in) initialization from the seeded generator.
  static GdlModel initialize(int input_width, int hidden, double dropout_p, std::uint64_t seed,
                             int gcn_layers = 3);

  void check() const;

  friend bool operator==(const GdlModel& a, const GdlModel& b);
};

/// A graph prepared for the network. label is 0/1 or -1 when unknown.
struct GraphSample {
  AdjacencyList adjacency;
  Matrix features;
  int label = -1;
};

GraphSample make_sample(const CircuitGraph& g, FeatureMode mode, int label = -1);

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// One layer including the ReLU.
Matrix gcn_forward(const GcnLayer& layer, const Matrix& x, const AdjacencyList& adjacency);

/// Mean of each graph's rows. membership[i] is the graph of row i; graphs
/// are numbered 0..graph_count-1 and each must own at least one row.
Matrix global_mean_pool(const Matrix& x, std::span<const int> membership, int graph_count);

/// Inverted dropout: survivors are scaled by 1/(1-p). Identity when not
/// training or p == 0. The applied mask is written to `mask` when non-null.
Eigen::RowVectorXd dropout(const Eigen::RowVectorXd& x, double p, bool training, Rng& rng,
                           Eigen::RowVectorXd* mask = nullptr);

Logits linear_readout(const GdlModel& model, const Eigen::RowVectorXd& r);

/// -log softmax(logits)[label], max-subtracted.
double cross_entropy(const Logits& logits, int label);

/// Forward pass for one graph in evaluation mode.
Logits forward(const GdlModel& model, const GraphSample& sample);

struct LossAndGradient {
  double loss = 0.0;
  Parameters gradient;
  std::vector<Logits> logits;
};

/// Mean cross-entropy over the batch and its exact gradient. With a
/// generator, dropout masks are drawn per graph in batch order; with
/// nullptr dropout is disabled.
LossAndGradient backward(const GdlModel& model, std::span<const GraphSample* const> batch, Rng* dropout_rng);
LossAndGradient backward(const GdlModel& model, std::span<const GraphSample> batch, Rng* dropout_rng);

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  Parameters first_moment;
  Parameters second_moment;
  long step = 0;

  static AdamState zeros_for(const Parameters& p);
};

/// Bias-corrected Adam update in place.
void adam_step(Parameters& params, const Parameters& grads, AdamState& state, const AdamConfig& config);

struct TrainConfig {
  double learning_rate = 1e-3;
  int epochs = 600;
  int batch_size = 64;
  std::uint64_t seed = 1;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double dropout_p = 0.5;
  int hidden = 64;

  void check() const;
  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
  AdamConfig adam() const { return {learning_rate, beta1, beta2, epsilon}; }
};

struct TrainHistory {
  std::vector<double> train_loss;
  std::vector<double> train_accuracy;
  /// Empty validation set gives NaN entries.
  std::vector<double> validation_accuracy;
  double wall_seconds = 0.0;
};

struct TrainOutcome {
  GdlModel model;
  TrainHistory history;
};

/// Mini-batch Adam. The training order is reshuffled every epoch from a
/// generator seeded by config.seed, which also draws dropout masks, so two
/// runs with equal inputs give bitwise-equal weights.
TrainOutcome train(const GdlModel& init, std::span<const GraphSample> training,
                   std::span<const GraphSample> validation, const TrainConfig& config);

struct Prediction {
  std::vector<int> classes;
  std::vector<Logits> logits;
};

Prediction predict(const GdlModel& model, std::span<const GraphSample> samples);

double accuracy_on(const GdlModel& model, std::span<const GraphSample> samples);

struct Checkpoint {
  GdlModel model;
  TrainConfig config;
};

inline constexpr int kCheckpointVersion = 1;

std::string checkpoint_to_json(const Checkpoint& c);
Checkpoint checkpoint_from_json(const std::string& text);
void save_checkpoint(const Checkpoint& c, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace gdl
