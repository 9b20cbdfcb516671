#include "gdl/gnn.hpp"

#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "json.hpp"

namespace gdl {

namespace {

Matrix uniform_matrix(int rows, int cols, double bound, Rng& rng) {
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = rng.uniform(-bound, bound);
  return m;
}

Matrix aggregate(const Matrix& x, const AdjacencyList& adjacency) {
  Matrix s = Matrix::Zero(x.rows(), x.cols());
  for (std::size_t i = 0; i < adjacency.size(); ++i)
    for (int j : adjacency[i]) s.row(static_cast<Eigen::Index>(i)) += x.row(j);
  return s;
}

bool same_bits(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

void check_layer_input(const GcnLayer& layer, const Matrix& x, const AdjacencyList& adjacency) {
  if (x.cols() != layer.in_width()) {
    throw ShapeError("feature width " + std::to_string(x.cols()) + " != layer input width " +
                     std::to_string(layer.in_width()));
  }
  if (static_cast<std::size_t>(x.rows()) != adjacency.size()) {
    throw ShapeError("feature rows do not match node count");
  }
}

}  // namespace

Parameters Parameters::zeros_like() const {
  Parameters z;
  for (const auto& l : layers) {
    z.layers.push_back({Matrix::Zero(l.w_self.rows(), l.w_self.cols()),
                        Matrix::Zero(l.w_neighbor.rows(), l.w_neighbor.cols())});
  }
  z.readout_weight = Matrix::Zero(readout_weight.rows(), readout_weight.cols());
  z.readout_bias.setZero();
  return z;
}

std::size_t Parameters::size() const {
  std::size_t n = 2;
  for (const auto& l : layers) n += static_cast<std::size_t>(l.w_self.size() + l.w_neighbor.size());
  return n + static_cast<std::size_t>(readout_weight.size());
}

std::vector<double> Parameters::flatten() const {
  std::vector<double> out;
  out.reserve(size());
  auto push = [&out](const auto& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) out.push_back(m.data()[i]);
  };
  for (const auto& l : layers) {
    push(l.w_self);
    push(l.w_neighbor);
  }
  push(readout_weight);
  push(readout_bias);
  return out;
}

void Parameters::unflatten(std::span<const double> flat) {
  if (flat.size() != size()) throw ShapeError("flat parameter size mismatch");
  std::size_t k = 0;
  auto pull = [&](auto& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = flat[k++];
  };
  for (auto& l : layers) {
    pull(l.w_self);
    pull(l.w_neighbor);
  }
  pull(readout_weight);
  pull(readout_bias);
}

GdlModel GdlModel::initialize(int input_width, int hidden, double dropout_p, std::uint64_t seed,
                              int gcn_layers) {
  if (input_width < 1 || hidden < 1 || gcn_layers < 1) throw ShapeError("widths must be positive");
  if (!(dropout_p >= 0.0 && dropout_p < 1.0)) throw std::invalid_argument("dropout_p must be in [0, 1)");
  GdlModel m;
  m.input_width = input_width;
  m.hidden = hidden;
  m.dropout_p = dropout_p;
  m.init_seed = seed;
  Rng rng(seed);
  int in = input_width;
  for (int l = 0; l < gcn_layers; ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    GcnLayer layer;
    layer.w_self = uniform_matrix(in, hidden, bound, rng);
    layer.w_neighbor = uniform_matrix(in, hidden, bound, rng);
    m.params.layers.push_back(std::move(layer));
    in = hidden;
  }
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
  m.params.readout_weight = uniform_matrix(2, hidden, bound, rng);
  m.params.readout_bias = Eigen::RowVector2d(rng.uniform(-bound, bound), rng.uniform(-bound, bound));
  return m;
}

void GdlModel::check() const {
  if (params.layers.empty()) throw ShapeError("model has no GCN layers");
  int in = input_width;
  for (const auto& l : params.layers) {
    if (l.in_width() != in || l.w_neighbor.rows() != in || l.out_width() != hidden ||
        l.w_neighbor.cols() != hidden) {
      throw ShapeError("GCN layer shapes do not chain");
    }
    in = hidden;
  }
  if (params.readout_weight.rows() != 2 || params.readout_weight.cols() != hidden) {
    throw ShapeError("readout weight must be 2 x hidden");
  }
  if (!(dropout_p >= 0.0 && dropout_p < 1.0)) throw std::invalid_argument("dropout_p must be in [0, 1)");
}

bool operator==(const GdlModel& a, const GdlModel& b) {
  if (a.input_width != b.input_width || a.hidden != b.hidden || a.init_seed != b.init_seed ||
      std::memcmp(&a.dropout_p, &b.dropout_p, sizeof(double)) != 0 ||
      a.params.layers.size() != b.params.layers.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.params.layers.size(); ++i) {
    if (!same_bits(a.params.layers[i].w_self, b.params.layers[i].w_self) ||
        !same_bits(a.params.layers[i].w_neighbor, b.params.layers[i].w_neighbor)) {
      return false;
    }
  }
  return same_bits(a.params.readout_weight, b.params.readout_weight) &&
         std::memcmp(a.params.readout_bias.data(), b.params.readout_bias.data(), 2 * sizeof(double)) == 0;
}

GraphSample make_sample(const CircuitGraph& g, FeatureMode mode, int label) {
  return {g.adjacency_list(), assemble_features(g, mode).values, label};
}

Matrix gcn_forward(const GcnLayer& layer, const Matrix& x, const AdjacencyList& adjacency) {
  check_layer_input(layer, x, adjacency);
  Matrix z = x * layer.w_self;
  z.noalias() += aggregate(x, adjacency) * layer.w_neighbor;
  return z.cwiseMax(0.0);
}

Matrix global_mean_pool(const Matrix& x, std::span<const int> membership, int graph_count) {
  if (static_cast<Eigen::Index>(membership.size()) != x.rows()) {
    throw ShapeError("membership must cover every row");
  }
  Matrix out = Matrix::Zero(graph_count, x.cols());
  std::vector<int> counts(static_cast<std::size_t>(graph_count), 0);
  for (std::size_t i = 0; i < membership.size(); ++i) {
    const int g = membership[i];
    if (g < 0 || g >= graph_count) throw ShapeError("membership index out of range");
    out.row(g) += x.row(static_cast<Eigen::Index>(i));
    ++counts[static_cast<std::size_t>(g)];
  }
  for (int g = 0; g < graph_count; ++g) {
    if (counts[static_cast<std::size_t>(g)] == 0) {
      throw ShapeError("graph " + std::to_string(g) + " has no nodes");
    }
    out.row(g) /= static_cast<double>(counts[static_cast<std::size_t>(g)]);
  }
  return out;
}

Eigen::RowVectorXd dropout(const Eigen::RowVectorXd& x, double p, bool training, Rng& rng,
                           Eigen::RowVectorXd* mask) {
  if (!(p >= 0.0 && p < 1.0)) throw std::invalid_argument("dropout p must be in [0, 1)");
  if (!training || p == 0.0) {
    if (mask) *mask = Eigen::RowVectorXd::Ones(x.size());
    return x;
  }
  Eigen::RowVectorXd m(x.size());
  const double keep_scale = 1.0 / (1.0 - p);
  for (Eigen::Index i = 0; i < x.size(); ++i) m[i] = rng.uniform() < p ? 0.0 : keep_scale;
  if (mask) *mask = m;
  return x.cwiseProduct(m);
}

Logits linear_readout(const GdlModel& model, const Eigen::RowVectorXd& r) {
  if (r.size() != model.params.readout_weight.cols()) throw ShapeError("readout input width mismatch");
  return r * model.params.readout_weight.transpose() + model.params.readout_bias;
}

double cross_entropy(const Logits& logits, int label) {
  if (label != 0 && label != 1) throw std::invalid_argument("label must be 0 or 1");
  const double mx = logits.maxCoeff();
  const double lse = mx + std::log(std::exp(logits[0] - mx) + std::exp(logits[1] - mx));
  return lse - logits[label];
}

namespace {

struct ForwardCache {
  std::vector<Matrix> inputs;      // X_l
  std::vector<Matrix> aggregated;  // A X_l
  std::vector<Matrix> pre;         // Z_l
  Eigen::RowVectorXd pooled_dropped;
  Eigen::RowVectorXd mask;
  Logits logits;
};

ForwardCache forward_cached(const GdlModel& model, const GraphSample& s, Rng* dropout_rng) {
  ForwardCache c;
  Matrix x = s.features;
  for (const auto& layer : model.params.layers) {
    check_layer_input(layer, x, s.adjacency);
    Matrix agg = aggregate(x, s.adjacency);
    Matrix z = x * layer.w_self;
    z.noalias() += agg * layer.w_neighbor;
    Matrix next = z.cwiseMax(0.0);
    c.inputs.push_back(std::move(x));
    c.aggregated.push_back(std::move(agg));
    c.pre.push_back(std::move(z));
    x = std::move(next);
  }
  if (x.rows() == 0) throw ShapeError("graph has no nodes");
  const Eigen::RowVectorXd pooled = x.colwise().mean();
  if (dropout_rng) {
    c.pooled_dropped = dropout(pooled, model.dropout_p, true, *dropout_rng, &c.mask);
  } else {
    c.pooled_dropped = pooled;
    c.mask = Eigen::RowVectorXd::Ones(pooled.size());
  }
  c.logits = linear_readout(model, c.pooled_dropped);
  return c;
}

void accumulate_gradient(const GdlModel& model, const GraphSample& s, const ForwardCache& c,
                         double weight, Parameters& g) {
  const double mx = c.logits.maxCoeff();
  Logits prob(std::exp(c.logits[0] - mx), std::exp(c.logits[1] - mx));
  prob /= prob.sum();
  Logits dy = prob;
  dy[s.label] -= 1.0;
  dy *= weight;

  g.readout_weight.noalias() += dy.transpose() * c.pooled_dropped;
  g.readout_bias += dy;
  const Eigen::RowVectorXd dpooled = (dy * model.params.readout_weight).cwiseProduct(c.mask);

  const auto n = c.inputs.front().rows();
  Matrix dx = dpooled.replicate(n, 1) / static_cast<double>(n);
  for (std::size_t l = model.params.layers.size(); l-- > 0;) {
    const auto& layer = model.params.layers[l];
    const Matrix dz = dx.cwiseProduct((c.pre[l].array() > 0.0).cast<double>().matrix());
    g.layers[l].w_self.noalias() += c.inputs[l].transpose() * dz;
    g.layers[l].w_neighbor.noalias() += c.aggregated[l].transpose() * dz;
    if (l > 0) {
      Matrix through_neighbors = dz * layer.w_neighbor.transpose();
      dx = dz * layer.w_self.transpose();
      dx += aggregate(through_neighbors, s.adjacency);  // A is symmetric
    }
  }
}

}  // namespace

Logits forward(const GdlModel& model, const GraphSample& sample) {
  return forward_cached(model, sample, nullptr).logits;
}

LossAndGradient backward(const GdlModel& model, std::span<const GraphSample* const> batch, Rng* dropout_rng) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  LossAndGradient out;
  out.gradient = model.params.zeros_like();
  const double weight = 1.0 / static_cast<double>(batch.size());
  for (const GraphSample* s : batch) {
    const auto cache = forward_cached(model, *s, dropout_rng);
    out.loss += cross_entropy(cache.logits, s->label) * weight;
    accumulate_gradient(model, *s, cache, weight, out.gradient);
    out.logits.push_back(cache.logits);
  }
  return out;
}

LossAndGradient backward(const GdlModel& model, std::span<const GraphSample> batch, Rng* dropout_rng) {
  std::vector<const GraphSample*> ptrs;
  ptrs.reserve(batch.size());
  for (const auto& s : batch) ptrs.push_back(&s);
  return backward(model, std::span<const GraphSample* const>(ptrs), dropout_rng);
}

AdamState AdamState::zeros_for(const Parameters& p) { return {p.zeros_like(), p.zeros_like(), 0}; }

namespace {

template <typename M>
void adam_update(M& p, const M& g, M& m, M& v, const AdamConfig& c, double corr1, double corr2) {
  m = c.beta1 * m + (1.0 - c.beta1) * g;
  v = c.beta2 * v + (1.0 - c.beta2) * g.cwiseProduct(g);
  p.array() -= c.learning_rate * (m.array() / corr1) / ((v.array() / corr2).sqrt() + c.epsilon);
}

}  // namespace

void adam_step(Parameters& params, const Parameters& grads, AdamState& state, const AdamConfig& config) {
  ++state.step;
  const double corr1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step));
  const double corr2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step));
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    adam_update(params.layers[l].w_self, grads.layers[l].w_self, state.first_moment.layers[l].w_self,
                state.second_moment.layers[l].w_self, config, corr1, corr2);
    adam_update(params.layers[l].w_neighbor, grads.layers[l].w_neighbor,
                state.first_moment.layers[l].w_neighbor, state.second_moment.layers[l].w_neighbor,
                config, corr1, corr2);
  }
  adam_update(params.readout_weight, grads.readout_weight, state.first_moment.readout_weight,
              state.second_moment.readout_weight, config, corr1, corr2);
  adam_update(params.readout_bias, grads.readout_bias, state.first_moment.readout_bias,
              state.second_moment.readout_bias, config, corr1, corr2);
}

void TrainConfig::check() const {
  if (!(learning_rate > 0.0 && learning_rate <= 1.0)) throw std::invalid_argument("learning_rate must be in (0, 1]");
  if (epochs < 0) throw std::invalid_argument("epochs must be >= 0");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (!(dropout_p >= 0.0 && dropout_p < 1.0)) throw std::invalid_argument("dropout_p must be in [0, 1)");
  if (hidden < 1) throw std::invalid_argument("hidden must be >= 1");
}

Prediction predict(const GdlModel& model, std::span<const GraphSample> samples) {
  model.check();
  Prediction p;
  p.classes.reserve(samples.size());
  p.logits.reserve(samples.size());
  for (const auto& s : samples) {
    const Logits y = forward(model, s);
    p.logits.push_back(y);
    p.classes.push_back(y[1] > y[0] ? 1 : 0);
  }
  return p;
}

double accuracy_on(const GdlModel& model, std::span<const GraphSample> samples) {
  if (samples.empty()) return std::numeric_limits<double>::quiet_NaN();
  const auto p = predict(model, samples);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) correct += p.classes[i] == samples[i].label;
  return static_cast<double>(correct) / static_cast<double>(samples.size());
}

TrainOutcome train(const GdlModel& init, std::span<const GraphSample> training,
                   std::span<const GraphSample> validation, const TrainConfig& config) {
  config.check();
  init.check();
  TrainOutcome out{init, {}};
  if (config.epochs == 0) return out;
  if (training.empty()) throw std::invalid_argument("empty training set");
  for (const auto& s : training) {
    if (s.features.cols() != init.input_width) throw ShapeError("training feature width mismatch");
    if (s.label != 0 && s.label != 1) throw std::invalid_argument("training labels must be 0 or 1");
  }
  for (const auto& s : validation) {
    if (s.features.cols() != init.input_width) throw ShapeError("validation feature width mismatch");
  }

  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(config.seed);
  AdamState state = AdamState::zeros_for(out.model.params);
  const AdamConfig adam = config.adam();
  std::vector<std::size_t> order(training.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<const GraphSample*> batch;
  const auto batch_size = static_cast<std::size_t>(config.batch_size);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      batch.clear();
      for (std::size_t i = start; i < std::min(order.size(), start + batch_size); ++i) {
        batch.push_back(&training[order[i]]);
      }
      auto lg = backward(out.model, std::span<const GraphSample* const>(batch), &rng);
      loss_sum += lg.loss * static_cast<double>(batch.size());
      for (std::size_t i = 0; i < batch.size(); ++i) {
        const int cls = lg.logits[i][1] > lg.logits[i][0] ? 1 : 0;
        correct += cls == batch[i]->label;
      }
      adam_step(out.model.params, lg.gradient, state, adam);
    }
    out.history.train_loss.push_back(loss_sum / static_cast<double>(training.size()));
    out.history.train_accuracy.push_back(static_cast<double>(correct) / static_cast<double>(training.size()));
    out.history.validation_accuracy.push_back(accuracy_on(out.model, validation));
  }
  out.history.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

namespace {

using nlohmann::json;

json matrix_to_json(const Matrix& m) {
  std::vector<double> data(m.data(), m.data() + m.size());
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

Matrix matrix_from_json(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(data.size()) != rows * cols) throw ShapeError("matrix data size mismatch");
  Matrix m(rows, cols);
  std::copy(data.begin(), data.end(), m.data());
  return m;
}

json config_to_json(const TrainConfig& c) {
  return {{"learning_rate", c.learning_rate}, {"epochs", c.epochs}, {"batch_size", c.batch_size},
          {"seed", c.seed},                   {"beta1", c.beta1},   {"beta2", c.beta2},
          {"epsilon", c.epsilon},             {"dropout_p", c.dropout_p}, {"hidden", c.hidden}};
}

TrainConfig config_from_json(const json& j) {
  TrainConfig c;
  c.learning_rate = j.at("learning_rate").get<double>();
  c.epochs = j.at("epochs").get<int>();
  c.batch_size = j.at("batch_size").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.beta1 = j.at("beta1").get<double>();
  c.beta2 = j.at("beta2").get<double>();
  c.epsilon = j.at("epsilon").get<double>();
  c.dropout_p = j.at("dropout_p").get<double>();
  c.hidden = j.at("hidden").get<int>();
  return c;
}

}  // namespace

std::string checkpoint_to_json(const Checkpoint& c) {
  json layers = json::array();
  for (const auto& l : c.model.params.layers) {
    layers.push_back({{"w_self", matrix_to_json(l.w_self)}, {"w_neighbor", matrix_to_json(l.w_neighbor)}});
  }
  json j = {{"format", "gdl-model"},
            {"version", kCheckpointVersion},
            {"input_width", c.model.input_width},
            {"hidden", c.model.hidden},
            {"dropout_p", c.model.dropout_p},
            {"init_seed", c.model.init_seed},
            {"layers", layers},
            {"readout_weight", matrix_to_json(c.model.params.readout_weight)},
            {"readout_bias", {c.model.params.readout_bias[0], c.model.params.readout_bias[1]}},
            {"config", config_to_json(c.config)}};
  return j.dump(1);
}

Checkpoint checkpoint_from_json(const std::string& text) {
  const json j = json::parse(text);
  if (j.value("format", "") != "gdl-model") throw std::runtime_error("not a gdl-model checkpoint");
  if (j.at("version").get<int>() != kCheckpointVersion) {
    throw std::runtime_error("unsupported checkpoint version " + std::to_string(j.at("version").get<int>()));
  }
  Checkpoint c;
  c.model.input_width = j.at("input_width").get<int>();
  c.model.hidden = j.at("hidden").get<int>();
  c.model.dropout_p = j.at("dropout_p").get<double>();
  c.model.init_seed = j.at("init_seed").get<std::uint64_t>();
  for (const auto& l : j.at("layers")) {
    c.model.params.layers.push_back({matrix_from_json(l.at("w_self")), matrix_from_json(l.at("w_neighbor"))});
  }
  c.model.params.readout_weight = matrix_from_json(j.at("readout_weight"));
  const auto b = j.at("readout_bias").get<std::vector<double>>();
  if (b.size() != 2) throw ShapeError("readout bias must have 2 entries");
  c.model.params.readout_bias = Eigen::RowVector2d(b[0], b[1]);
  c.config = config_from_json(j.at("config"));
  c.model.check();
  return c;
}

void save_checkpoint(const Checkpoint& c, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << checkpoint_to_json(c) << '\n';
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return checkpoint_from_json(ss.str());
}

}  // namespace gdl
