#include "gdl/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace gdl {

namespace {

struct Key {
  const char* name;
  const char* type;
  const char* help;
};

constexpr Key kKeys[] = {
    {"seed", "uint", "base seed for split, model init, generator subset and sizing starts (1)"},
    {"known_frac", "real in (0,1]", "fraction of graphs with known J (0.2)"},
    {"train_frac", "real in (0,1)", "training share of the known set, rest is validation (0.8)"},
    {"features", "baseline|three|onehot", "node features (three)"},
    {"metrics_on", "unknown|validation", "set the reported metrics are computed on (unknown)"},
    {"epochs", "int >= 0", "training epochs (600)"},
    {"lr", "real in (0,1]", "Adam learning rate (0.001)"},
    {"batch_size", "int >= 1", "graphs per step (64)"},
    {"hidden", "int >= 1", "GCN width (64)"},
    {"dropout", "real in [0,1)", "dropout before the readout (0.5)"},
    {"beta1", "real", "Adam first-moment decay (0.9)"},
    {"beta2", "real", "Adam second-moment decay (0.999)"},
    {"epsilon", "real", "Adam epsilon (1e-8)"},
    {"iterations", "int >= 1", "down-selection iterations (4)"},
    {"known_fracs", "comma list", "sweep fractions (0.8 halved eight times)"},
    {"starts", "int >= 1", "sizing multi-start count (8)"},
    {"max_evals", "int >= 1", "objective evaluations per start (1500)"},
    {"jobs", "int >= 1", "sizing threads (1)"},
    {"max_subcircuits", "int in [1,3]", "generator size bound (3)"},
    {"limit", "int >= 0", "generator subset size, 0 keeps all (0)"},
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) throw ConfigError("bad value '" + value + "' for " + key);
  return out;
}

void require(bool ok, const std::string& key, const std::string& value) {
  if (!ok) throw ConfigError("value '" + value + "' out of range for " + key);
}

}  // namespace

TrainConfig RunConfig::training() const {
  TrainConfig t = train;
  t.seed = seed;
  return t;
}

SizingOptions RunConfig::sizing() const {
  SizingOptions s;
  s.starts = starts;
  s.max_evals = max_evals;
  s.seed = seed;
  return s;
}

void apply_setting(RunConfig& c, const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  auto real = [&] { return parse_number<double>(key, v); };
  auto integer = [&] { return parse_number<long long>(key, v); };
  try {
    if (key == "seed") {
      c.seed = parse_number<std::uint64_t>(key, v);
    } else if (key == "known_frac") {
      c.known_fraction = real();
      require(c.known_fraction > 0.0 && c.known_fraction <= 1.0, key, v);
    } else if (key == "train_frac") {
      c.training_fraction = real();
      require(c.training_fraction > 0.0 && c.training_fraction < 1.0, key, v);
    } else if (key == "features") {
      c.features = parse_feature_mode(v);
    } else if (key == "metrics_on") {
      c.metrics_on = parse_metrics_on(v);
    } else if (key == "epochs") {
      const auto n = integer();
      require(n >= 0 && n <= 1000000, key, v);
      c.train.epochs = static_cast<int>(n);
    } else if (key == "lr") {
      c.train.learning_rate = real();
      require(c.train.learning_rate > 0.0 && c.train.learning_rate <= 1.0, key, v);
    } else if (key == "batch_size") {
      const auto n = integer();
      require(n >= 1 && n <= 1000000, key, v);
      c.train.batch_size = static_cast<int>(n);
    } else if (key == "hidden") {
      const auto n = integer();
      require(n >= 1 && n <= 4096, key, v);
      c.train.hidden = static_cast<int>(n);
    } else if (key == "dropout") {
      c.train.dropout_p = real();
      require(c.train.dropout_p >= 0.0 && c.train.dropout_p < 1.0, key, v);
    } else if (key == "beta1") {
      c.train.beta1 = real();
      require(c.train.beta1 >= 0.0 && c.train.beta1 < 1.0, key, v);
    } else if (key == "beta2") {
      c.train.beta2 = real();
      require(c.train.beta2 >= 0.0 && c.train.beta2 < 1.0, key, v);
    } else if (key == "epsilon") {
      c.train.epsilon = real();
      require(c.train.epsilon > 0.0, key, v);
    } else if (key == "iterations") {
      const auto n = integer();
      require(n >= 1 && n <= 64, key, v);
      c.iterations = static_cast<int>(n);
    } else if (key == "known_fracs") {
      std::vector<double> fr;
      std::stringstream ss(v);
      for (std::string item; std::getline(ss, item, ',');) {
        const double f = parse_number<double>(key, trim(item));
        require(f > 0.0 && f <= 1.0, key, item);
        fr.push_back(f);
      }
      require(!fr.empty(), key, v);
      c.known_fractions = std::move(fr);
    } else if (key == "starts") {
      const auto n = integer();
      require(n >= 1 && n <= 100000, key, v);
      c.starts = static_cast<int>(n);
    } else if (key == "max_evals") {
      const auto n = integer();
      require(n >= 1 && n <= 100000000, key, v);
      c.max_evals = static_cast<int>(n);
    } else if (key == "jobs") {
      const auto n = integer();
      require(n >= 1 && n <= 1024, key, v);
      c.jobs = static_cast<int>(n);
    } else if (key == "max_subcircuits") {
      const auto n = integer();
      require(n >= 1 && n <= 3, key, v);
      c.max_subcircuits = static_cast<int>(n);
    } else if (key == "limit") {
      const auto n = integer();
      require(n >= 0, key, v);
      c.limit = static_cast<std::size_t>(n);
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

void apply_config_text(RunConfig& config, const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  for (std::size_t no = 1; std::getline(in, line); ++no) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(source + ":" + std::to_string(no) + ": expected key = value");
    }
    try {
      apply_setting(config, trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(source + ":" + std::to_string(no) + ": " + e.what());
    }
  }
}

void apply_config_file(RunConfig& config, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  apply_config_text(config, ss.str(), path.string());
}

std::string config_schema() {
  std::ostringstream out;
  for (const auto& k : kKeys) out << k.name << " = <" << k.type << ">  " << k.help << '\n';
  return out.str();
}

}  // namespace gdl
