#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "gdl/features.hpp"
#include "gdl/gnn.hpp"
#include "gdl/pipeline.hpp"
#include "gdl/sizing.hpp"

namespace gdl {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Everything a CLI run depends on. `seed` feeds the split, the model, the
/// generator subset and the sizing starts.
struct RunConfig {
  std::uint64_t seed = 1;
  double known_fraction = 0.2;
  double training_fraction = 0.8;
  FeatureMode features = FeatureMode::ThreeFeature;
  MetricsOn metrics_on = MetricsOn::Unknown;
  TrainConfig train;
  int iterations = 4;
  std::vector<double> known_fractions = kSweepFractions;
  int starts = 8;
  int max_evals = 1500;
  int jobs = 1;
  int max_subcircuits = 3;
  std::size_t limit = 0;

  SplitSpec split() const { return {known_fraction, training_fraction, seed}; }
  TrainConfig training() const;
  SizingOptions sizing() const;
};

/// Sets one key. Throws ConfigError on an unknown key or a bad value.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);

/// `key = value` lines; `#` starts a comment, blank lines are ignored.
void apply_config_text(RunConfig& config, const std::string& text, const std::string& source = "<config>");
void apply_config_file(RunConfig& config, const std::filesystem::path& path);

/// Key, value type and default for every setting.
std::string config_schema();

}  // namespace gdl
