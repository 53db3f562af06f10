#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sscn/kernels.hpp"
#include "sscn/oracle.hpp"
#include "sscn/solver.hpp"
#include "sscn/synthetic.hpp"

namespace sscn {

struct DatasetSource {
  std::optional<std::string> libsvm_path;  // resolved against the config's directory
  std::optional<SyntheticSpec> synthetic;
};

struct ObjectiveSpec {
  ObjectiveKind kind = ObjectiveKind::logistic;
  double lambda = 0.0;                // logistic ridge, folded into f
  std::optional<double> sigma;        // log-sum-exp smoothing
  RegularizerSpec regularizer;        // extra separable psi
};

struct AlgorithmEntry {
  std::string name;
  RunConfig run;
  bool lipschitz_probabilities = false;  // sampler p = "lipschitz": p_j proportional to L_j
};

/// One JSON document. Unknown keys anywhere are rejected.
struct ExperimentConfig {
  DatasetSource dataset;
  ObjectiveSpec objective;
  std::vector<AlgorithmEntry> algorithms;
  std::vector<std::uint64_t> seeds;
  std::string output_dir = "output";
  bool normalize = false;
  int parallel = 1;
  kernels::Policy kernels = kernels::Policy::serial;
  bool zeta = false;
  Index zeta_trials = 100000;
  bool reference = true;       // compute F* (needed for the gap column)
  std::string fingerprint;     // canonical dump of dataset + objective + normalize
};

// Throws ConfigError naming the offending key.
ExperimentConfig parse_config(const std::string& json_text, const std::string& base_dir = ".");
ExperimentConfig load_config(const std::string& path);

struct Instance {
  std::shared_ptr<Objective> objective;
  Vector x0;
  std::optional<double> f_star;   // known in closed form (synthetic quadratic)
  std::optional<Vector> x_star;
  std::vector<std::string> warnings;
};

Instance build_instance(const ExperimentConfig& cfg);

}  // namespace sscn
