#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "splitmax/analysis.hpp"

// Line-oriented "key = value" experiment configuration with dotted keys.
// '#' starts a comment, blank lines are skipped, keys may not repeat, and
// unknown keys are rejected so typos fail loudly.

namespace splitmax {

using ConfigMap = std::map<std::string, std::string>;

ConfigMap parse_config_text(const std::string& text);
ConfigMap load_config_file(const std::string& path);

/// FNV-1a over "key=value\n" in sorted key order; independent of the order
/// keys appear in the file.
std::uint64_t config_hash(const ConfigMap& kv);

struct ExperimentConfig {
  ConfigMap raw;
  std::uint64_t hash = 0;

  GridSpec grid;
  NoiseSpec noise;
  std::string preset = "smooth-bump";
  int mode_k = 1;
  double t_final = 0.5;
  std::vector<int> ladder{3, 4, 5, 6, 7};  // tau = T * 2^-e
  int ref_exponent = 9;
  int samples = 64;
  std::vector<Scheme> schemes{Scheme::Exact};
  SplitOrder order{};
  int energy_steps = 64;
  int energy_samples = 500;
  int divergence_steps = 8;
  int divergence_samples = 8;
  double audit_tau = 0.1;
};

ExperimentConfig make_experiment_config(const ConfigMap& kv);
ExperimentConfig load_experiment_config(const std::string& path);

}  // namespace splitmax
