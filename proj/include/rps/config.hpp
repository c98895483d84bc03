#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rps/model.hpp"

namespace rps {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One experiment description: model selection (builtin name or an inline
// custom definition) plus the per-command parameters. Serialises to a
// key = value document and parses back losslessly.
struct ExperimentConfig {
  std::string model_id = "example1";  // example1 | example2 | custom

  // custom model definition (model_id == "custom")
  int dimension = 1;
  std::vector<double> lambda;
  std::vector<std::string> drift;      // one expression per component
  std::vector<double> diffusion;       // constant intensity per component
  double tau = 1.0;
  double c_f = 0.5;
  double c_g = 1.0;
  double gamma = 1.0;

  // command parameters (each command reads the subset it needs)
  double t0 = -5.0;
  double T = 15.0;
  double h = 0.01;
  std::vector<double> xi = {0.0};
  std::vector<int> i_list = {7, 8, 9, 10, 11, 12};
  int i_ref = 15;
  int n_samples = 5000;
  uint64_t seed = 1;
  std::vector<int> k_list = {0, 1, 2, 3, 4, 5, 6};
  double anchor_t = 0.0;
  double start_t = -5.0;
  double window_lo = 10.0;
  double window_hi = 13.0;
  int shift_periods = 1;
  int p = 1;

  std::string out_dir = ".";
  int workers = 0;  // 0 = hardware concurrency
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& filename);
std::string serialize_config(const ExperimentConfig& cfg);

// Builds the SdeModel described by the config: a builtin by name, or a
// custom model with expression drift (analytic Jacobian derived
// symbolically) and constant diffusion.
SdeModel model_from_config(const ExperimentConfig& cfg);

}  // namespace rps
