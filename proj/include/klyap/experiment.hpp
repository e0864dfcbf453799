#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "klyap/dynamics.hpp"
#include "klyap/kernels.hpp"
#include "klyap/types.hpp"

namespace klyap {

struct SystemConfig {
  std::string name = "lienard";  // lienard | brusselator | linear
  double a = 1.0;                // brusselator parameters
  double b = 1.0;
  Mat jacobian;  // required for "linear"
};

struct KernelConfig {
  int k = 1;
  double scale = 2.0;
};

struct GridConfig {
  Vec lo;  // defaults to -1.5 per dimension
  Vec hi;
  int resolution = 41;
};

/// Fully resolved experiment description; round-trips losslessly through its
/// JSON form.
struct ExperimentConfig {
  std::string mode;  // spectrum | lyapunov | trend | predict
  SystemConfig system;
  double delta = 0.2;
  int n_traj = 50;
  double horizon = 5.0;
  std::uint64_t seed = 1;
  KernelConfig kernel;
  double ridge = 1e-8;
  std::vector<double> krr_lambdas = {1e-6};
  std::string decay = "norm_squared";
  GridConfig grid;
  std::string outputs;

  int spectrum_degree_max = 8;
  std::vector<int> trend_sizes;      // trajectory counts, strictly increasing
  std::vector<Vec> initial_states;   // predict mode
  int predict_steps = 25;
  int fill_grid = 100;               // fill-distance grid resolution per dim
  double slack_rel = 0.05;           // decay slack as a fraction of max grid w
  double oracle_tol = 1e-6;
  int oracle_t_max = 100000;
};

ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);
std::string resolved_config_json(const ExperimentConfig& cfg);

// Shared construction helpers.
SystemDef build_system(const SystemConfig& cfg);
ProductKernel build_kernel(const KernelConfig& cfg, int dim);
std::vector<std::function<double(const Vec&)>> decay_factors(const std::string& name, int dim);
Mat make_grid(const GridConfig& cfg, int dim);

void run_spectrum(const ExperimentConfig& cfg);
void run_lyapunov(const ExperimentConfig& cfg);
void run_trend(const ExperimentConfig& cfg);
void run_predict(const ExperimentConfig& cfg);

/// Dispatches on cfg.mode; exceptions propagate to the caller.
void run_experiment(const ExperimentConfig& cfg);

/// Exit-code mapping: 2 config/parameter error, 3 numerical error,
/// 4 instability.
int exit_code_for(const std::exception& e);

/// run_experiment wrapped in the exit-code mapping; prints errors to stderr.
int run_with_exit_code(const ExperimentConfig& cfg);

}  // namespace klyap
