#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "klyap/types.hpp"

namespace klyap {

/// A benchmark system: either a continuous-time vector field (discretized by
/// fixed-step RK4 at the sampling interval) or an explicit discrete map.
struct SystemDef {
  std::string name;
  int dim = 0;
  std::function<Vec(const Vec&)> vector_field;  // empty for explicit maps
  std::function<Vec(const Vec&)> discrete_map;  // empty for ODE systems
  Mat jacobian_at_origin;  // of the vector field, or of the map itself
  Box domain;
};

// Built-in systems. The Brusselator is stored in coordinates shifted so that
// its equilibrium (a, b/a) sits at the origin.
SystemDef lienard();
SystemDef brusselator(double a, double b);
SystemDef linear_system(const Mat& jac, double box_halfwidth = 2.0);

/// Paired snapshots y_j = f(x_j) with trajectory provenance; points are
/// matrix columns.
struct SampleSet {
  Mat x;
  Mat y;
  std::vector<int> trajectory;
  std::vector<int> step;
  double delta = 0.0;
  Box domain;

  int n() const { return static_cast<int>(x.cols()); }
  int dim() const { return static_cast<int>(x.rows()); }
};

/// One sampling interval of the system: classical RK4 with substeps fixed
/// substeps (f(x) directly for discrete maps). Throws DivergenceError if the
/// state becomes non-finite.
Vec step(const SystemDef& sys, const Vec& x, double delta, int substeps);
Vec step(const SystemDef& sys, const Vec& x, double delta);  // substeps = 10

/// i.i.d. uniform initial states in the domain box, each trajectory advanced
/// floor(horizon/delta) steps. Each trajectory draws from its own PRNG stream
/// derived from (seed, trajectory index), so datasets with the same seed are
/// nested across n_traj and bit-identical across runs.
SampleSet sample_trajectories(const SystemDef& sys, int n_traj, double horizon, double delta,
                              std::uint64_t seed);

/// Grid approximation of sup_{x in domain} min_j |x - x_j|, converging from
/// below as grid_per_dim grows.
double fill_distance(const Mat& pts, const Box& domain, int grid_per_dim);

/// exp(delta * J) for ODE systems, the map Jacobian itself for discrete maps.
Mat discretized_jacobian(const SystemDef& sys, double delta);

}  // namespace klyap
