#include "klyap/dynamics.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include <unsupported/Eigen/MatrixFunctions>

namespace klyap {

namespace {

Vec rk4_substeps(const std::function<Vec(const Vec&)>& f, Vec x, double delta, int substeps) {
  const double h = delta / substeps;
  for (int i = 0; i < substeps; ++i) {
    const Vec k1 = f(x);
    const Vec k2 = f(x + (0.5 * h) * k1);
    const Vec k3 = f(x + (0.5 * h) * k2);
    const Vec k4 = f(x + h * k3);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return x;
}

// Uniform double in [0,1) from the top 53 bits, independent of the standard
// library's distribution implementation.
double uniform01(std::mt19937_64& eng) { return (eng() >> 11) * 0x1.0p-53; }

}  // namespace

SystemDef lienard() {
  SystemDef sys;
  sys.name = "lienard";
  sys.dim = 2;
  sys.vector_field = [](const Vec& x) {
    Vec dx(2);
    dx(0) = x(1);
    dx(1) = -x(0) / (1.0 + x(0) * x(0)) - x(1);
    return dx;
  };
  sys.jacobian_at_origin = (Mat(2, 2) << 0, 1, -1, -1).finished();
  sys.domain = square_box(2, 2.0);
  return sys;
}

SystemDef brusselator(double a, double b) {
  if (!(a > 0.0)) throw std::invalid_argument("brusselator: a must be positive");
  SystemDef sys;
  sys.name = "brusselator";
  sys.dim = 2;
  // State shifted by the equilibrium (a, b/a) so that f(0) = 0.
  sys.vector_field = [a, b](const Vec& z) {
    const double x1 = z(0) + a;
    const double x2 = z(1) + b / a;
    Vec dx(2);
    dx(0) = a + x1 * x1 * x2 - (b + 1.0) * x1;
    dx(1) = b * x1 - x1 * x1 * x2;
    return dx;
  };
  sys.jacobian_at_origin = (Mat(2, 2) << b - 1.0, a * a, -b, -a * a).finished();
  sys.domain = square_box(2, 2.0);
  return sys;
}

SystemDef linear_system(const Mat& jac, double box_halfwidth) {
  if (jac.rows() != jac.cols() || jac.rows() < 1)
    throw std::invalid_argument("linear_system: jacobian must be square");
  SystemDef sys;
  sys.name = "linear";
  sys.dim = static_cast<int>(jac.rows());
  Mat J = jac;
  sys.vector_field = [J](const Vec& x) { return Vec(J * x); };
  sys.jacobian_at_origin = J;
  sys.domain = square_box(sys.dim, box_halfwidth);
  return sys;
}

Vec step(const SystemDef& sys, const Vec& x, double delta, int substeps) {
  if (x.size() != sys.dim) throw std::invalid_argument("step: state dimension mismatch");
  Vec out = sys.discrete_map ? sys.discrete_map(x) : rk4_substeps(sys.vector_field, x, delta, substeps);
  if (!out.allFinite())
    throw DivergenceError("step: integration produced a non-finite state for system " + sys.name);
  return out;
}

Vec step(const SystemDef& sys, const Vec& x, double delta) { return step(sys, x, delta, 10); }

SampleSet sample_trajectories(const SystemDef& sys, int n_traj, double horizon, double delta,
                              std::uint64_t seed) {
  if (n_traj < 1) throw std::invalid_argument("sample_trajectories: need at least one trajectory");
  if (!(delta > 0.0)) throw std::invalid_argument("sample_trajectories: delta must be positive");
  if (horizon < delta) throw std::invalid_argument("sample_trajectories: horizon shorter than delta");
  const int steps_per_traj = static_cast<int>(std::floor(horizon / delta + 1e-9));
  const int n = n_traj * steps_per_traj;

  SampleSet out;
  out.x.resize(sys.dim, n);
  out.y.resize(sys.dim, n);
  out.trajectory.resize(n);
  out.step.resize(n);
  out.delta = delta;
  out.domain = sys.domain;

  int col = 0;
  for (int t = 0; t < n_traj; ++t) {
    std::seed_seq ss{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                     static_cast<std::uint32_t>(t)};
    std::mt19937_64 eng(ss);
    Vec x(sys.dim);
    for (int i = 0; i < sys.dim; ++i)
      x(i) = sys.domain.lo(i) + uniform01(eng) * (sys.domain.hi(i) - sys.domain.lo(i));
    for (int s = 0; s < steps_per_traj; ++s) {
      const Vec y = step(sys, x, delta);
      out.x.col(col) = x;
      out.y.col(col) = y;
      out.trajectory[col] = t;
      out.step[col] = s;
      ++col;
      x = y;
    }
  }
  return out;
}

double fill_distance(const Mat& pts, const Box& domain, int grid_per_dim) {
  if (pts.cols() == 0) throw std::invalid_argument("fill_distance: empty point set");
  if (grid_per_dim < 2) throw std::invalid_argument("fill_distance: grid_per_dim must be >= 2");
  const int d = domain.dim();
  if (pts.rows() != d) throw std::invalid_argument("fill_distance: dimension mismatch");

  std::vector<int> idx(d, 0);
  Vec g(d);
  double worst_sq = 0.0;
  while (true) {
    for (int i = 0; i < d; ++i)
      g(i) = domain.lo(i) + (domain.hi(i) - domain.lo(i)) * idx[i] / (grid_per_dim - 1);
    double best_sq = (pts.col(0) - g).squaredNorm();
    for (int j = 1; j < pts.cols(); ++j) {
      const double sq = (pts.col(j) - g).squaredNorm();
      if (sq < best_sq) best_sq = sq;
    }
    if (best_sq > worst_sq) worst_sq = best_sq;
    int k = 0;
    while (k < d && ++idx[k] == grid_per_dim) idx[k++] = 0;
    if (k == d) break;
  }
  return std::sqrt(worst_sq);
}

Mat discretized_jacobian(const SystemDef& sys, double delta) {
  if (sys.discrete_map) return sys.jacobian_at_origin;
  return (delta * sys.jacobian_at_origin).exp();
}

}  // namespace klyap
