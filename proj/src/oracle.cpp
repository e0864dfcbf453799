#include "klyap/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include <Eigen/Eigenvalues>

#include "klyap/lyapunov.hpp"

namespace klyap {

namespace {

using Cplx = std::complex<double>;

void enumerate_products(const CVec& gen, int idx, int degree_left, Cplx acc, bool nontrivial,
                        std::vector<Cplx>& out) {
  if (idx == gen.size()) {
    if (nontrivial) out.push_back(acc);
    return;
  }
  Cplx power(1.0, 0.0);
  for (int p = 0; p <= degree_left; ++p) {
    enumerate_products(gen, idx + 1, degree_left - p, acc * power, nontrivial || p > 0, out);
    power *= gen(idx);
  }
}

}  // namespace

SpectrumTruth exact_spectrum(const CVec& generators, int degree_max) {
  if (generators.size() < 1) throw std::invalid_argument("exact_spectrum: need >= 1 generator");
  if (degree_max < 1) throw std::invalid_argument("exact_spectrum: degree_max must be >= 1");
  for (int i = 0; i < generators.size(); ++i)
    if (std::abs(generators(i)) >= 1.0)
      throw std::invalid_argument("exact_spectrum: generator outside the open unit disk");

  std::vector<Cplx> all;
  enumerate_products(generators, 0, degree_max, Cplx(1.0, 0.0), false, all);

  // Deduplicate within 1e-12, then sort by descending modulus.
  std::vector<Cplx> unique;
  for (const Cplx& v : all) {
    bool seen = false;
    for (const Cplx& u : unique)
      if (std::abs(v - u) <= 1e-12) {
        seen = true;
        break;
      }
    if (!seen) unique.push_back(v);
  }
  std::sort(unique.begin(), unique.end(), [](const Cplx& a, const Cplx& b) {
    const double ma = std::abs(a), mb = std::abs(b);
    if (ma != mb) return ma > mb;
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() > b.imag();
  });

  SpectrumTruth truth;
  truth.generators = generators;
  truth.products.resize(static_cast<int>(unique.size()));
  for (std::size_t i = 0; i < unique.size(); ++i) truth.products(static_cast<int>(i)) = unique[i];
  truth.includes_zero = true;
  return truth;
}

SimulatedValue simulate_lyapunov(const SystemDef& sys, const Vec& x,
                                 const std::function<double(const Vec&)>& w, double delta,
                                 double tol, int t_max) {
  if (x.size() != sys.dim) throw std::invalid_argument("simulate_lyapunov: dimension mismatch");
  if (!(tol > 0.0)) throw std::invalid_argument("simulate_lyapunov: tol must be positive");
  if (std::abs(w(Vec::Zero(sys.dim))) > 1e-14)
    throw std::invalid_argument("simulate_lyapunov: decay function must vanish at the origin");

  // Tail estimate from the linearized per-step decay rate, safety factor 2.
  const Mat F = discretized_jacobian(sys, delta);
  const double rate = F.eigenvalues().cwiseAbs().maxCoeff();
  const bool can_bound = rate < 1.0;

  SimulatedValue out;
  Vec state = x;
  for (int t = 0; t < t_max; ++t) {
    if (can_bound && 2.0 * state.squaredNorm() / (1.0 - rate * rate) < tol) {
      out.converged = true;
      out.steps = t;
      return out;
    }
    out.value += w(state);
    state = step(sys, state, delta);
  }
  out.converged = false;
  out.steps = t_max;
  return out;
}

Mat linearized_lyapunov(const Mat& jac_continuous, double delta, const Mat& W) {
  const Mat F = discretized_jacobian(linear_system(jac_continuous), delta);
  return solve_stein(F, W).Pi;
}

Mat series_stein(const Mat& M, const Mat& H, double tol, int max_terms) {
  if (M.rows() != M.cols() || H.rows() != M.rows() || H.cols() != M.cols())
    throw std::invalid_argument("series_stein: size mismatch");
  Mat acc = H;
  Mat term = H;
  for (int t = 1; t <= max_terms; ++t) {
    term = M.transpose() * term * M;
    acc += term;
    if (term.norm() < tol) return 0.5 * (acc + acc.transpose()).eval();
  }
  throw InstabilityError("series_stein: series did not converge within the term cap");
}

}  // namespace klyap
