#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "klyap/lyapunov.hpp"
#include "klyap/oracle.hpp"

using namespace klyap;
using Cplx = std::complex<double>;

namespace {

SystemDef scalar_map(double m) {
  SystemDef sys;
  sys.name = "scalar_map";
  sys.dim = 1;
  sys.discrete_map = [m](const Vec& x) { return Vec(m * x); };
  sys.jacobian_at_origin = (Mat(1, 1) << m).finished();
  sys.domain = square_box(1, 2.0);
  return sys;
}

Mat random_stable(int n, double radius, std::mt19937& rng) {
  std::normal_distribution<double> g;
  Mat M(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) M(i, j) = g(rng);
  return M * (radius / M.eigenvalues().cwiseAbs().maxCoeff());
}

}  // namespace

TEST_CASE("powers of a single generator plus the accumulation point") {
  CVec gen(1);
  gen(0) = Cplx(0.5, 0.0);
  SpectrumTruth truth = exact_spectrum(gen, 3);
  REQUIRE(truth.products.size() == 3);
  CHECK(std::abs(truth.products(0) - Cplx(0.5, 0)) <= 1e-15);
  CHECK(std::abs(truth.products(1) - Cplx(0.25, 0)) <= 1e-15);
  CHECK(std::abs(truth.products(2) - Cplx(0.125, 0)) <= 1e-15);
  CHECK(truth.includes_zero);
}

TEST_CASE("brusselator generators: top modulus and conjugation closure") {
  const double delta = 0.2;
  CVec gen(2);
  gen(0) = std::exp(Cplx(-0.5 * delta, 0.5 * std::sqrt(3.0) * delta));
  gen(1) = std::conj(gen(0));
  SpectrumTruth truth = exact_spectrum(gen, 8);

  const double top = std::abs(truth.products(0));
  CHECK(top == doctest::Approx(std::exp(-0.1)).epsilon(1e-12));
  for (int i = 0; i < truth.products.size(); ++i) {
    CHECK(std::abs(truth.products(i)) <= top + 1e-12);
    double best = 1e300;
    for (int j = 0; j < truth.products.size(); ++j)
      best = std::min(best, std::abs(truth.products(j) - std::conj(truth.products(i))));
    CHECK(best <= 1e-12);
  }
}

TEST_CASE("exact spectrum equals an independent exponent enumeration") {
  const double delta = 0.2;
  CVec gen(2);
  gen(0) = std::exp(Cplx(-0.5 * delta, 0.5 * std::sqrt(3.0) * delta));
  gen(1) = std::conj(gen(0));
  const int degree_max = 5;
  SpectrumTruth truth = exact_spectrum(gen, degree_max);

  std::vector<Cplx> expected;
  for (int p = 0; p <= degree_max; ++p)
    for (int q = 0; p + q <= degree_max; ++q) {
      if (p + q == 0) continue;
      expected.push_back(std::exp(Cplx(-0.1 * (p + q), 0.1 * std::sqrt(3.0) * (p - q))));
    }
  // deduplicate the reference the same way a hand enumeration would
  std::vector<Cplx> unique;
  for (const Cplx& v : expected) {
    bool seen = false;
    for (const Cplx& u : unique)
      if (std::abs(u - v) <= 1e-12) seen = true;
    if (!seen) unique.push_back(v);
  }
  REQUIRE(truth.products.size() == static_cast<int>(unique.size()));
  for (const Cplx& v : unique) {
    double best = 1e300;
    for (int j = 0; j < truth.products.size(); ++j)
      best = std::min(best, std::abs(truth.products(j) - v));
    CHECK(best <= 1e-12);
  }
}

TEST_CASE("exact spectrum rejects unstable generators") {
  CVec gen(1);
  gen(0) = Cplx(1.0, 0.0);
  CHECK_THROWS_AS(exact_spectrum(gen, 3), std::invalid_argument);
  gen(0) = Cplx(0.5, 0.0);
  CHECK_THROWS_AS(exact_spectrum(gen, 0), std::invalid_argument);
}

TEST_CASE("simulated value at the origin is zero") {
  SimulatedValue v = simulate_lyapunov(lienard(), Vec::Zero(2),
                                       [](const Vec& x) { return x.squaredNorm(); }, 0.2, 1e-9,
                                       1000);
  CHECK(v.value == 0.0);
  CHECK(v.converged);
}

TEST_CASE("simulated value matches the geometric series on a scalar map") {
  const double m = std::exp(-0.2);
  SystemDef sys = scalar_map(m);
  Vec x0 = (Vec(1) << 1.0).finished();
  SimulatedValue v = simulate_lyapunov(sys, x0, [](const Vec& x) { return x.squaredNorm(); }, 1.0,
                                       1e-9, 100000);
  CHECK(v.converged);
  CHECK(v.value == doctest::Approx(1.0 / (1.0 - m * m)).epsilon(1e-6));
}

TEST_CASE("simulation flags non-convergence on a neutral map") {
  SystemDef sys = scalar_map(1.0);
  Vec x0 = (Vec(1) << 0.5).finished();
  SimulatedValue v = simulate_lyapunov(sys, x0, [](const Vec& x) { return x.squaredNorm(); }, 1.0,
                                       1e-9, 50);
  CHECK(!v.converged);
  CHECK(v.steps == 50);
}

TEST_CASE("simulation rejects a decay function that misses the origin") {
  CHECK_THROWS_AS(simulate_lyapunov(lienard(), Vec::Zero(2),
                                    [](const Vec&) { return 1.0; }, 0.2, 1e-9, 10),
                  std::invalid_argument);
}

TEST_CASE("linearized lyapunov: decoupled closed form") {
  const double delta = 0.3;
  Mat P = linearized_lyapunov(-Mat::Identity(2, 2), delta, Mat::Identity(2, 2));
  const double expected = 1.0 / (1.0 - std::exp(-2.0 * delta));
  CHECK(P(0, 0) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(P(1, 1) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(std::abs(P(0, 1)) <= 1e-12);
}

TEST_CASE("linearized lyapunov reproduces the published quadratic coefficients") {
  Mat J(2, 2);
  J << 0, 1, -1, -1;
  const Mat P = linearized_lyapunov(J, 0.2, Mat::Identity(2, 2));

  // dual route: truncated series on the same discretized matrix
  SystemDef sys = linear_system(J);
  const Mat F = discretized_jacobian(sys, 0.2);
  const Mat P_series = series_stein(F, Mat::Identity(2, 2), 1e-14);
  CHECK((P - P_series).norm() <= 1e-10);

  // v_lin(x) = 8 x1^2 + 5 x1 x2 + 5.533 x2^2 within 1%
  CHECK(std::abs(P(0, 0) - 8.0) <= 0.08);
  CHECK(std::abs(2.0 * P(0, 1) - 5.0) <= 0.05);
  CHECK(std::abs(P(1, 1) - 5.533) <= 0.05533);

  Vec one = Vec::Ones(2);
  CHECK(one.dot(P * one) == doctest::Approx(18.5331).epsilon(1e-4));

  CHECK_THROWS_AS(linearized_lyapunov(Mat::Identity(2, 2), 0.2, Mat::Identity(2, 2)),
                  InstabilityError);
}

TEST_CASE("series oracle on degenerate and scalar instances") {
  Mat H(2, 2);
  H << 2, 1, 1, 3;
  CHECK((series_stein(Mat::Zero(2, 2), H, 1e-14) - H).norm() == 0.0);
  Mat P = series_stein((Mat(1, 1) << 0.5).finished(), (Mat(1, 1) << 1.0).finished(), 1e-14);
  CHECK(P(0, 0) == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
  CHECK_THROWS_AS(series_stein(Mat::Identity(2, 2), H, 1e-14, 1000), InstabilityError);
}

TEST_CASE("series and schur solutions agree on a random stable instance") {
  std::mt19937 rng(31);
  Mat M = random_stable(20, 0.8, rng);
  Mat B(20, 20);
  std::normal_distribution<double> g;
  for (int i = 0; i < 20; ++i)
    for (int j = 0; j < 20; ++j) B(i, j) = g(rng);
  Mat H = B.transpose() * B;
  CHECK((series_stein(M, H, 1e-13) - solve_stein(M, H).Pi).norm() <= 1e-8);
}

TEST_CASE("simulation agrees with the linearized quadratic near the origin") {
  Mat J(2, 2);
  J << 0, 1, -1, -1;
  SystemDef sys = linear_system(J);
  const Mat P = linearized_lyapunov(J, 0.2, Mat::Identity(2, 2));
  const double tol = 1e-9;
  for (double s : {0.05, 0.1}) {
    Vec x = (Vec(2) << s, -0.5 * s).finished();
    SimulatedValue v = simulate_lyapunov(sys, x, [](const Vec& y) { return y.squaredNorm(); }, 0.2,
                                         tol, 100000);
    CHECK(v.converged);
    CHECK(std::abs(v.value - x.dot(P * x)) <= tol * 10.0);
  }
}
