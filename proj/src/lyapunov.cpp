#include "klyap/lyapunov.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace klyap {

double DecayModel::w_true(const Vec& x) const {
  double acc = 0.0;
  for (const auto& f : factors) {
    const double v = f(x);
    acc += v * v;
  }
  return acc;
}

double DecayModel::w_hat(const Vec& x) const {
  const Vec k = kern.column(centers, x);
  return (alpha * k).squaredNorm();
}

DecayModel fit_decay(const ProductKernel& kern, const SampleSet& data,
                     const std::vector<std::function<double(const Vec&)>>& factors,
                     const std::vector<double>& lambdas) {
  if (data.n() < 1) throw std::invalid_argument("fit_decay: empty sample set");
  if (factors.empty()) throw std::invalid_argument("fit_decay: need at least one factor");
  if (lambdas.size() != factors.size() && lambdas.size() != 1)
    throw std::invalid_argument("fit_decay: lambdas must match factors (or be a single value)");
  if (data.dim() != kern.dim()) throw std::invalid_argument("fit_decay: dimension mismatch");

  const int n = data.n();
  const int N = static_cast<int>(factors.size());
  const Mat G = gram(kern, data.x);

  DecayModel model{kern, data.x, Mat(N, n), Mat(), {}, factors, data.delta};
  model.lambdas.resize(N);

  for (int i = 0; i < N; ++i) {
    const double lam = lambdas.size() == 1 ? lambdas[0] : lambdas[i];
    if (!(lam > 0.0)) throw std::invalid_argument("fit_decay: regularization must be positive");
    model.lambdas[i] = lam;
    Vec target(n);
    for (int j = 0; j < n; ++j) target(j) = factors[i](data.x.col(j));
    Eigen::LDLT<Mat> ldlt(G + (n * lam) * Mat::Identity(n, n));
    model.alpha.row(i) = ldlt.solve(target).transpose();
  }
  model.H = model.alpha.transpose() * model.alpha;
  return model;
}

namespace {

// Converts the real Schur form T (quasi-triangular, 2x2 blocks for complex
// eigenvalue pairs) into a complex upper-triangular factorization
// A = U T_c U^H by rotating each 2x2 block with a unitary 2x2 transform.
void complex_triangularize(CMat& T, CMat& U) {
  using Cplx = std::complex<double>;
  const int n = static_cast<int>(T.rows());
  for (int i = 0; i + 1 < n; ++i) {
    if (T(i + 1, i) == Cplx(0.0)) continue;
    const Cplx t11 = T(i, i), t12 = T(i, i + 1), t21 = T(i + 1, i), t22 = T(i + 1, i + 1);
    // Standardized real Schur blocks have t12 * t21 < 0 (complex pair).
    const Cplx mean = 0.5 * (t11 + t22);
    const Cplx disc = 0.25 * (t11 - t22) * (t11 - t22) + t12 * t21;
    const Cplx lambda = mean + std::sqrt(disc);  // disc < 0: principal root is +i sqrt(|disc|)
    Eigen::Vector2cd v(t12, lambda - t11);
    v.normalize();
    Eigen::Matrix2cd rot;
    rot << v(0), -std::conj(v(1)), v(1), std::conj(v(0));
    T.block(i, 0, 2, n) = rot.adjoint() * T.block(i, 0, 2, n);
    T.block(0, i, n, 2) = T.block(0, i, n, 2) * rot;
    U.block(0, i, n, 2) = U.block(0, i, n, 2) * rot;
    T(i + 1, i) = Cplx(0.0);
    ++i;
  }
}

}  // namespace

SteinSolution solve_stein(const Mat& M, const Mat& H, double margin) {
  using Cplx = std::complex<double>;
  if (M.rows() != M.cols()) throw std::invalid_argument("solve_stein: M must be square");
  if (H.rows() != M.rows() || H.cols() != M.cols())
    throw std::invalid_argument("solve_stein: H must match M in size");
  if ((H - H.transpose()).norm() > 1e-10 * (1.0 + H.norm()))
    throw std::invalid_argument("solve_stein: H must be symmetric");
  const int n = static_cast<int>(M.rows());

  // With A = M^T the equation reads A Pi A^T - Pi = -H.
  Eigen::RealSchur<Mat> schur(M.transpose(), /*computeU=*/true);
  if (schur.info() != Eigen::Success)
    throw std::runtime_error("solve_stein: Schur decomposition failed to converge");
  CMat T = schur.matrixT().cast<Cplx>();
  CMat U = schur.matrixU().cast<Cplx>();
  complex_triangularize(T, U);

  double radius = 0.0;
  for (int i = 0; i < n; ++i) radius = std::max(radius, std::abs(T(i, i)));
  if (radius >= 1.0 - margin)
    throw InstabilityError(
        "estimated Koopman spectral radius not inside unit disk; Lyapunov equation has no "
        "convergent solution");

  // Transformed equation T Y T^H - Y = -F; back-substitute column by column
  // from the right, each column via a triangular solve.
  const CMat F = U.adjoint() * H.cast<Cplx>() * U;
  CMat Y = CMat::Zero(n, n);
  CVec rhs(n);
  for (int k = n - 1; k >= 0; --k) {
    const int m = n - 1 - k;
    if (m > 0) {
      const CVec ytil = Y.rightCols(m) * T.row(k).tail(m).conjugate().transpose();
      rhs = -(F.col(k) + T.triangularView<Eigen::Upper>() * ytil);
    } else {
      rhs = -F.col(k);
    }
    // (conj(T_kk) T - I) y = rhs, upper triangular.
    const Cplx a = std::conj(T(k, k));
    for (int i = n - 1; i >= 0; --i) {
      Cplx acc = rhs(i);
      if (i + 1 < n) acc -= a * (T.row(i).tail(n - 1 - i) * Y.col(k).tail(n - 1 - i))(0, 0);
      Y(i, k) = acc / (a * T(i, i) - 1.0);
    }
  }

  Mat Pi = (U * Y * U.adjoint()).real();
  Pi = 0.5 * (Pi + Pi.transpose()).eval();

  SteinSolution sol;
  sol.Pi = Pi;
  sol.spectral_radius = radius;
  sol.residual = (M.transpose() * Pi * M - Pi + H).norm();
  return sol;
}

LyapunovModel estimate_lyapunov(const KoopmanModel& koop, const DecayModel& decay) {
  if (koop.x_pts.rows() != decay.centers.rows() || koop.x_pts.cols() != decay.centers.cols() ||
      (koop.x_pts - decay.centers).norm() != 0.0)
    throw std::invalid_argument("estimate_lyapunov: models were fit on different centers");
  if (!koop.kern.same_as(decay.kern))
    throw std::invalid_argument("estimate_lyapunov: kernel mismatch");

  const Mat M = koop.Gamma * koop.Theta;
  SteinSolution sol = solve_stein(M, decay.H);
  return LyapunovModel{decay.centers, sol.Pi, koop.kern, sol.residual, sol.spectral_radius};
}

double eval_lyapunov(const LyapunovModel& model, const Vec& x) {
  if (x.size() != model.kern.dim())
    throw std::invalid_argument("eval_lyapunov: state dimension mismatch");
  const Vec k = model.kern.column(model.centers, x);
  return k.dot(model.Pi * k);
}

DecayReport check_decay_fn(const std::function<double(const Vec&)>& v,
                           const std::function<double(const Vec&)>& w, const SystemDef& sys,
                           double delta, const Mat& grid, double slack) {
  const int m = static_cast<int>(grid.cols());
  if (m == 0) throw std::invalid_argument("check_decay: empty grid");
  DecayReport report;
  report.violations.resize(m);
  int satisfied = 0;
  double worst = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < m; ++j) {
    const Vec x = grid.col(j);
    const Vec fx = step(sys, x, delta);
    const double viol = v(fx) - v(x) + w(x);
    report.violations(j) = viol;
    if (viol <= slack) ++satisfied;
    worst = std::max(worst, viol);
  }
  report.satisfied_fraction = static_cast<double>(satisfied) / m;
  report.worst_violation = worst;
  return report;
}

DecayReport check_decay(const LyapunovModel& model, const DecayModel& decay, const SystemDef& sys,
                        const Mat& grid, double slack) {
  return check_decay_fn([&](const Vec& x) { return eval_lyapunov(model, x); },
                        [&](const Vec& x) { return decay.w_true(x); }, sys, decay.delta, grid,
                        slack);
}

}  // namespace klyap
