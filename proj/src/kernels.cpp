#include "klyap/kernels.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace klyap {

namespace {

// Exact rational arithmetic for the one-time polynomial construction.
struct Rat {
  long long num = 0;
  long long den = 1;
};

long long checked_mul(long long a, long long b) {
  __int128 p = static_cast<__int128>(a) * b;
  if (p > INT64_MAX || p < INT64_MIN)
    throw std::invalid_argument("wendland: polynomial coefficients not representable; reduce k");
  return static_cast<long long>(p);
}

Rat reduce(Rat r) {
  if (r.den < 0) {
    r.num = -r.num;
    r.den = -r.den;
  }
  long long g = std::gcd(r.num < 0 ? -r.num : r.num, r.den);
  if (g > 1) {
    r.num /= g;
    r.den /= g;
  }
  return r;
}

Rat add(Rat a, Rat b) {
  return reduce({checked_mul(a.num, b.den) + checked_mul(b.num, a.den), checked_mul(a.den, b.den)});
}

Rat div_int(Rat a, long long k) { return reduce({a.num, checked_mul(a.den, k)}); }

// Truncated power (1-r)^ell as exact coefficients, ascending.
std::vector<Rat> truncated_power(int ell) {
  std::vector<Rat> c(ell + 1);
  long long binom = 1;
  for (int j = 0; j <= ell; ++j) {
    c[j] = {(j % 2 == 0) ? binom : -binom, 1};
    binom = checked_mul(binom, ell - j) / (j + 1);
  }
  return c;
}

// I phi(r) = integral of r' phi(r') from r to 1 (phi vanishes beyond 1):
// a_j r^j contributes a_j/(j+2) to the constant and -a_j/(j+2) at power j+2.
std::vector<Rat> apply_integral_transform(const std::vector<Rat>& a) {
  std::vector<Rat> out(a.size() + 2);
  Rat constant{0, 1};
  for (std::size_t j = 0; j < a.size(); ++j) {
    Rat term = div_int(a[j], static_cast<long long>(j) + 2);
    constant = add(constant, term);
    out[j + 2] = reduce({-term.num, term.den});
  }
  out[0] = constant;
  return out;
}

}  // namespace

WendlandRadial::WendlandRadial(int dim, int smoothness, double scale)
    : dim_(dim), smoothness_(smoothness), scale_(scale) {
  if (dim < 1) throw std::invalid_argument("wendland: state dimension must be positive");
  if (smoothness < 0) throw std::invalid_argument("wendland: smoothness index must be >= 0");
  if (!(scale > 0.0)) throw std::invalid_argument("wendland: scale must be positive");

  ell_ = dim / 2 + smoothness + 2;
  std::vector<Rat> poly = truncated_power(ell_);
  for (int i = 0; i < smoothness; ++i) poly = apply_integral_transform(poly);

  coeffs_.resize(poly.size());
  for (std::size_t j = 0; j < poly.size(); ++j)
    coeffs_[j] = static_cast<double>(poly[j].num) / static_cast<double>(poly[j].den);
}

double WendlandRadial::operator()(double r) const {
  if (r < 0.0) r = -r;
  if (r >= scale_) return 0.0;
  const double u = r / scale_;
  double acc = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * u + *it;
  return acc;
}

double ProductKernel::operator()(const Eigen::Ref<const Vec>& x,
                                 const Eigen::Ref<const Vec>& y) const {
  if (x.size() != dim() || y.size() != dim())
    throw std::invalid_argument("kernel: state dimension mismatch");
  const double linear = x.dot(y);
  if (linear == 0.0) return 0.0;
  return linear * radial_((x - y).norm());
}

Vec ProductKernel::column(const Mat& pts, const Eigen::Ref<const Vec>& x) const {
  const int n = static_cast<int>(pts.cols());
  Vec k(n);
  for (int j = 0; j < n; ++j) k(j) = (*this)(pts.col(j), x);
  return k;
}

Mat gram(const ProductKernel& kern, const Mat& pts_a, const Mat& pts_b) {
  if (pts_a.cols() == 0 || pts_b.cols() == 0)
    throw std::invalid_argument("gram: point set must be non-empty");
  if (pts_a.rows() != kern.dim() || pts_b.rows() != kern.dim())
    throw std::invalid_argument("gram: point dimension mismatch");
  Mat G(pts_a.cols(), pts_b.cols());
  for (int j = 0; j < pts_b.cols(); ++j)
    for (int i = 0; i < pts_a.cols(); ++i) G(i, j) = kern(pts_a.col(i), pts_b.col(j));
  return G;
}

Mat gram(const ProductKernel& kern, const Mat& pts) {
  if (pts.cols() == 0) throw std::invalid_argument("gram: point set must be non-empty");
  if (pts.rows() != kern.dim()) throw std::invalid_argument("gram: point dimension mismatch");
  const int n = static_cast<int>(pts.cols());
  Mat G(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < j; ++i) {
      const double v = kern(pts.col(i), pts.col(j));
      G(i, j) = v;
      G(j, i) = v;
    }
    G(j, j) = kern(pts.col(j), pts.col(j));
  }
  return G;
}

}  // namespace klyap
