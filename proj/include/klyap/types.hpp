#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>

namespace klyap {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

/// Axis-aligned box in state space.
struct Box {
  Vec lo;
  Vec hi;

  int dim() const { return static_cast<int>(lo.size()); }

  // Membership test with an optional inflation factor about the box center.
  bool contains(const Vec& x, double inflation = 1.0) const {
    for (int i = 0; i < dim(); ++i) {
      const double c = 0.5 * (lo(i) + hi(i));
      const double h = 0.5 * (hi(i) - lo(i)) * inflation;
      if (x(i) < c - h || x(i) > c + h) return false;
    }
    return true;
  }
};

inline Box square_box(int dim, double halfwidth) {
  return Box{Vec::Constant(dim, -halfwidth), Vec::Constant(dim, halfwidth)};
}

// Error taxonomy. Parameter errors use std::invalid_argument; the classes
// below map to distinct CLI exit codes.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct IllConditioningError : std::runtime_error {
  explicit IllConditioningError(const std::string& msg) : std::runtime_error(msg) {}
};

struct InstabilityError : std::runtime_error {
  explicit InstabilityError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DivergenceError : std::runtime_error {
  explicit DivergenceError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace klyap
