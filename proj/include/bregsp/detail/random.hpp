#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <random>

namespace bregsp::detail {

// Reproducible across standard libraries: mt19937_64 is fully specified, and
// the mapping to doubles below does not depend on std distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform on [0, 1).
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

  Eigen::VectorXd uniform_vector(Eigen::Index n, double lo, double hi) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = uniform(lo, hi);
    return v;
  }

  // Row-major fill.
  Eigen::MatrixXd uniform_matrix(Eigen::Index rows, Eigen::Index cols, double lo, double hi) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = uniform(lo, hi);
    return m;
  }

  // Uniform in the Euclidean ball of the given radius (rejection from the cube
  // in low dimension, radial scaling otherwise).
  Eigen::VectorXd in_ball(Eigen::Index n, double radius) {
    if (n <= 3) {
      for (;;) {
        Eigen::VectorXd v = uniform_vector(n, -1.0, 1.0);
        if (v.squaredNorm() <= 1.0) return radius * v;
      }
    }
    Eigen::VectorXd dir = uniform_vector(n, -1.0, 1.0);
    double norm = dir.norm();
    while (norm == 0.0) {
      dir = uniform_vector(n, -1.0, 1.0);
      norm = dir.norm();
    }
    const double r = radius * std::pow(unit(), 1.0 / static_cast<double>(n));
    return (r / norm) * dir;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace bregsp::detail
