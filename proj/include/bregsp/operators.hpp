#pragma once

#include "bregsp/bregman.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>

namespace bregsp {

// F: R^d -> R^d with an optional known global Lipschitz constant.
struct OperatorHandle {
  Eigen::Index dimension = 0;
  VectorMap apply;
  std::optional<double> lipschitz;

  Vector operator()(const Vector& u) const { return apply(u); }
};

// Lipschitz moduli of the partial gradient blocks:
//   xx: grad_x in x,  xy: grad_x in y,  yy: grad_y in y,  yx: grad_y in x.
struct BlockConstants {
  double xx = 0.0;
  double xy = 0.0;
  double yy = 0.0;
  double yx = 0.0;
};

struct SaddlePoint {
  Vector x;
  Vector y;
};

struct Instance;

// Smooth convex-concave f(x, y) on R^m x R^n.
struct SaddleProblem {
  std::function<double(const Vector&, const Vector&)> f;
  std::function<Vector(const Vector&, const Vector&)> grad_x;
  std::function<Vector(const Vector&, const Vector&)> grad_y;
  Eigen::Index m = 0;
  Eigen::Index n = 0;
  BlockConstants blocks;
  std::optional<SaddlePoint> saddle;
  // Set for problems built from explicit matrices (see problems.hpp).
  std::shared_ptr<const Instance> source;

  Eigen::Index dimension() const { return m + n; }
  Vector stacked_saddle() const;
  double value(const Vector& z) const { return f(z.head(m), z.tail(n)); }
  double saddle_value() const;
};

// [grad_x f(x, y); -grad_y f(x, y)] with lipschitz = lipschitz_from_blocks(problem).
OperatorHandle saddle_operator(const SaddleProblem& problem);

// 2 * max of the four block constants.
double lipschitz_from_blocks(const BlockConstants& blocks);
double lipschitz_from_blocks(const SaddleProblem& problem);

// Sampling lower bound on the Lipschitz constant of op: max of
// |F(u) - F(v)| / |u - v| over sample_count random pairs in the radius ball.
double estimate_lipschitz(const OperatorHandle& op, int sample_count, double radius,
                          std::uint64_t seed);

double relative_lipschitz_lambda(double lipschitz, double modulus);

// <F(v) - F(u), v - z> - lambda (D(v,u;u*) + D(z,v;v*)); nonpositive when op is
// lambda-relatively Lipschitz.
double relative_lipschitz_residual(const OperatorHandle& op, const BregmanGenerator& gen,
                                   const Vector& u, const Vector& u_star, const Vector& v,
                                   const Vector& v_star, const Vector& z, double lambda);

// <F(u) - F(v), u - v>; nonnegative for monotone op.
double monotonicity_residual(const OperatorHandle& op, const Vector& u, const Vector& v);

struct SpectralNormOptions {
  double tolerance = 1e-10;
  int max_iterations = 10000;
  std::uint64_t seed = 0x5eed;
};

// Largest singular value by power iteration on M^T M.
double spectral_norm(const Matrix& m, const SpectralNormOptions& options = {});

}  // namespace bregsp
