#include "bregsp/operators.hpp"

#include "bregsp/detail/random.hpp"
#include "bregsp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace bregsp {

Vector SaddleProblem::stacked_saddle() const {
  if (!saddle) throw UnsupportedOperation("problem has no known saddle point");
  Vector z(m + n);
  z << saddle->x, saddle->y;
  return z;
}

double SaddleProblem::saddle_value() const {
  if (!saddle) throw UnsupportedOperation("problem has no known saddle point");
  return f(saddle->x, saddle->y);
}

double lipschitz_from_blocks(const BlockConstants& b) {
  if (b.xx < 0.0 || b.xy < 0.0 || b.yy < 0.0 || b.yx < 0.0) {
    throw InvalidArgument("block Lipschitz constants must be nonnegative");
  }
  return 2.0 * std::max({b.xx, b.xy, b.yy, b.yx});
}

double lipschitz_from_blocks(const SaddleProblem& problem) {
  return lipschitz_from_blocks(problem.blocks);
}

OperatorHandle saddle_operator(const SaddleProblem& problem) {
  OperatorHandle op;
  const Eigen::Index m = problem.m;
  const Eigen::Index n = problem.n;
  op.dimension = m + n;
  op.lipschitz = lipschitz_from_blocks(problem);
  op.apply = [gx = problem.grad_x, gy = problem.grad_y, m, n](const Vector& z) {
    if (z.size() != m + n) {
      throw InvalidArgument("saddle operator expects a vector of size " + std::to_string(m + n) +
                            ", got " + std::to_string(z.size()));
    }
    const Vector x = z.head(m);
    const Vector y = z.tail(n);
    Vector out(m + n);
    out.head(m) = gx(x, y);
    out.tail(n) = -gy(x, y);
    return out;
  };
  return op;
}

double estimate_lipschitz(const OperatorHandle& op, int sample_count, double radius,
                          std::uint64_t seed) {
  if (sample_count < 2) throw InvalidArgument("estimate_lipschitz needs sample_count >= 2");
  if (!(radius > 0.0)) throw InvalidArgument("estimate_lipschitz needs radius > 0");
  if (op.dimension < 1) throw InvalidArgument("operator dimension must be set");
  detail::Rng rng(seed);
  double best = 0.0;
  int usable = 0;
  for (int s = 0; s < sample_count; ++s) {
    const Vector u = rng.in_ball(op.dimension, radius);
    const Vector v = rng.in_ball(op.dimension, radius);
    const double du = (u - v).norm();
    if (!(du > 0.0) || !std::isfinite(du)) continue;
    const double df = (op(u) - op(v)).norm();
    if (!std::isfinite(df)) continue;
    ++usable;
    best = std::max(best, df / du);
  }
  if (usable == 0) throw DegenerateSample("all sampled pairs coincide or are not finite");
  return best;
}

double relative_lipschitz_lambda(double lipschitz, double modulus) {
  if (lipschitz < 0.0) throw InvalidArgument("Lipschitz constant must be nonnegative");
  if (!(modulus > 0.0)) throw InvalidArgument("strong convexity modulus must be positive");
  return lipschitz / modulus;
}

double relative_lipschitz_residual(const OperatorHandle& op, const BregmanGenerator& gen,
                                   const Vector& u, const Vector& u_star, const Vector& v,
                                   const Vector& v_star, const Vector& z, double lambda) {
  const double d_vu = bregman_distance(gen, v, u, u_star);
  const double d_zv = bregman_distance(gen, z, v, v_star);
  const double lhs = (op(v) - op(u)).dot(v - z);
  return lhs - lambda * (d_vu + d_zv);
}

double monotonicity_residual(const OperatorHandle& op, const Vector& u, const Vector& v) {
  return (op(u) - op(v)).dot(u - v);
}

double spectral_norm(const Matrix& m, const SpectralNormOptions& options) {
  if (m.size() == 0) return 0.0;
  if (m.isZero(0.0)) return 0.0;
  detail::Rng rng(options.seed);
  Vector v = rng.uniform_vector(m.cols(), -1.0, 1.0);
  if (v.norm() == 0.0) v.setOnes();
  v.normalize();
  double estimate = 0.0;
  for (int it = 0; it < options.max_iterations; ++it) {
    Vector w = m.transpose() * (m * v);
    const double norm = w.norm();
    if (norm == 0.0) {
      // start vector fell into the null space; restart along a fixed direction
      v = Vector::Ones(m.cols()) + rng.uniform_vector(m.cols(), -0.5, 0.5);
      v.normalize();
      continue;
    }
    const double next = v.dot(w);
    v = w / norm;
    if (std::abs(next - estimate) <= options.tolerance * std::max(1.0, std::abs(next))) {
      estimate = next;
      break;
    }
    estimate = next;
  }
  // Rayleigh quotient of M^T M at the final vector
  const double rq = (m * v).squaredNorm();
  return std::sqrt(std::max(estimate, rq));
}

}  // namespace bregsp
