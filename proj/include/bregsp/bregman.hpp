#pragma once

#include <Eigen/Core>

#include <functional>
#include <optional>
#include <string>

namespace bregsp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using VectorMap = std::function<Vector(const Vector&)>;
using ScalarMap = std::function<double(const Vector&)>;

enum class GeneratorKind { euclidean, augmented_l1, prox_regularized, custom };

// A strongly convex distance generating function together with the maps the
// solvers need: the gradient of its conjugate (the mirror map) and a
// deterministic subgradient selector.
//
// Generators are immutable once built and may be shared between threads.
struct BregmanGenerator {
  GeneratorKind kind = GeneratorKind::custom;
  std::string name;
  Eigen::Index dimension = 0;
  double modulus = 1.0;
  ScalarMap eval;
  VectorMap mirror;
  VectorMap subgrad;
  // Conjugate value. Optional: custom generators may leave it empty.
  ScalarMap conjugate;
  // Shrinkage threshold for the augmented l1 generator, 0 otherwise.
  double gamma = 0.0;
};

// Primal point together with a subgradient of the generator at that point.
struct DualPair {
  Vector primal;
  Vector dual;
};

inline constexpr double kSubgradientCheckTol = 1e-8;

BregmanGenerator euclidean_generator(Eigen::Index dimension);
BregmanGenerator augmented_l1_generator(Eigen::Index dimension, double gamma);
// omega(u) = psi(u) + 0.5 |u|^2 where psi_prox is the exact proximal map of psi.
// psi_subgrad is optional; without it the selector inverts the prox numerically.
BregmanGenerator prox_regularized_generator(Eigen::Index dimension, ScalarMap psi_eval,
                                            VectorMap psi_prox, VectorMap psi_subgrad = {},
                                            std::string name = "prox_regularized");

// Component-wise soft thresholding. Entries with |u_i| <= gamma come out as exact zeros.
Vector shrinkage(double gamma, const Vector& u);

// Conjugate through the Fenchel equality at u = mirror(u_star). Exact whenever
// the mirror map is exact.
double fenchel_conjugate(const BregmanGenerator& gen, const Vector& u_star);

DualPair make_dual_pair(const BregmanGenerator& gen, const Vector& primal);
DualPair dual_pair_from_dual(const BregmanGenerator& gen, const Vector& dual);

// Throws InconsistentDual when mirror(v_star) is farther than tol from v in max-norm.
void check_subgradient(const BregmanGenerator& gen, const Vector& v, const Vector& v_star,
                       double tol = kSubgradientCheckTol);

// D(u, v; v*) = omega(u) - omega(v) - <v*, u - v>.
double bregman_distance(const BregmanGenerator& gen, const Vector& u, const Vector& v,
                        const Vector& v_star);

// Same value without the subgradient check. Used on hot paths where the dual
// was produced by the mirror map itself.
double bregman_distance_unchecked(const BregmanGenerator& gen, const Vector& u, const Vector& v,
                                  const Vector& v_star);

// LHS - RHS of the three point identity
//   D(u,p;p*) - D(u,q;q*) + D(p,q;q*) = <q* - p*, u - p>.
double three_point_residual(const BregmanGenerator& gen, const Vector& u, const Vector& p,
                            const Vector& p_star, const Vector& q, const Vector& q_star);

// |D(p,q;q*) - D_conj(q*,p*;p)|, the conjugate distance built from gen.conjugate.
double conjugate_duality_residual(const BregmanGenerator& gen, const Vector& p,
                                  const Vector& p_star, const Vector& q, const Vector& q_star);

}  // namespace bregsp
