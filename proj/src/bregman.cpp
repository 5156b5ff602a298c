#include "bregsp/bregman.hpp"

#include "bregsp/errors.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace bregsp {

namespace {

void require_dimension(const BregmanGenerator& gen, const Vector& v, const char* what) {
  if (gen.dimension != 0 && v.size() != gen.dimension) {
    throw InvalidArgument(std::string(what) + ": expected dimension " +
                          std::to_string(gen.dimension) + ", got " + std::to_string(v.size()));
  }
}

void require_positive_dimension(Eigen::Index dimension) {
  if (dimension < 1) throw InvalidArgument("generator dimension must be >= 1");
}

}  // namespace

Vector shrinkage(double gamma, const Vector& u) {
  if (gamma < 0.0) throw InvalidArgument("shrinkage threshold must be nonnegative");
  Vector out(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const double a = std::abs(u[i]);
    // branch keeps the zero exact
    if (a <= gamma) {
      out[i] = 0.0;
    } else {
      out[i] = std::copysign(a - gamma, u[i]);
    }
  }
  return out;
}

double fenchel_conjugate(const BregmanGenerator& gen, const Vector& u_star) {
  const Vector u = gen.mirror(u_star);
  return u.dot(u_star) - gen.eval(u);
}

BregmanGenerator euclidean_generator(Eigen::Index dimension) {
  require_positive_dimension(dimension);
  BregmanGenerator g;
  g.kind = GeneratorKind::euclidean;
  g.name = "euclidean";
  g.dimension = dimension;
  g.modulus = 1.0;
  g.eval = [](const Vector& u) { return 0.5 * u.squaredNorm(); };
  g.mirror = [](const Vector& u_star) { return u_star; };
  g.subgrad = [](const Vector& u) { return u; };
  g.conjugate = [](const Vector& u_star) { return 0.5 * u_star.squaredNorm(); };
  return g;
}

BregmanGenerator augmented_l1_generator(Eigen::Index dimension, double gamma) {
  require_positive_dimension(dimension);
  if (!(gamma > 0.0)) throw InvalidArgument("augmented l1 generator needs gamma > 0");
  BregmanGenerator g;
  g.kind = GeneratorKind::augmented_l1;
  g.name = "augmented_l1";
  g.dimension = dimension;
  g.modulus = 1.0;
  g.gamma = gamma;
  g.eval = [gamma](const Vector& u) { return gamma * u.lpNorm<1>() + 0.5 * u.squaredNorm(); };
  g.mirror = [gamma](const Vector& u_star) { return shrinkage(gamma, u_star); };
  g.subgrad = [gamma](const Vector& u) {
    Vector s = u;
    for (Eigen::Index i = 0; i < u.size(); ++i) {
      if (u[i] > 0.0) {
        s[i] += gamma;
      } else if (u[i] < 0.0) {
        s[i] -= gamma;
      }
    }
    return s;
  };
  // 0.5 |S(u*)|^2 follows from the Fenchel equality; kept on the generic route.
  g.conjugate = [mirror = g.mirror, eval = g.eval](const Vector& u_star) {
    const Vector u = mirror(u_star);
    return u.dot(u_star) - eval(u);
  };
  return g;
}

BregmanGenerator prox_regularized_generator(Eigen::Index dimension, ScalarMap psi_eval,
                                            VectorMap psi_prox, VectorMap psi_subgrad,
                                            std::string name) {
  require_positive_dimension(dimension);
  if (!psi_eval || !psi_prox) throw InvalidArgument("prox regularized generator needs psi and its prox");
  BregmanGenerator g;
  g.kind = GeneratorKind::prox_regularized;
  g.name = std::move(name);
  g.dimension = dimension;
  g.modulus = 1.0;
  g.eval = [psi = psi_eval](const Vector& u) { return psi(u) + 0.5 * u.squaredNorm(); };
  g.mirror = psi_prox;
  if (psi_subgrad) {
    g.subgrad = [sub = std::move(psi_subgrad)](const Vector& u) -> Vector { return u + sub(u); };
  } else {
    // Any u* with prox(u*) == u is a subgradient of omega at u. Solve for one
    // with u* <- u* - t .* (prox(u*) - u); t_i doubles while coordinate i
    // stalls (flat stretches of the prox) and resets when it overshoots.
    g.subgrad = [prox = psi_prox](const Vector& u) {
      const double tol = 1e-14 * (1.0 + u.lpNorm<Eigen::Infinity>());
      Vector u_star = u;
      Vector r = prox(u_star) - u;
      Vector t = Vector::Ones(u.size());
      for (int it = 0; it < 500 && r.lpNorm<Eigen::Infinity>() > tol; ++it) {
        u_star -= t.cwiseProduct(r);
        const Vector next = prox(u_star) - u;
        for (Eigen::Index i = 0; i < u.size(); ++i) {
          const bool flipped = std::signbit(next[i]) != std::signbit(r[i]);
          if (flipped) {
            t[i] = 1.0;
          } else if (std::abs(next[i]) > tol && std::abs(next[i]) >= 0.5 * std::abs(r[i])) {
            t[i] *= 2.0;
          }
        }
        r = next;
      }
      return u_star;
    };
  }
  g.conjugate = [mirror = g.mirror, eval = g.eval](const Vector& u_star) {
    const Vector u = mirror(u_star);
    return u.dot(u_star) - eval(u);
  };
  return g;
}

DualPair make_dual_pair(const BregmanGenerator& gen, const Vector& primal) {
  require_dimension(gen, primal, "make_dual_pair");
  return DualPair{primal, gen.subgrad(primal)};
}

DualPair dual_pair_from_dual(const BregmanGenerator& gen, const Vector& dual) {
  require_dimension(gen, dual, "dual_pair_from_dual");
  return DualPair{gen.mirror(dual), dual};
}

void check_subgradient(const BregmanGenerator& gen, const Vector& v, const Vector& v_star,
                       double tol) {
  require_dimension(gen, v, "primal");
  require_dimension(gen, v_star, "dual");
  if (v.size() != v_star.size()) throw InvalidArgument("primal and dual sizes differ");
  const double err = (gen.mirror(v_star) - v).lpNorm<Eigen::Infinity>();
  if (!(err <= tol)) {
    throw InconsistentDual("dual vector is not a subgradient at the primal point (mismatch " +
                           std::to_string(err) + ")");
  }
}

double bregman_distance_unchecked(const BregmanGenerator& gen, const Vector& u, const Vector& v,
                                  const Vector& v_star) {
  return gen.eval(u) - gen.eval(v) - v_star.dot(u - v);
}

double bregman_distance(const BregmanGenerator& gen, const Vector& u, const Vector& v,
                        const Vector& v_star) {
  require_dimension(gen, u, "bregman_distance");
  check_subgradient(gen, v, v_star);
  return bregman_distance_unchecked(gen, u, v, v_star);
}

double three_point_residual(const BregmanGenerator& gen, const Vector& u, const Vector& p,
                            const Vector& p_star, const Vector& q, const Vector& q_star) {
  const double lhs = bregman_distance(gen, u, p, p_star) - bregman_distance(gen, u, q, q_star) +
                     bregman_distance(gen, p, q, q_star);
  const double rhs = (q_star - p_star).dot(u - p);
  return lhs - rhs;
}

double conjugate_duality_residual(const BregmanGenerator& gen, const Vector& p,
                                  const Vector& p_star, const Vector& q, const Vector& q_star) {
  if (!gen.conjugate) {
    throw UnsupportedOperation("generator '" + gen.name + "' has no conjugate evaluation");
  }
  const double primal_side = bregman_distance(gen, p, q, q_star);
  check_subgradient(gen, p, p_star);
  const double conj_side = gen.conjugate(q_star) - gen.conjugate(p_star) - p.dot(q_star - p_star);
  return std::abs(primal_side - conj_side);
}

}  // namespace bregsp
