#include "bregsp/bregman.hpp"
#include "bregsp/detail/random.hpp"
#include "bregsp/errors.hpp"
#include "support/oracles.hpp"

#include <Eigen/LU>
#include <gtest/gtest.h>

#include <bit>
#include <cmath>

using namespace bregsp;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

BregmanGenerator l1_via_prox(Eigen::Index d, double gamma) {
  return prox_regularized_generator(
      d, [gamma](const Vector& u) { return gamma * u.lpNorm<1>(); },
      [gamma](const Vector& u) { return shrinkage(gamma, u); });
}

}  // namespace

TEST(EuclideanGenerator, Examples) {
  const auto g = euclidean_generator(2);
  EXPECT_DOUBLE_EQ(g.eval(vec({3, 4})), 12.5);
  EXPECT_EQ(g.mirror(vec({1, -2})), vec({1, -2}));
  EXPECT_DOUBLE_EQ(bregman_distance(g, vec({1, 0}), vec({0, 0}), vec({0, 0})), 0.5);
  EXPECT_EQ(g.kind, GeneratorKind::euclidean);
  EXPECT_DOUBLE_EQ(g.modulus, 1.0);
}

TEST(EuclideanGenerator, RejectsZeroDimension) {
  EXPECT_THROW(euclidean_generator(0), InvalidArgument);
  EXPECT_THROW(augmented_l1_generator(0, 1.0), InvalidArgument);
}

TEST(AugmentedL1Generator, Examples) {
  EXPECT_DOUBLE_EQ(augmented_l1_generator(2, 2.0).eval(vec({1, -1})), 5.0);
  const auto g = augmented_l1_generator(3, 1.0);
  EXPECT_EQ(g.mirror(vec({2, -0.5, 0})), vec({1, 0, 0}));
  EXPECT_EQ(augmented_l1_generator(2, 1.0).subgrad(vec({0.5, 0})), vec({1.5, 0}));
}

TEST(AugmentedL1Generator, RejectsNonPositiveGamma) {
  EXPECT_THROW(augmented_l1_generator(2, 0.0), InvalidArgument);
  EXPECT_THROW(augmented_l1_generator(2, -1.0), InvalidArgument);
}

TEST(Generators, MirrorInvertsSubgradient) {
  detail::Rng rng(1);
  for (const auto& g : {euclidean_generator(6), augmented_l1_generator(6, 0.7), l1_via_prox(6, 0.7)}) {
    for (int i = 0; i < 500; ++i) {
      Vector u = rng.uniform_vector(6, -2.0, 2.0);
      if (i % 3 == 0) u[i % 6] = 0.0;
      EXPECT_LE((g.mirror(g.subgrad(u)) - u).lpNorm<Eigen::Infinity>(), 1e-10) << g.name;
    }
  }
}

TEST(Generators, StrongConvexityOnSampledTriples) {
  detail::Rng rng(2);
  for (const auto& g : {euclidean_generator(4), augmented_l1_generator(4, 1.3)}) {
    for (int i = 0; i < 1000; ++i) {
      const Vector u = rng.uniform_vector(4, -3.0, 3.0);
      const Vector v = rng.uniform_vector(4, -3.0, 3.0);
      const double a = rng.unit();
      const double lhs = g.eval(a * u + (1 - a) * v);
      const double rhs = a * g.eval(u) + (1 - a) * g.eval(v) - 0.5 * g.modulus * a * (1 - a) * (u - v).squaredNorm();
      EXPECT_LE(lhs, rhs + 1e-12);
    }
  }
}

TEST(ProxRegularizedGenerator, ZeroPsiIsEuclidean) {
  const auto g = prox_regularized_generator(
      3, [](const Vector&) { return 0.0; }, [](const Vector& u) { return u; });
  const auto e = euclidean_generator(3);
  detail::Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    const Vector u = rng.uniform_vector(3, -2.0, 2.0);
    const Vector v = rng.uniform_vector(3, -2.0, 2.0);
    EXPECT_DOUBLE_EQ(g.eval(u), e.eval(u));
    EXPECT_EQ(g.mirror(u), e.mirror(u));
    EXPECT_LE((g.subgrad(u) - u).lpNorm<Eigen::Infinity>(), 1e-14);
    EXPECT_NEAR(bregman_distance(g, u, v, g.subgrad(v)), 0.5 * (u - v).squaredNorm(), 1e-12);
  }
}

TEST(ProxRegularizedGenerator, L1PsiMatchesAugmentedL1) {
  const double gamma = 0.8;
  const auto g = l1_via_prox(5, gamma);
  const auto a = augmented_l1_generator(5, gamma);
  detail::Rng rng(4);
  for (int i = 0; i < 1000; ++i) {
    const Vector u_star = rng.uniform_vector(5, -3.0, 3.0);
    EXPECT_LE((g.mirror(u_star) - a.mirror(u_star)).lpNorm<Eigen::Infinity>(), 1e-12);
    const Vector u = rng.uniform_vector(5, -3.0, 3.0);
    EXPECT_NEAR(g.eval(u), a.eval(u), 1e-12);
  }
}

TEST(ProxRegularizedGenerator, HalfSquaredPsi) {
  // prox of |.|^2/2 halves its argument; optimality: p - u* + p = 0
  const auto g = prox_regularized_generator(
      4, [](const Vector& u) { return 0.5 * u.squaredNorm(); }, [](const Vector& u) -> Vector { return 0.5 * u; });
  detail::Rng rng(5);
  for (int i = 0; i < 100; ++i) {
    const Vector u_star = rng.uniform_vector(4, -3.0, 3.0);
    const Vector p = g.mirror(u_star);
    EXPECT_LE((2.0 * p - u_star).lpNorm<Eigen::Infinity>(), 1e-15);
    // subgradient recovered by fixed-point inversion of the prox
    const Vector u = rng.uniform_vector(4, -3.0, 3.0);
    EXPECT_LE((g.subgrad(u) - 2.0 * u).lpNorm<Eigen::Infinity>(), 1e-12);
  }
}

TEST(ProxRegularizedGenerator, SubgradientInversionOnFlatProx) {
  // tiny entries sit deep inside the flat stretch of the shrinkage
  const auto g = l1_via_prox(4, 0.7);
  const Vector u = vec({1e-12, -3e-9, 0.0, 1.9});
  const Vector u_star = g.subgrad(u);
  EXPECT_LE((g.mirror(u_star) - u).lpNorm<Eigen::Infinity>(), 1e-13);
  EXPECT_NO_THROW(check_subgradient(g, u, u_star));
}

TEST(ProxRegularizedGenerator, SubgradientInversionNonSeparable) {
  // psi(u) = u'Mu/2 has prox (I + M)^-1 and subgradient u + Mu
  Matrix M(2, 2);
  M << 2, 1, 1, 3;
  const Matrix inv = (Matrix::Identity(2, 2) + M).inverse();
  const auto g = prox_regularized_generator(
      2, [M](const Vector& u) { return 0.5 * u.dot(M * u); }, [inv](const Vector& u) -> Vector { return inv * u; });
  detail::Rng rng(10);
  for (int i = 0; i < 50; ++i) {
    const Vector u = rng.uniform_vector(2, -1, 1);
    EXPECT_LE((g.subgrad(u) - (u + M * u)).lpNorm<Eigen::Infinity>(), 1e-12);
  }
}

TEST(ProxRegularizedGenerator, RequiresPsiAndProx) {
  EXPECT_THROW(prox_regularized_generator(2, {}, [](const Vector& u) { return u; }), InvalidArgument);
  EXPECT_THROW(prox_regularized_generator(2, [](const Vector&) { return 0.0; }, {}), InvalidArgument);
}

TEST(Shrinkage, Examples) {
  EXPECT_EQ(shrinkage(1.0, vec({2, -0.5, 0})), vec({1, 0, 0}));
  const Vector u = vec({0.3, -1.7, 0.0, 5.0});
  EXPECT_EQ(shrinkage(0.0, u), u);
  EXPECT_NEAR(shrinkage(0.3, vec({0.7}))[0], 0.4, 1e-15);
  EXPECT_NEAR(oracle::golden_section_prox(0.3, 0.7), 0.4, 1e-8);
}

TEST(Shrinkage, NegativeThresholdRejected) { EXPECT_THROW(shrinkage(-0.1, vec({1})), InvalidArgument); }

TEST(Shrinkage, ZerosArePositiveZeroBitExact) {
  const Vector s = shrinkage(1.0, vec({-1.0, -0.999, -0.0, 0.5, 1.0}));
  for (Eigen::Index i = 0; i < s.size(); ++i) EXPECT_EQ(std::bit_cast<std::uint64_t>(s[i]), 0u);
}

TEST(Shrinkage, MatchesGoldenSectionOracle) {
  detail::Rng rng(6);
  for (int i = 0; i < 1000; ++i) {
    const double gamma = rng.uniform(0.0, 2.0);
    const double u = rng.uniform(-4.0, 4.0);
    EXPECT_NEAR(shrinkage(gamma, vec({u}))[0], oracle::golden_section_prox(gamma, u), 1e-8);
  }
}

TEST(DualPairs, MakeAndFromDual) {
  const auto g = augmented_l1_generator(2, 1.0);
  const auto p = make_dual_pair(g, vec({0.5, 0.0}));
  EXPECT_EQ(p.dual, vec({1.5, 0.0}));
  const auto q = dual_pair_from_dual(g, vec({2.0, -0.5}));
  EXPECT_EQ(q.primal, vec({1.0, 0.0}));
  EXPECT_THROW(make_dual_pair(g, vec({1, 2, 3})), InvalidArgument);
}

TEST(BregmanDistance, Examples) {
  const auto e = euclidean_generator(2);
  const Vector v = vec({0.3, -1});
  EXPECT_EQ(bregman_distance(e, v, v, v), 0.0);
  // omega(1) - omega(-1) - (-2)(2) with omega = |.| + .^2/2
  const auto a = augmented_l1_generator(1, 1.0);
  EXPECT_DOUBLE_EQ(bregman_distance(a, vec({1}), vec({-1}), vec({-2})), 4.0);
}

TEST(BregmanDistance, NonCanonicalSubgradientAccepted) {
  // at 0 any dual in [-gamma, gamma] is a subgradient
  const auto a = augmented_l1_generator(1, 1.0);
  EXPECT_DOUBLE_EQ(bregman_distance(a, vec({2}), vec({0}), vec({0.5})), 2.0 + 2.0 - 1.0);
}

TEST(BregmanDistance, InconsistentDualRejected) {
  const auto e = euclidean_generator(2);
  EXPECT_THROW(bregman_distance(e, vec({1, 0}), vec({0, 0}), vec({1, 0})), InconsistentDual);
  const auto a = augmented_l1_generator(1, 1.0);
  EXPECT_THROW(bregman_distance(a, vec({1}), vec({0}), vec({1.5})), InconsistentDual);
  EXPECT_THROW(check_subgradient(a, vec({1}), vec({2, 0})), InvalidArgument);
}

TEST(BregmanDistance, LowerBoundProperty) {
  detail::Rng rng(7);
  for (const auto& g : {euclidean_generator(5), augmented_l1_generator(5, 0.4)}) {
    for (int i = 0; i < 1000; ++i) {
      const Vector u = rng.uniform_vector(5, -2.0, 2.0);
      const auto v = dual_pair_from_dual(g, rng.uniform_vector(5, -2.0, 2.0));
      EXPECT_GE(bregman_distance(g, u, v.primal, v.dual) - 0.5 * g.modulus * (u - v.primal).squaredNorm(), -1e-12);
    }
  }
}

TEST(ThreePoint, Examples) {
  const auto e = euclidean_generator(3);
  const Vector v = vec({1, 2, 3});
  EXPECT_EQ(three_point_residual(e, v, v, v, v, v), 0.0);
  detail::Rng rng(8);
  for (int i = 0; i < 1000; ++i) {
    const Vector u = rng.uniform_vector(3, -2.0, 2.0);
    const Vector p = rng.uniform_vector(3, -2.0, 2.0);
    const Vector q = rng.uniform_vector(3, -2.0, 2.0);
    EXPECT_LE(std::abs(three_point_residual(e, u, p, p, q, q)), 1e-12);
  }
  const auto a = augmented_l1_generator(3, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const Vector u = rng.uniform_vector(3, -2.0, 2.0);
    const auto p = make_dual_pair(a, shrinkage(0.5, rng.uniform_vector(3, -2.0, 2.0)));
    const auto q = make_dual_pair(a, shrinkage(0.5, rng.uniform_vector(3, -2.0, 2.0)));
    EXPECT_LE(std::abs(three_point_residual(a, u, p.primal, p.dual, q.primal, q.dual)), 1e-10);
  }
}

TEST(ConjugateDuality, EuclideanBothSidesHalfSquaredDistance) {
  const auto e = euclidean_generator(2);
  const Vector p = vec({1, -1});
  const Vector q = vec({0.5, 2});
  EXPECT_DOUBLE_EQ(fenchel_conjugate(e, q), 0.5 * q.squaredNorm());
  EXPECT_LE(conjugate_duality_residual(e, p, p, q, q), 1e-15);
  EXPECT_EQ(conjugate_duality_residual(e, p, p, p, p), 0.0);
}

TEST(ConjugateDuality, AugmentedL1ConjugateIsHalfSquaredShrinkage) {
  const auto a = augmented_l1_generator(4, 0.6);
  detail::Rng rng(9);
  for (int i = 0; i < 1000; ++i) {
    const Vector u_star = rng.uniform_vector(4, -3.0, 3.0);
    EXPECT_NEAR(a.conjugate(u_star), 0.5 * shrinkage(0.6, u_star).squaredNorm(), 1e-12);
    const auto p = dual_pair_from_dual(a, u_star);
    const auto q = dual_pair_from_dual(a, rng.uniform_vector(4, -3.0, 3.0));
    EXPECT_LE(conjugate_duality_residual(a, p.primal, p.dual, q.primal, q.dual), 1e-10);
  }
}

TEST(ConjugateDuality, MissingConjugateUnsupported) {
  auto g = euclidean_generator(1);
  g.conjugate = nullptr;
  EXPECT_THROW(conjugate_duality_residual(g, vec({1}), vec({1}), vec({0}), vec({0})), UnsupportedOperation);
}
