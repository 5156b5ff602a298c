#pragma once

#include "bregsp/bregman.hpp"
#include "bregsp/operators.hpp"
#include "bregsp/solvers.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace bregsp {

// A check passes when rhs - lhs >= -(atol + rtol |rhs|).
struct Tolerance {
  double atol = 1e-12;
  double rtol = 1e-9;

  double slack(double rhs) const;
};

inline constexpr Tolerance kPerIterationTolerance{1e-12, 1e-9};
inline constexpr Tolerance kTelescopedTolerance{1e-9, 1e-9};

struct InequalityReport {
  std::string name;
  std::size_t k = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;  // rhs - lhs
  double tolerance = 0.0;
  bool pass = true;
};

InequalityReport make_report(std::string name, std::size_t k, double lhs, double rhs,
                             const Tolerance& tol);

bool all_pass(const std::vector<InequalityReport>& reports);

// Per-step regret bound of the extragradient scheme:
//   alpha_k <F(ubar_k), ubar_k - u> <= D(u, u_k; u*_k) - D(u, u_{k+1}; u*_{k+1}).
std::vector<InequalityReport> check_beg_regret(const BregmanGenerator& gen,
                                               const OperatorHandle& op, const Trace& trace,
                                               const Vector& u_ref, const Vector& u_ref_star,
                                               const Tolerance& tol = kPerIterationTolerance);

// The regret bound summed over k < t, one report per t = 1..T.
std::vector<InequalityReport> check_beg_telescoped(const BregmanGenerator& gen,
                                                   const OperatorHandle& op, const Trace& trace,
                                                   const Vector& u_ref, const Vector& u_ref_star,
                                                   const Tolerance& tol = kTelescopedTolerance);

// The six right-hand terms of the per-step extrapolation bound, in order:
//   alpha_k <dF_{k+1}, u_{k+1} - u>, -alpha_{k-1} <dF_k, u_k - u>,
//   D(u, u_k), -D(u, u_{k+1}),
//   lambda alpha_{k-1} D(u_k, u_{k-1}), -lambda alpha_k D(u_{k+1}, u_k),
// with dF_k = F(u_k) - F(u_{k-1}) and u_{-1} = u_0.
struct ExtrapolationTerms {
  std::size_t k = 0;
  double lhs = 0.0;  // alpha_k <F(u_{k+1}), u_{k+1} - u>
  double terms[6] = {0, 0, 0, 0, 0, 0};

  double rhs() const;
};

std::vector<ExtrapolationTerms> extrapolation_terms(const BregmanGenerator& gen,
                                                   const OperatorHandle& op, const Trace& trace,
                                                   const Vector& u_ref);

// Euclidean, beta = 1, alpha = eta specialization (OGDA form), written
// directly in squared norms and scaled by 1/eta:
//   <F(u_{k+1}), u_{k+1} - u> <= <dF_{k+1}, u_{k+1} - u> - <dF_k, u_k - u>
//     + |u - u_k|^2 / (2 eta) - |u - u_{k+1}|^2 / (2 eta)
//     + L/2 |u_k - u_{k-1}|^2 - L/2 |u_{k+1} - u_k|^2.
std::vector<ExtrapolationTerms> ogda_terms(const OperatorHandle& op, const Trace& trace,
                                           const Vector& u_ref, double eta, double lipschitz);

std::vector<InequalityReport> check_bep_per_iteration(const BregmanGenerator& gen,
                                                      const OperatorHandle& op, const Trace& trace,
                                                      const Vector& u_ref,
                                                      const Vector& u_ref_star,
                                                      const Tolerance& tol = kPerIterationTolerance);

// sum_{k<t} alpha_k <F(u_{k+1}), u_{k+1} - u> <= D(u,u_0) - (1 - lambda alpha_{t-1}) D(u,u_t),
// one report per t = 1..T.
std::vector<InequalityReport> check_bep_telescoped(const BregmanGenerator& gen,
                                                   const OperatorHandle& op, const Trace& trace,
                                                   const Vector& u_ref, const Vector& u_ref_star,
                                                   const Tolerance& tol = kTelescopedTolerance);

// Distance to a solution of F(u) = 0 along the run:
//   extragradient:  D(ubar, u_t) <= D(ubar, u_0)
//   extrapolation:  (1 - lambda alpha_{t-1}) D(ubar, u_t) <= D(ubar, u_0)
// Absolute tolerance 1e-9.
std::vector<InequalityReport> check_distance_bound(const BregmanGenerator& gen, const Trace& trace,
                                                   const Vector& solution, double atol = 1e-9);

struct BallMax {
  double value = 0.0;
  bool exact = false;
};

// max over |z| <= radius of D(z, u0; u0*). Closed form for the Euclidean
// generator; otherwise a multistart ascent estimate inflated by 1%.
BallMax ball_max_bregman(const BregmanGenerator& gen, double radius, const Vector& u0,
                         const Vector& u0_star, std::uint64_t seed = 7);

struct GapRecord {
  std::size_t k = 0;  // index of the averaged iterate
  double weight_sum = 0.0;
  double value_error = 0.0;
  double bound_rhs = 0.0;
  double radius = 0.0;
  bool bound_exact = false;
  bool pass = true;
  // Bound that keeps the final distance term; Euclidean extragradient runs only.
  std::optional<double> tight_bound_rhs;
};

// |f(x^_k, y^_k) - f(x_bar, y_bar)| against max_{|z|<=R} D(z, u0; u0*) / s_k,
// with R the largest norm among the averaged points and the saddle.
std::vector<GapRecord> gap_bound_series(const SaddleProblem& problem, const BregmanGenerator& gen,
                                        const Trace& trace, double atol = 1e-9);

struct GapSides {
  double lhs = 0.0;
  double rhs = 0.0;
};

// f(x^_k, y) - f(x, y^_k) and (1/s_k) sum_i r_i <F(z_i), z_i - z> at z = [x; y].
// k defaults to the last averaged iterate in the trace.
GapSides weighted_gap(const SaddleProblem& problem, const Trace& trace, const Vector& z_probe,
                      std::optional<std::size_t> k = std::nullopt);

void write_reports_csv(std::ostream& out, const std::vector<InequalityReport>& reports);

}  // namespace bregsp
