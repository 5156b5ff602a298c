#pragma once

#include "bregsp/bregman.hpp"
#include "bregsp/operators.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace bregsp {

// beg / bep are the Bregman extragradient and extrapolation iterations.
// The two reference methods are the textbook Euclidean extragradient and
// optimistic gradient descent ascent updates, kept as independent oracles.
enum class Method { beg, bep, eg_reference, ogda_reference };

std::string to_string(Method method);
Method method_from_string(const std::string& s);

// True for bep and ogda_reference.
bool is_extrapolation(Method method);

struct StepSchedule {
  std::function<double(std::size_t)> alpha;
  // Extrapolation weights; empty means beta_k = 0.
  std::function<double(std::size_t)> beta;
  // Relative Lipschitz constant the schedule is validated against.
  double lambda = 0.0;
  std::optional<double> rho;
  // lambda came from a sampling estimate rather than a certified bound.
  bool heuristic = false;

  double alpha_at(std::size_t k) const { return alpha(k); }
  double beta_at(std::size_t k) const { return beta ? beta(k) : 0.0; }
  // alpha_{k-1}, with alpha_{-1} := alpha_0 beta_0.
  double previous_alpha(std::size_t k) const;
};

// alpha_k = safety / lambda.
StepSchedule constant_beg_schedule(double lambda, double safety = 1.0);
// alpha_k = safety / (2 lambda), beta_k = 1, rho = 1 - safety / 2.
StepSchedule constant_bep_schedule(double lambda, double safety = 1.0);
// Explicit step lists; index k past the end reuses the last entry.
StepSchedule explicit_schedule(std::vector<double> alphas, std::vector<double> betas, double lambda,
                               std::optional<double> rho = std::nullopt);

struct ScheduleReport {
  bool valid = true;
  std::string condition;  // empty when valid
  std::size_t k = 0;      // first violating index
  std::string message;
};

inline constexpr double kScheduleTol = 1e-12;

// Checks the step conditions for k = 0..horizon. Never throws on violations.
ScheduleReport validate_schedule(Method method, const StepSchedule& schedule, std::size_t horizon);

struct SolverState {
  DualPair iterate;
  // BEG: the forecast point of the last step.
  std::optional<Vector> midpoint;
  // BEP: F(u_{k-1}). Absent at k = 0, meaning u_{-1} = u_0.
  std::optional<Vector> previous_operator;
  std::size_t k = 0;
  std::size_t operator_calls = 0;
};

SolverState initial_state(const BregmanGenerator& gen, const Vector& u0);

SolverState beg_step(const BregmanGenerator& gen, const OperatorHandle& op, const SolverState& state,
                     double alpha_k);
SolverState bep_step(const BregmanGenerator& gen, const OperatorHandle& op, const SolverState& state,
                     double alpha_k, double beta_k);

// u - eta F(u - eta F(u)).
Vector classical_eg_step(const OperatorHandle& op, const Vector& u, double eta);
// u - 2 eta F(u) + eta F(u_prev), given F(u_prev).
Vector ogda_step(const OperatorHandle& op, const Vector& u, const Vector& f_prev, double eta);

struct Average {
  Vector point;
  double weight_sum = 0.0;
};

// s_k = s_{k-1} + r_k and z^_k = (s_{k-1} z^_{k-1} + r_k z_k) / s_k.
Average update_average(const std::optional<Average>& previous, const Vector& z, double weight);

struct TraceRecord {
  std::size_t k = 0;
  Vector primal;
  Vector dual;
  // BEG forecast point computed from this iterate; absent on the final record.
  std::optional<Vector> midpoint;
  double alpha = 0.0;
  double beta = 0.0;
  double residual_norm = 0.0;  // |F(u_k)|
  std::optional<double> dist_to_saddle;
  // Weighted average of z_0..z_{k-1}; absent at k = 0.
  std::optional<Average> average;
};

struct Trace {
  Method method = Method::beg;
  std::string generator;
  double lambda = 0.0;
  double alpha_minus_one = 0.0;
  bool heuristic_schedule = false;
  std::size_t stride = 1;
  std::size_t iterations = 0;
  bool converged = false;
  std::size_t operator_calls = 0;
  double min_residual = 0.0;
  double max_residual = 0.0;
  std::vector<TraceRecord> records;
  std::optional<Average> final_average;

  bool complete() const { return stride == 1; }
};

struct RunOptions {
  std::size_t max_iters = 100;
  // Stop once |F(candidate)| <= tolerance (BEG tests the forecast point).
  std::optional<double> tolerance;
  // Keep every stride-th record (and the last one).
  std::size_t record_stride = 1;
  // Known saddle point for the distance column.
  std::optional<Vector> reference;
  // false skips the step-size check; only for demonstrating failing bounds
  bool enforce_schedule = true;
};

// init.dual must be a subgradient at init.primal; initial_state() builds one.
// Throws ScheduleViolation when validate_schedule fails over max_iters.
Trace run(Method method, const BregmanGenerator& gen, const OperatorHandle& op,
          const StepSchedule& schedule, const DualPair& init, const RunOptions& options);

}  // namespace bregsp
