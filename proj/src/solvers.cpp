#include "bregsp/solvers.hpp"

#include "bregsp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <utility>

namespace bregsp {

namespace {

Vector evaluate(const OperatorHandle& op, const Vector& u, std::size_t k) {
  Vector out = op(u);
  if (!out.allFinite()) throw NumericalBreakdown("operator returned a non-finite value", k);
  return out;
}

bool leq(double lhs, double rhs) { return lhs <= rhs + kScheduleTol * std::max(1.0, std::abs(rhs)); }

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

std::string to_string(Method method) {
  switch (method) {
    case Method::beg: return "beg";
    case Method::bep: return "bep";
    case Method::eg_reference: return "eg_reference";
    case Method::ogda_reference: return "ogda_reference";
  }
  return "unknown";
}

Method method_from_string(const std::string& s) {
  if (s == "beg") return Method::beg;
  if (s == "bep") return Method::bep;
  if (s == "eg_reference") return Method::eg_reference;
  if (s == "ogda_reference") return Method::ogda_reference;
  throw InvalidArgument("unknown method '" + s + "'");
}

bool is_extrapolation(Method method) {
  return method == Method::bep || method == Method::ogda_reference;
}

double StepSchedule::previous_alpha(std::size_t k) const {
  if (k == 0) return alpha_at(0) * beta_at(0);
  return alpha_at(k - 1);
}

StepSchedule constant_beg_schedule(double lambda, double safety) {
  if (!(lambda > 0.0)) throw InvalidArgument("constant_beg_schedule needs lambda > 0");
  if (!(safety > 0.0 && safety <= 1.0)) throw InvalidArgument("safety must lie in (0, 1]");
  StepSchedule s;
  const double a = safety / lambda;
  s.alpha = [a](std::size_t) { return a; };
  s.lambda = lambda;
  return s;
}

StepSchedule constant_bep_schedule(double lambda, double safety) {
  if (!(lambda > 0.0)) throw InvalidArgument("constant_bep_schedule needs lambda > 0");
  if (!(safety > 0.0 && safety <= 1.0)) throw InvalidArgument("safety must lie in (0, 1]");
  StepSchedule s;
  const double a = safety / (2.0 * lambda);
  s.alpha = [a](std::size_t) { return a; };
  s.beta = [](std::size_t) { return 1.0; };
  s.lambda = lambda;
  s.rho = 1.0 - safety / 2.0;
  return s;
}

StepSchedule explicit_schedule(std::vector<double> alphas, std::vector<double> betas, double lambda,
                               std::optional<double> rho) {
  if (alphas.empty()) throw InvalidArgument("explicit schedule needs at least one alpha");
  StepSchedule s;
  s.alpha = [a = std::move(alphas)](std::size_t k) { return a[std::min(k, a.size() - 1)]; };
  if (!betas.empty()) {
    s.beta = [b = std::move(betas)](std::size_t k) { return b[std::min(k, b.size() - 1)]; };
  }
  s.lambda = lambda;
  s.rho = rho;
  return s;
}

ScheduleReport validate_schedule(Method method, const StepSchedule& schedule, std::size_t horizon) {
  ScheduleReport report;
  auto fail = [&](std::string condition, std::size_t k, std::string message) {
    report.valid = false;
    report.condition = std::move(condition);
    report.k = k;
    report.message = std::move(message);
    return report;
  };
  if (!schedule.alpha) return fail("alpha_defined", 0, "schedule has no step sizes");
  const double lambda = schedule.lambda;
  if (!(lambda >= 0.0)) return fail("lambda_nonnegative", 0, "lambda must be nonnegative");
  const bool extrapolation = is_extrapolation(method);
  if (extrapolation && schedule.rho && !(*schedule.rho > 0.0)) {
    return fail("rho_positive", 0, "rho must be positive");
  }
  for (std::size_t k = 0; k <= horizon; ++k) {
    const double a = schedule.alpha_at(k);
    if (!(a > 0.0) || !std::isfinite(a)) {
      return fail("alpha_positive", k, "alpha_k = " + fmt_double(a) + " is not positive");
    }
    if (!extrapolation) {
      if (!leq(lambda * a, 1.0)) {
        return fail("lambda*alpha_k<=1", k,
                    "lambda * alpha_k = " + fmt_double(lambda * a) + " exceeds 1");
      }
      continue;
    }
    const double b = schedule.beta_at(k);
    if (!(b >= 0.0) || !std::isfinite(b)) {
      return fail("beta_nonnegative", k, "beta_k = " + fmt_double(b) + " is negative");
    }
    const double prev = schedule.previous_alpha(k);
    if (std::abs(a * b - prev) > kScheduleTol * std::max(1.0, std::abs(prev))) {
      return fail("alpha_k*beta_k=alpha_{k-1}", k,
                  "alpha_k * beta_k = " + fmt_double(a * b) + " differs from alpha_{k-1} = " +
                      fmt_double(prev));
    }
    if (!leq(lambda * (a + prev), 1.0)) {
      return fail("lambda*(alpha_k+alpha_{k-1})<=1", k,
                  "lambda * (alpha_k + alpha_{k-1}) = " + fmt_double(lambda * (a + prev)) +
                      " exceeds 1");
    }
    if (schedule.rho && !leq(lambda * a, 1.0 - *schedule.rho)) {
      return fail("lambda*alpha_k<=1-rho", k,
                  "lambda * alpha_k = " + fmt_double(lambda * a) + " exceeds 1 - rho");
    }
  }
  return report;
}

SolverState initial_state(const BregmanGenerator& gen, const Vector& u0) {
  SolverState s;
  s.iterate = make_dual_pair(gen, u0);
  return s;
}

SolverState beg_step(const BregmanGenerator& gen, const OperatorHandle& op, const SolverState& state,
                     double alpha_k) {
  if (!(alpha_k > 0.0)) throw InvalidArgument("beg_step needs alpha_k > 0");
  SolverState next;
  const Vector fu = evaluate(op, state.iterate.primal, state.k);
  Vector mid = gen.mirror(state.iterate.dual - alpha_k * fu);
  const Vector fmid = evaluate(op, mid, state.k);
  next.iterate.dual = state.iterate.dual - alpha_k * fmid;
  next.iterate.primal = gen.mirror(next.iterate.dual);
  next.midpoint = std::move(mid);
  next.k = state.k + 1;
  next.operator_calls = state.operator_calls + 2;
  return next;
}

SolverState bep_step(const BregmanGenerator& gen, const OperatorHandle& op, const SolverState& state,
                     double alpha_k, double beta_k) {
  if (!(alpha_k > 0.0)) throw InvalidArgument("bep_step needs alpha_k > 0");
  if (!(beta_k >= 0.0)) throw InvalidArgument("bep_step needs beta_k >= 0");
  SolverState next;
  Vector fu = evaluate(op, state.iterate.primal, state.k);
  const Vector& fprev = state.previous_operator ? *state.previous_operator : fu;
  next.iterate.dual = state.iterate.dual - alpha_k * fu - (alpha_k * beta_k) * (fu - fprev);
  next.iterate.primal = gen.mirror(next.iterate.dual);
  next.previous_operator = std::move(fu);
  next.k = state.k + 1;
  next.operator_calls = state.operator_calls + 1;
  return next;
}

Vector classical_eg_step(const OperatorHandle& op, const Vector& u, double eta) {
  if (!(eta > 0.0)) throw InvalidArgument("classical_eg_step needs eta > 0");
  const Vector forecast = u - eta * op(u);
  return u - eta * op(forecast);
}

Vector ogda_step(const OperatorHandle& op, const Vector& u, const Vector& f_prev, double eta) {
  if (!(eta > 0.0)) throw InvalidArgument("ogda_step needs eta > 0");
  return u - 2.0 * eta * op(u) + eta * f_prev;
}

Average update_average(const std::optional<Average>& previous, const Vector& z, double weight) {
  if (!(weight > 0.0)) throw InvalidArgument("averaging weight must be positive");
  if (!previous) return Average{z, weight};
  if (previous->point.size() != z.size()) throw InvalidArgument("averaged point has a different size");
  Average out;
  out.weight_sum = previous->weight_sum + weight;
  out.point = (previous->weight_sum * previous->point + weight * z) / out.weight_sum;
  return out;
}

Trace run(Method method, const BregmanGenerator& gen, const OperatorHandle& op,
          const StepSchedule& schedule, const DualPair& init, const RunOptions& options) {
  if (options.enforce_schedule) {
    const ScheduleReport report = validate_schedule(method, schedule, options.max_iters);
    if (!report.valid) throw ScheduleViolation(report.condition, report.k);
  }
  if (options.record_stride < 1) throw InvalidArgument("record stride must be >= 1");
  if (op.dimension != 0 && init.dual.size() != op.dimension) {
    throw InvalidArgument("initial point has dimension " + std::to_string(init.dual.size()) +
                          ", operator expects " + std::to_string(op.dimension));
  }
  const bool reference_method = method == Method::eg_reference || method == Method::ogda_reference;

  Trace trace;
  trace.method = method;
  trace.generator = reference_method ? "euclidean" : gen.name;
  trace.lambda = schedule.lambda;
  trace.alpha_minus_one = schedule.previous_alpha(0);
  trace.heuristic_schedule = schedule.heuristic;
  trace.stride = options.record_stride;

  std::optional<Vector> ref_point = options.reference;
  auto distance_to_reference = [&](const DualPair& p) -> std::optional<double> {
    if (!ref_point) return std::nullopt;
    if (reference_method) return 0.5 * (*ref_point - p.primal).squaredNorm();
    return bregman_distance_unchecked(gen, *ref_point, p.primal, p.dual);
  };

  // The primal is always re-derived from the dual so the pair is consistent.
  DualPair current;
  if (reference_method) {
    current = DualPair{init.primal, init.primal};
  } else {
    current = DualPair{gen.mirror(init.dual), init.dual};
  }
  std::optional<Vector> previous_f;
  std::optional<Average> average;
  bool first_residual = true;

  auto note_residual = [&](double r) {
    if (first_residual) {
      trace.min_residual = r;
      trace.max_residual = r;
      first_residual = false;
    } else {
      trace.min_residual = std::min(trace.min_residual, r);
      trace.max_residual = std::max(trace.max_residual, r);
    }
  };
  auto push = [&](TraceRecord&& rec, bool force) {
    if (force || rec.k % options.record_stride == 0) {
      trace.records.push_back(std::move(rec));
      return true;
    }
    return false;
  };

  std::size_t k = 0;
  for (;; ++k) {
    TraceRecord rec;
    rec.k = k;
    rec.primal = current.primal;
    rec.dual = current.dual;
    rec.alpha = schedule.alpha_at(k);
    rec.beta = is_extrapolation(method) ? schedule.beta_at(k) : 0.0;
    rec.dist_to_saddle = distance_to_reference(current);
    rec.average = average;

    if (k == options.max_iters) {
      rec.residual_norm = evaluate(op, current.primal, k).norm();
      note_residual(rec.residual_norm);
      push(std::move(rec), true);
      break;
    }

    const double alpha = rec.alpha;
    const double beta = rec.beta;
    Vector fu = evaluate(op, current.primal, k);
    rec.residual_norm = fu.norm();
    note_residual(rec.residual_norm);

    switch (method) {
      case Method::beg: {
        Vector mid = gen.mirror(current.dual - alpha * fu);
        const Vector fmid = evaluate(op, mid, k);
        trace.operator_calls += 2;
        current.dual = current.dual - alpha * fmid;
        current.primal = gen.mirror(current.dual);
        average = update_average(average, mid, alpha);
        if (options.tolerance && fmid.norm() <= *options.tolerance) trace.converged = true;
        rec.midpoint = std::move(mid);
        break;
      }
      case Method::eg_reference: {
        rec.midpoint = Vector(current.primal - alpha * fu);
        const Vector next = classical_eg_step(op, current.primal, alpha);
        if (!next.allFinite()) throw NumericalBreakdown("operator returned a non-finite value", k);
        trace.operator_calls += 2;
        average = update_average(average, *rec.midpoint, alpha);
        if (options.tolerance && evaluate(op, *rec.midpoint, k).norm() <= *options.tolerance) {
          trace.converged = true;
        }
        current = DualPair{next, next};
        break;
      }
      case Method::bep:
      case Method::ogda_reference: {
        if (options.tolerance && rec.residual_norm <= *options.tolerance) {
          trace.converged = true;
          push(std::move(rec), true);
          break;
        }
        const Vector fprev = previous_f ? *previous_f : fu;
        if (method == Method::bep) {
          current.dual = current.dual - alpha * fu - (alpha * beta) * (fu - fprev);
          current.primal = gen.mirror(current.dual);
        } else {
          const Vector next = ogda_step(op, current.primal, fprev, alpha);
          if (!next.allFinite()) throw NumericalBreakdown("operator returned a non-finite value", k);
          current = DualPair{next, next};
        }
        trace.operator_calls += 1;
        average = update_average(average, current.primal, alpha);
        previous_f = std::move(fu);
        break;
      }
    }
    if (trace.converged && is_extrapolation(method)) break;
    push(std::move(rec), false);
    if (trace.converged) {
      ++k;
      TraceRecord last;
      last.k = k;
      last.primal = current.primal;
      last.dual = current.dual;
      last.alpha = schedule.alpha_at(k);
      last.dist_to_saddle = distance_to_reference(current);
      last.average = average;
      last.residual_norm = evaluate(op, current.primal, k).norm();
      note_residual(last.residual_norm);
      push(std::move(last), true);
      break;
    }
  }
  trace.iterations = k;
  trace.final_average = average;
  return trace;
}

}  // namespace bregsp
