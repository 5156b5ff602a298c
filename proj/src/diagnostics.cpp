#include "bregsp/diagnostics.hpp"

#include "bregsp/detail/random.hpp"
#include "bregsp/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <utility>

namespace bregsp {

namespace {

void require_complete(const Trace& trace) {
  if (!trace.complete()) {
    throw UnsupportedOperation("diagnostics need a trace recorded with stride 1");
  }
  if (trace.records.empty()) throw InvalidArgument("trace has no records");
}

void require_method(const Trace& trace, bool extrapolation, const char* check) {
  if (is_extrapolation(trace.method) != extrapolation) {
    throw InvalidArgument(std::string(check) + " does not apply to a " + to_string(trace.method) +
                          " trace");
  }
}

// (u_{k-1}, u*_{k-1}, alpha_{k-1}) with the u_{-1} = u_0 convention.
struct Previous {
  const Vector& primal;
  const Vector& dual;
  double alpha;
};

Previous previous_of(const Trace& trace, std::size_t k) {
  if (k == 0) {
    const auto& r = trace.records[0];
    return {r.primal, r.dual, trace.alpha_minus_one};
  }
  const auto& r = trace.records[k - 1];
  return {r.primal, r.dual, r.alpha};
}

}  // namespace

double Tolerance::slack(double rhs) const { return atol + rtol * std::abs(rhs); }

InequalityReport make_report(std::string name, std::size_t k, double lhs, double rhs,
                             const Tolerance& tol) {
  InequalityReport r;
  r.name = std::move(name);
  r.k = k;
  r.lhs = lhs;
  r.rhs = rhs;
  r.residual = rhs - lhs;
  r.tolerance = tol.slack(rhs);
  r.pass = r.residual >= -r.tolerance;
  return r;
}

bool all_pass(const std::vector<InequalityReport>& reports) {
  return std::all_of(reports.begin(), reports.end(), [](const auto& r) { return r.pass; });
}

std::vector<InequalityReport> check_beg_regret(const BregmanGenerator& gen,
                                               const OperatorHandle& op, const Trace& trace,
                                               const Vector& u_ref, const Vector& u_ref_star,
                                               const Tolerance& tol) {
  require_complete(trace);
  require_method(trace, false, "check_beg_regret");
  check_subgradient(gen, u_ref, u_ref_star);
  std::vector<InequalityReport> out;
  const auto& recs = trace.records;
  for (std::size_t k = 0; k + 1 < recs.size(); ++k) {
    const auto& cur = recs[k];
    const auto& next = recs[k + 1];
    if (!cur.midpoint) break;
    const Vector& mid = *cur.midpoint;
    const double lhs = cur.alpha * op(mid).dot(mid - u_ref);
    const double rhs = bregman_distance_unchecked(gen, u_ref, cur.primal, cur.dual) -
                       bregman_distance_unchecked(gen, u_ref, next.primal, next.dual);
    out.push_back(make_report("beg_regret", k, lhs, rhs, tol));
  }
  return out;
}

std::vector<InequalityReport> check_beg_telescoped(const BregmanGenerator& gen,
                                                   const OperatorHandle& op, const Trace& trace,
                                                   const Vector& u_ref, const Vector& u_ref_star,
                                                   const Tolerance& tol) {
  require_complete(trace);
  require_method(trace, false, "check_beg_telescoped");
  check_subgradient(gen, u_ref, u_ref_star);
  std::vector<InequalityReport> out;
  const auto& recs = trace.records;
  const double d0 = bregman_distance_unchecked(gen, u_ref, recs[0].primal, recs[0].dual);
  double sum = 0.0;
  for (std::size_t t = 1; t < recs.size(); ++t) {
    const auto& prev = recs[t - 1];
    if (!prev.midpoint) break;
    const Vector& mid = *prev.midpoint;
    sum += prev.alpha * op(mid).dot(mid - u_ref);
    const double rhs = d0 - bregman_distance_unchecked(gen, u_ref, recs[t].primal, recs[t].dual);
    out.push_back(make_report("beg_telescoped", t, sum, rhs, tol));
  }
  return out;
}

double ExtrapolationTerms::rhs() const {
  double s = 0.0;
  for (double t : terms) s += t;
  return s;
}

std::vector<ExtrapolationTerms> extrapolation_terms(const BregmanGenerator& gen,
                                                   const OperatorHandle& op, const Trace& trace,
                                                   const Vector& u_ref) {
  require_complete(trace);
  require_method(trace, true, "extrapolation_terms");
  const auto& recs = trace.records;
  const double lambda = trace.lambda;
  std::vector<ExtrapolationTerms> out;
  if (recs.size() < 2) return out;
  // F at every iterate, evaluated once
  std::vector<Vector> fvals;
  fvals.reserve(recs.size());
  for (const auto& r : recs) fvals.push_back(op(r.primal));
  for (std::size_t k = 0; k + 1 < recs.size(); ++k) {
    const auto& cur = recs[k];
    const auto& next = recs[k + 1];
    const Previous prev = previous_of(trace, k);
    const Vector& f_prev = fvals[k == 0 ? 0 : k - 1];
    const Vector& f_cur = fvals[k];
    const Vector& f_next = fvals[k + 1];
    ExtrapolationTerms e;
    e.k = k;
    e.lhs = cur.alpha * f_next.dot(next.primal - u_ref);
    e.terms[0] = cur.alpha * (f_next - f_cur).dot(next.primal - u_ref);
    e.terms[1] = -prev.alpha * (f_cur - f_prev).dot(cur.primal - u_ref);
    e.terms[2] = bregman_distance_unchecked(gen, u_ref, cur.primal, cur.dual);
    e.terms[3] = -bregman_distance_unchecked(gen, u_ref, next.primal, next.dual);
    e.terms[4] = lambda * prev.alpha * bregman_distance_unchecked(gen, cur.primal, prev.primal, prev.dual);
    e.terms[5] = -lambda * cur.alpha * bregman_distance_unchecked(gen, next.primal, cur.primal, cur.dual);
    out.push_back(e);
  }
  return out;
}

std::vector<ExtrapolationTerms> ogda_terms(const OperatorHandle& op, const Trace& trace,
                                           const Vector& u_ref, double eta, double lipschitz) {
  require_complete(trace);
  require_method(trace, true, "ogda_terms");
  if (!(eta > 0.0)) throw InvalidArgument("ogda_terms needs eta > 0");
  const auto& recs = trace.records;
  std::vector<ExtrapolationTerms> out;
  if (recs.size() < 2) return out;
  std::vector<Vector> fvals;
  fvals.reserve(recs.size());
  for (const auto& r : recs) fvals.push_back(op(r.primal));
  for (std::size_t k = 0; k + 1 < recs.size(); ++k) {
    const Vector& u_next = recs[k + 1].primal;
    const Vector& u_cur = recs[k].primal;
    const Vector& u_prev = recs[k == 0 ? 0 : k - 1].primal;
    const Vector& f_prev = fvals[k == 0 ? 0 : k - 1];
    ExtrapolationTerms e;
    e.k = k;
    e.lhs = fvals[k + 1].dot(u_next - u_ref);
    e.terms[0] = (fvals[k + 1] - fvals[k]).dot(u_next - u_ref);
    e.terms[1] = -(fvals[k] - f_prev).dot(u_cur - u_ref);
    e.terms[2] = (u_ref - u_cur).squaredNorm() / (2.0 * eta);
    e.terms[3] = -(u_ref - u_next).squaredNorm() / (2.0 * eta);
    e.terms[4] = 0.5 * lipschitz * (u_cur - u_prev).squaredNorm();
    e.terms[5] = -0.5 * lipschitz * (u_next - u_cur).squaredNorm();
    out.push_back(e);
  }
  return out;
}

std::vector<InequalityReport> check_bep_per_iteration(const BregmanGenerator& gen,
                                                      const OperatorHandle& op, const Trace& trace,
                                                      const Vector& u_ref,
                                                      const Vector& u_ref_star,
                                                      const Tolerance& tol) {
  check_subgradient(gen, u_ref, u_ref_star);
  std::vector<InequalityReport> out;
  for (const auto& e : extrapolation_terms(gen, op, trace, u_ref)) {
    out.push_back(make_report("bep_per_iteration", e.k, e.lhs, e.rhs(), tol));
  }
  return out;
}

std::vector<InequalityReport> check_bep_telescoped(const BregmanGenerator& gen,
                                                   const OperatorHandle& op, const Trace& trace,
                                                   const Vector& u_ref, const Vector& u_ref_star,
                                                   const Tolerance& tol) {
  require_complete(trace);
  require_method(trace, true, "check_bep_telescoped");
  check_subgradient(gen, u_ref, u_ref_star);
  const auto& recs = trace.records;
  std::vector<InequalityReport> out;
  const double d0 = bregman_distance_unchecked(gen, u_ref, recs[0].primal, recs[0].dual);
  double sum = 0.0;
  for (std::size_t t = 1; t < recs.size(); ++t) {
    const auto& prev = recs[t - 1];
    const auto& cur = recs[t];
    sum += prev.alpha * op(cur.primal).dot(cur.primal - u_ref);
    const double coeff = 1.0 - trace.lambda * prev.alpha;
    const double rhs = d0 - coeff * bregman_distance_unchecked(gen, u_ref, cur.primal, cur.dual);
    out.push_back(make_report("bep_telescoped", t, sum, rhs, tol));
  }
  return out;
}

std::vector<InequalityReport> check_distance_bound(const BregmanGenerator& gen, const Trace& trace,
                                                   const Vector& solution, double atol) {
  require_complete(trace);
  const auto& recs = trace.records;
  const bool extrapolation = is_extrapolation(trace.method);
  const Tolerance tol{atol, 0.0};
  const double d0 = bregman_distance_unchecked(gen, solution, recs[0].primal, recs[0].dual);
  std::vector<InequalityReport> out;
  for (std::size_t t = 1; t < recs.size(); ++t) {
    const double d = bregman_distance_unchecked(gen, solution, recs[t].primal, recs[t].dual);
    if (extrapolation) {
      const double coeff = 1.0 - trace.lambda * recs[t - 1].alpha;
      out.push_back(make_report("bep_distance_bound", t, coeff * d, d0, tol));
    } else {
      out.push_back(make_report("beg_distance_nonincrease", t, d, d0, tol));
    }
  }
  return out;
}

BallMax ball_max_bregman(const BregmanGenerator& gen, double radius, const Vector& u0,
                         const Vector& u0_star, std::uint64_t seed) {
  if (!(radius >= 0.0)) throw InvalidArgument("ball radius must be nonnegative");
  check_subgradient(gen, u0, u0_star);
  const Eigen::Index d = u0.size();
  if (radius == 0.0) {
    return {bregman_distance_unchecked(gen, Vector::Zero(d), u0, u0_star), true};
  }
  if (gen.kind == GeneratorKind::euclidean) {
    const double r = radius + u0.norm();
    return {0.5 * r * r, true};
  }
  auto value = [&](const Vector& z) { return bregman_distance_unchecked(gen, z, u0, u0_star); };
  // D(., u0; u0*) is convex, so its maximum over the ball sits on the sphere
  // and z <- R g / |g| with g a subgradient never decreases it.
  auto ascend = [&](Vector z) {
    double best = value(z);
    for (int it = 0; it < 200; ++it) {
      const Vector g = gen.subgrad(z) - u0_star;
      const double gn = g.norm();
      if (gn == 0.0) break;
      const Vector next = (radius / gn) * g;
      const double v = value(next);
      if (v <= best * (1.0 + 1e-15) + 1e-300) {
        best = std::max(best, v);
        break;
      }
      best = v;
      z = next;
    }
    return best;
  };
  auto on_sphere = [&](Vector v) -> Vector {
    const double n = v.norm();
    if (n == 0.0) {
      v = Vector::Ones(d);
      return (radius / std::sqrt(static_cast<double>(d))) * v;
    }
    return (radius / n) * v;
  };
  std::vector<Vector> starts;
  starts.push_back(on_sphere(-u0));
  starts.push_back(on_sphere(u0));
  starts.push_back(on_sphere(-u0_star));
  starts.push_back(on_sphere(u0_star));
  starts.push_back(on_sphere(Vector::Ones(d)));
  starts.push_back(on_sphere(-Vector::Ones(d)));
  {
    Vector e = Vector::Zero(d);
    e[0] = 1.0;
    starts.push_back(on_sphere(e));
    starts.push_back(on_sphere(-e));
  }
  detail::Rng rng(seed);
  for (int i = 0; i < 32; ++i) starts.push_back(on_sphere(rng.uniform_vector(d, -1.0, 1.0)));
  double best = value(Vector::Zero(d));
  for (const auto& s : starts) best = std::max(best, ascend(s));
  return {1.01 * best, false};
}

std::vector<GapRecord> gap_bound_series(const SaddleProblem& problem, const BregmanGenerator& gen,
                                        const Trace& trace, double atol) {
  require_complete(trace);
  if (!problem.saddle) throw UnsupportedOperation("gap bound needs a known saddle point");
  const auto& recs = trace.records;
  const Vector zbar = problem.stacked_saddle();
  const double fstar = problem.saddle_value();
  const bool extrapolation = is_extrapolation(trace.method);

  // Realized radius over the averaged points and the saddle.
  double radius = zbar.norm();
  for (std::size_t j = 0; j < recs.size(); ++j) {
    if (extrapolation) {
      radius = std::max(radius, recs[j].primal.norm());
    } else if (recs[j].midpoint) {
      radius = std::max(radius, recs[j].midpoint->norm());
    }
  }
  const Vector& u0 = recs[0].primal;
  const Vector& u0_star = recs[0].dual;
  const BallMax ball = ball_max_bregman(gen, radius, u0, u0_star);
  const bool tight = !extrapolation && gen.kind == GeneratorKind::euclidean;

  std::vector<GapRecord> out;
  for (std::size_t j = 1; j < recs.size(); ++j) {
    if (!recs[j].average) continue;
    const Average& avg = *recs[j].average;
    GapRecord g;
    g.k = j - 1;
    g.weight_sum = avg.weight_sum;
    g.value_error = std::abs(problem.value(avg.point) - fstar);
    g.radius = radius;
    g.bound_exact = ball.exact;
    g.bound_rhs = ball.value / avg.weight_sum;
    g.pass = g.value_error <= g.bound_rhs + atol;
    if (tight) {
      const Vector& u = recs[j].primal;
      const double m = radius * (u - u0).norm() + 0.5 * (u0.squaredNorm() - u.squaredNorm());
      g.tight_bound_rhs = m / avg.weight_sum;
    }
    out.push_back(g);
  }
  return out;
}

GapSides weighted_gap(const SaddleProblem& problem, const Trace& trace, const Vector& z_probe,
                      std::optional<std::size_t> k) {
  require_complete(trace);
  if (z_probe.size() != problem.dimension()) {
    throw InvalidArgument("probe point has dimension " + std::to_string(z_probe.size()) +
                          ", problem has " + std::to_string(problem.dimension()));
  }
  const auto& recs = trace.records;
  if (recs.size() < 2) throw InvalidArgument("trace has no averaged iterate");
  const std::size_t last = recs.size() - 2;
  const std::size_t kk = k.value_or(last);
  if (kk > last) throw InvalidArgument("averaged iterate index out of range");
  const bool extrapolation = is_extrapolation(trace.method);
  const OperatorHandle op = saddle_operator(problem);
  double sum = 0.0;
  for (std::size_t i = 0; i <= kk; ++i) {
    const Vector& z = extrapolation ? recs[i + 1].primal : *recs[i].midpoint;
    sum += recs[i].alpha * op(z).dot(z - z_probe);
  }
  const Average& avg = *recs[kk + 1].average;
  const Eigen::Index m = problem.m;
  const Eigen::Index n = problem.n;
  GapSides out;
  out.lhs = problem.f(avg.point.head(m), z_probe.tail(n)) - problem.f(z_probe.head(m), avg.point.tail(n));
  out.rhs = sum / avg.weight_sum;
  return out;
}

void write_reports_csv(std::ostream& out, const std::vector<InequalityReport>& reports) {
  out << "inequality_name,k,lhs,rhs,residual,pass\n";
  for (const auto& r : reports) {
    out << fmt::format("{},{},{:.17g},{:.17g},{:.17g},{}\n", r.name, r.k, r.lhs, r.rhs, r.residual,
                       r.pass ? "true" : "false");
  }
}

}  // namespace bregsp
