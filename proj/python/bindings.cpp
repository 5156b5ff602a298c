#include "bregsp/bregman.hpp"
#include "bregsp/diagnostics.hpp"
#include "bregsp/errors.hpp"
#include "bregsp/experiment.hpp"
#include "bregsp/operators.hpp"
#include "bregsp/problems.hpp"
#include "bregsp/solvers.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>

namespace py = pybind11;
using namespace bregsp;

namespace {

// Generators and operators hold std::function members that may wrap Python
// callables; they are exposed by value and only read from C++.
std::vector<InequalityReport> checks_for(Method method, const BregmanGenerator& gen,
                                         const OperatorHandle& op, const Trace& trace,
                                         const Vector& u_ref, bool telescoped) {
  const DualPair ref = make_dual_pair(gen, u_ref);
  if (is_extrapolation(method)) {
    return telescoped ? check_bep_telescoped(gen, op, trace, ref.primal, ref.dual)
                      : check_bep_per_iteration(gen, op, trace, ref.primal, ref.dual);
  }
  return telescoped ? check_beg_telescoped(gen, op, trace, ref.primal, ref.dual)
                    : check_beg_regret(gen, op, trace, ref.primal, ref.dual);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Bregman extragradient and extrapolation solvers for saddle point problems";

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InconsistentDual>(m, "InconsistentDual", error.ptr());
  py::register_exception<UnsupportedOperation>(m, "UnsupportedOperation", error.ptr());
  py::register_exception<NoSaddlePoint>(m, "NoSaddlePoint", error.ptr());
  py::register_exception<DegenerateSample>(m, "DegenerateSample", error.ptr());
  py::register_exception<NumericalBreakdown>(m, "NumericalBreakdown", error.ptr());
  py::register_exception<ScheduleViolation>(m, "ScheduleViolation", error.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", error.ptr());

  py::enum_<GeneratorKind>(m, "GeneratorKind")
      .value("euclidean", GeneratorKind::euclidean)
      .value("augmented_l1", GeneratorKind::augmented_l1)
      .value("prox_regularized", GeneratorKind::prox_regularized)
      .value("custom", GeneratorKind::custom);

  py::class_<BregmanGenerator>(m, "BregmanGenerator")
      .def_readonly("kind", &BregmanGenerator::kind)
      .def_readonly("name", &BregmanGenerator::name)
      .def_readonly("dimension", &BregmanGenerator::dimension)
      .def_readonly("gamma", &BregmanGenerator::gamma)
      .def("__call__", [](const BregmanGenerator& g, const Vector& u) { return g.eval(u); })
      .def("mirror", [](const BregmanGenerator& g, const Vector& u_star) { return g.mirror(u_star); })
      .def("subgrad", [](const BregmanGenerator& g, const Vector& u) { return g.subgrad(u); })
      .def("conjugate", [](const BregmanGenerator& g, const Vector& u_star) {
        return fenchel_conjugate(g, u_star);
      });

  m.def("euclidean_generator", &euclidean_generator, py::arg("dimension"));
  m.def("augmented_l1_generator", &augmented_l1_generator, py::arg("dimension"), py::arg("gamma"));
  m.def(
      "prox_regularized_generator",
      [](Eigen::Index d, ScalarMap psi, VectorMap prox, std::optional<VectorMap> subgrad) {
        return prox_regularized_generator(d, std::move(psi), std::move(prox),
                                          subgrad ? *subgrad : VectorMap{});
      },
      py::arg("dimension"), py::arg("psi"), py::arg("prox"), py::arg("psi_subgrad") = py::none());

  m.def("shrinkage", &shrinkage, py::arg("gamma"), py::arg("u"));
  m.def("bregman_distance", &bregman_distance, py::arg("gen"), py::arg("u"), py::arg("v"),
        py::arg("v_star"));
  m.def("three_point_residual", &three_point_residual, py::arg("gen"), py::arg("u"), py::arg("p"),
        py::arg("p_star"), py::arg("q"), py::arg("q_star"));

  py::class_<OperatorHandle>(m, "Operator")
      .def_readonly("dimension", &OperatorHandle::dimension)
      .def_readonly("lipschitz", &OperatorHandle::lipschitz)
      .def("__call__", &OperatorHandle::operator());

  py::class_<SaddleProblem>(m, "SaddleProblem")
      .def_readonly("m", &SaddleProblem::m)
      .def_readonly("n", &SaddleProblem::n)
      .def("f", [](const SaddleProblem& p, const Vector& x, const Vector& y) { return p.f(x, y); })
      .def("value", &SaddleProblem::value)
      .def_property_readonly("saddle",
                             [](const SaddleProblem& p) -> std::optional<Vector> {
                               if (!p.saddle) return std::nullopt;
                               return p.stacked_saddle();
                             })
      .def("saddle_value", &SaddleProblem::saddle_value)
      .def("operator", &saddle_operator)
      .def_property_readonly("lipschitz",
                             [](const SaddleProblem& p) { return lipschitz_from_blocks(p.blocks); });

  m.def("make_bilinear", &make_bilinear, py::arg("A"), py::arg("b"), py::arg("c"));
  m.def("make_quadratic", &make_quadratic, py::arg("P"), py::arg("Q"), py::arg("A"), py::arg("b"),
        py::arg("c"));
  m.def(
      "random_instance",
      [](const std::string& kind, Eigen::Index mm, Eigen::Index n, std::uint64_t seed, double scale) {
        return random_instance(problem_kind_from_string(kind), mm, n, seed, scale);
      },
      py::arg("kind"), py::arg("m"), py::arg("n"), py::arg("seed"), py::arg("scale") = 1.0);

  py::class_<StepSchedule>(m, "StepSchedule")
      .def_readonly("lambda_", &StepSchedule::lambda)
      .def_readonly("rho", &StepSchedule::rho)
      .def("alpha", &StepSchedule::alpha_at)
      .def("beta", &StepSchedule::beta_at);

  m.def("constant_beg_schedule", &constant_beg_schedule, py::arg("lam"), py::arg("safety") = 1.0);
  m.def("constant_bep_schedule", &constant_bep_schedule, py::arg("lam"), py::arg("safety") = 1.0);
  m.def("explicit_schedule", &explicit_schedule, py::arg("alphas"), py::arg("betas"),
        py::arg("lam"), py::arg("rho") = py::none());

  py::class_<Average>(m, "Average")
      .def_readonly("point", &Average::point)
      .def_readonly("weight_sum", &Average::weight_sum);

  py::class_<TraceRecord>(m, "TraceRecord")
      .def_readonly("k", &TraceRecord::k)
      .def_readonly("primal", &TraceRecord::primal)
      .def_readonly("dual", &TraceRecord::dual)
      .def_readonly("midpoint", &TraceRecord::midpoint)
      .def_readonly("alpha", &TraceRecord::alpha)
      .def_readonly("beta", &TraceRecord::beta)
      .def_readonly("residual_norm", &TraceRecord::residual_norm)
      .def_readonly("dist_to_saddle", &TraceRecord::dist_to_saddle)
      .def_readonly("average", &TraceRecord::average);

  py::class_<Trace>(m, "Trace")
      .def_property_readonly("method", [](const Trace& t) { return to_string(t.method); })
      .def_readonly("iterations", &Trace::iterations)
      .def_readonly("converged", &Trace::converged)
      .def_readonly("operator_calls", &Trace::operator_calls)
      .def_readonly("records", &Trace::records)
      .def_readonly("final_average", &Trace::final_average)
      .def_property_readonly("final", [](const Trace& t) { return t.records.back().primal; });

  m.def(
      "run",
      [](const std::string& method, const BregmanGenerator& gen, const OperatorHandle& op,
         const StepSchedule& schedule, const Vector& u0, std::size_t max_iters,
         std::optional<double> tolerance, std::optional<Vector> reference) {
        RunOptions opts;
        opts.max_iters = max_iters;
        opts.tolerance = tolerance;
        opts.reference = std::move(reference);
        return run(method_from_string(method), gen, op, schedule, initial_state(gen, u0).iterate,
                   opts);
      },
      py::arg("method"), py::arg("gen"), py::arg("op"), py::arg("schedule"), py::arg("u0"),
      py::arg("max_iters") = 100, py::arg("tolerance") = py::none(),
      py::arg("reference") = py::none());

  py::class_<InequalityReport>(m, "InequalityReport")
      .def_readonly("name", &InequalityReport::name)
      .def_readonly("k", &InequalityReport::k)
      .def_readonly("lhs", &InequalityReport::lhs)
      .def_readonly("rhs", &InequalityReport::rhs)
      .def_readonly("residual", &InequalityReport::residual)
      .def_readonly("tolerance", &InequalityReport::tolerance)
      .def_readonly("passed", &InequalityReport::pass);

  m.def(
      "check_regret",
      [](const std::string& method, const BregmanGenerator& gen, const OperatorHandle& op,
         const Trace& trace, const Vector& u_ref, bool telescoped) {
        return checks_for(method_from_string(method), gen, op, trace, u_ref, telescoped);
      },
      py::arg("method"), py::arg("gen"), py::arg("op"), py::arg("trace"), py::arg("u_ref"),
      py::arg("telescoped") = false);
  m.def("check_distance_bound", &check_distance_bound, py::arg("gen"), py::arg("trace"),
        py::arg("solution"), py::arg("atol") = 1e-9);

  py::class_<GapRecord>(m, "GapRecord")
      .def_readonly("k", &GapRecord::k)
      .def_readonly("weight_sum", &GapRecord::weight_sum)
      .def_readonly("value_error", &GapRecord::value_error)
      .def_readonly("bound_rhs", &GapRecord::bound_rhs)
      .def_readonly("passed", &GapRecord::pass);
  m.def("gap_bound_series", &gap_bound_series, py::arg("problem"), py::arg("gen"), py::arg("trace"),
        py::arg("atol") = 1e-9);

  // Config given as a JSON string; returns (exit_code, error, summary JSON string).
  m.def(
      "run_config",
      [](const std::string& config_json, std::optional<std::string> out_dir) {
        auto config = parse_config(nlohmann::json::parse(config_json));
        if (out_dir) config.out_dir = *out_dir;
        ExperimentOutcome o;
        {
          py::gil_scoped_release release;
          o = run_experiment(config, out_dir.has_value());
        }
        return py::make_tuple(o.exit_code, o.error, o.summary.dump());
      },
      py::arg("config_json"), py::arg("out_dir") = py::none());
}
