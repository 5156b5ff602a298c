#include "bregsp/experiment.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace bregsp {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

template <typename T>
T field(const json& j, const char* key, const T& fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(key, e.what());
  }
}

Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json vector_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

bool same_iteration(Method a, Method b) { return is_extrapolation(a) == is_extrapolation(b); }

std::string fmt17(double v) { return fmt::format("{:.17g}", v); }

}  // namespace

std::string to_string(Check check) {
  switch (check) {
    case Check::regret: return "regret";
    case Check::telescoped: return "telescoped";
    case Check::distance: return "distance";
    case Check::gap: return "gap";
  }
  return "unknown";
}

std::set<Check> all_checks() { return {Check::regret, Check::telescoped, Check::distance, Check::gap}; }

std::set<Check> parse_check_list(const std::string& spec) {
  if (spec == "all") return all_checks();
  if (spec == "none" || spec.empty()) return {};
  std::set<Check> out;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "regret") {
      out.insert(Check::regret);
    } else if (item == "telescoped") {
      out.insert(Check::telescoped);
    } else if (item == "distance") {
      out.insert(Check::distance);
    } else if (item == "gap") {
      out.insert(Check::gap);
    } else {
      throw ConfigError("checks", "unknown check '" + item + "'");
    }
  }
  return out;
}

ExperimentConfig parse_config(const json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw ConfigError("<root>", "expected a JSON object");
  ExperimentConfig c;
  c.name = field<std::string>(j, "name", c.name);

  if (!j.contains("problem")) throw ConfigError("problem", "missing");
  const json& pj = j.at("problem");
  try {
    if (pj.contains("file")) {
      const fs::path p = base_dir / pj.at("file").get<std::string>();
      std::ifstream in(p);
      if (!in) throw ConfigError("problem.file", "cannot read " + p.string());
      c.instance = instance_from_json(json::parse(in));
    } else {
      c.instance = instance_from_json(pj);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError("problem", e.what());
  }

  if (j.contains("generator")) {
    const json& g = j.at("generator");
    c.generator.type = field<std::string>(g, "type", c.generator.type);
    c.generator.gamma = field<double>(g, "gamma", c.generator.gamma);
    c.generator.psi = field<std::string>(g, "psi", c.generator.psi);
  }
  try {
    c.method = method_from_string(field<std::string>(j, "method", "beg"));
  } catch (const InvalidArgument& e) {
    throw ConfigError("method", e.what());
  }
  if (j.contains("schedule")) {
    const json& s = j.at("schedule");
    c.schedule.type = field<std::string>(s, "type", c.schedule.type);
    c.schedule.safety = field<double>(s, "safety", c.schedule.safety);
    c.schedule.alpha = field<std::vector<double>>(s, "alpha", {});
    c.schedule.beta = field<std::vector<double>>(s, "beta", {});
    if (s.contains("rho")) c.schedule.rho = field<double>(s, "rho", 0.0);
    if (c.schedule.type != "constant" && c.schedule.type != "explicit") {
      throw ConfigError("schedule.type", "expected 'constant' or 'explicit'");
    }
    if (c.schedule.type == "explicit" && c.schedule.alpha.empty()) {
      throw ConfigError("schedule.alpha", "explicit schedule needs at least one step size");
    }
  }
  if (j.contains("lambda")) c.lambda = field<double>(j, "lambda", 0.0);
  if (j.contains("init")) {
    c.init = to_vector(field<std::vector<double>>(j, "init", {}));
    if (c.init->size() != c.instance.m + c.instance.n) {
      throw ConfigError("init", "expected " + std::to_string(c.instance.m + c.instance.n) + " entries");
    }
  }
  const auto iters = field<long long>(j, "max_iters", 100);
  if (iters < 0) throw ConfigError("max_iters", "must be nonnegative");
  c.max_iters = static_cast<std::size_t>(iters);
  if (j.contains("tolerance") && !j.at("tolerance").is_null()) {
    c.tolerance = field<double>(j, "tolerance", 0.0);
  }
  const auto stride = field<long long>(j, "record_stride", 1);
  if (stride < 1) throw ConfigError("record_stride", "must be >= 1");
  c.record_stride = static_cast<std::size_t>(stride);
  c.out_dir = field<std::string>(j, "out_dir", c.out_dir.string());
  if (j.contains("checks")) {
    const json& ch = j.at("checks");
    if (ch.is_string()) {
      c.checks = parse_check_list(ch.get<std::string>());
    } else {
      std::string joined;
      for (const auto& item : ch) {
        if (!joined.empty()) joined += ",";
        joined += item.get<std::string>();
      }
      c.checks = parse_check_list(joined);
    }
  }
  c.timing = field<bool>(j, "timing", c.timing);
  return c;
}

std::vector<ExperimentConfig> load_configs(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot read " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("<file>", std::string("invalid JSON in ") + path.string() + ": " + e.what());
  }
  const fs::path base = path.parent_path().empty() ? fs::path(".") : path.parent_path();
  std::vector<ExperimentConfig> out;
  auto named = [&](ExperimentConfig c, const std::string& fallback, const json& j) {
    if (!j.is_object() || !j.contains("name")) c.name = fallback;
    return c;
  };
  if (doc.is_array()) {
    std::size_t i = 0;
    for (const auto& item : doc) {
      if (item.is_string()) {
        for (auto& c : load_configs(base / item.get<std::string>())) out.push_back(std::move(c));
      } else {
        out.push_back(named(parse_config(item, base), path.stem().string() + "_" + std::to_string(i), item));
      }
      ++i;
    }
  } else {
    out.push_back(named(parse_config(doc, base), path.stem().string(), doc));
  }
  return out;
}

BregmanGenerator make_generator(const GeneratorSpec& spec, Eigen::Index dimension) {
  if (spec.type == "euclidean") return euclidean_generator(dimension);
  if (spec.type == "augmented_l1") {
    if (!(spec.gamma > 0.0)) throw ConfigError("generator.gamma", "must be positive");
    return augmented_l1_generator(dimension, spec.gamma);
  }
  if (spec.type == "prox_regularized") {
    if (spec.psi == "zero") {
      return prox_regularized_generator(
          dimension, [](const Vector&) { return 0.0; }, [](const Vector& u) { return u; },
          [](const Vector& u) -> Vector { return Vector::Zero(u.size()); }, "prox_regularized:zero");
    }
    if (spec.psi == "l1") {
      const double gamma = spec.gamma;
      if (!(gamma > 0.0)) throw ConfigError("generator.gamma", "must be positive");
      return prox_regularized_generator(
          dimension, [gamma](const Vector& u) { return gamma * u.lpNorm<1>(); },
          [gamma](const Vector& u) { return shrinkage(gamma, u); },
          [gamma](const Vector& u) -> Vector { return gamma * u.array().sign().matrix(); },
          "prox_regularized:l1");
    }
    if (spec.psi == "half_sq") {
      return prox_regularized_generator(
          dimension, [](const Vector& u) { return 0.5 * u.squaredNorm(); },
          [](const Vector& u) -> Vector { return 0.5 * u; }, [](const Vector& u) { return u; },
          "prox_regularized:half_sq");
    }
    throw ConfigError("generator.psi", "unknown psi '" + spec.psi + "'");
  }
  throw ConfigError("generator.type", "unknown generator '" + spec.type + "'");
}

PreparedExperiment prepare(const ExperimentConfig& config) {
  PreparedExperiment p;
  try {
    p.problem = to_problem(config.instance);
  } catch (const std::exception& e) {
    throw ConfigError("problem", e.what());
  }
  const Eigen::Index d = p.problem.dimension();
  const bool reference = config.method == Method::eg_reference || config.method == Method::ogda_reference;
  p.generator = reference ? euclidean_generator(d) : make_generator(config.generator, d);
  p.op = saddle_operator(p.problem);
  const double lambda =
      config.lambda ? *config.lambda : relative_lipschitz_lambda(*p.op.lipschitz, p.generator.modulus);
  const bool extrapolation = is_extrapolation(config.method);
  try {
    if (config.schedule.type == "constant") {
      p.schedule = extrapolation ? constant_bep_schedule(lambda, config.schedule.safety)
                                 : constant_beg_schedule(lambda, config.schedule.safety);
    } else {
      p.schedule = explicit_schedule(config.schedule.alpha, config.schedule.beta, lambda,
                                     config.schedule.rho);
    }
  } catch (const InvalidArgument& e) {
    throw ConfigError("schedule", e.what());
  }
  const Vector u0 = config.init ? *config.init : Vector::Ones(d);
  p.init = make_dual_pair(p.generator, u0);
  p.options.max_iters = config.max_iters;
  p.options.tolerance = config.tolerance;
  p.options.record_stride = 1;
  if (p.problem.saddle) p.options.reference = p.problem.stacked_saddle();
  return p;
}

void write_trace_csv(std::ostream& out, const SaddleProblem& problem, const BregmanGenerator& gen,
                     const Trace& trace, std::size_t stride) {
  if (stride < 1) throw InvalidArgument("stride must be >= 1");
  std::vector<GapRecord> gaps;
  if (problem.saddle && trace.complete()) gaps = gap_bound_series(problem, gen, trace);
  // gap record for average index k lives on record k + 1
  std::vector<const GapRecord*> gap_at(trace.records.size(), nullptr);
  for (const auto& g : gaps) {
    if (g.k + 1 < gap_at.size()) gap_at[g.k + 1] = &g;
  }
  out << "k,alpha,beta,resid_norm,value_error,gap_bound,dist_to_saddle,sparsity_fraction\n";
  const std::size_t n = trace.records.size();
  for (std::size_t j = 0; j < n; ++j) {
    const auto& r = trace.records[j];
    if (r.k % stride != 0 && j + 1 != n) continue;
    const GapRecord* g = gap_at[j];
    const double zeros = static_cast<double>((r.primal.array() == 0.0).count());
    const double sparsity = r.primal.size() > 0 ? zeros / static_cast<double>(r.primal.size()) : 0.0;
    out << r.k << ',' << fmt17(r.alpha) << ',' << fmt17(r.beta) << ',' << fmt17(r.residual_norm)
        << ',' << fmt17(g ? g->value_error : kNaN) << ',' << fmt17(g ? g->bound_rhs : kNaN) << ','
        << fmt17(r.dist_to_saddle.value_or(kNaN)) << ',' << fmt17(sparsity) << '\n';
  }
}

json trace_to_json(const Trace& trace) {
  json j;
  j["method"] = to_string(trace.method);
  j["generator"] = trace.generator;
  j["lambda"] = trace.lambda;
  j["alpha_minus_one"] = trace.alpha_minus_one;
  j["heuristic_schedule"] = trace.heuristic_schedule;
  j["iterations"] = trace.iterations;
  j["converged"] = trace.converged;
  j["operator_calls"] = trace.operator_calls;
  json recs = json::array();
  for (const auto& r : trace.records) {
    json e;
    e["k"] = r.k;
    e["u"] = vector_json(r.primal);
    e["u_dual"] = vector_json(r.dual);
    if (r.midpoint) e["u_bar"] = vector_json(*r.midpoint);
    e["alpha"] = r.alpha;
    e["beta"] = r.beta;
    e["resid_norm"] = r.residual_norm;
    if (r.dist_to_saddle) e["dist_to_saddle"] = *r.dist_to_saddle;
    if (r.average) {
      e["z_hat"] = vector_json(r.average->point);
      e["s"] = r.average->weight_sum;
    }
    recs.push_back(std::move(e));
  }
  j["records"] = std::move(recs);
  return j;
}

ExperimentOutcome run_experiment(const ExperimentConfig& config, bool write_files) {
  ExperimentOutcome outcome;
  const auto start = std::chrono::steady_clock::now();
  try {
    PreparedExperiment p = prepare(config);
    Trace trace = run(config.method, p.generator, p.op, p.schedule, p.init, p.options);

    std::vector<GapRecord> gaps;
    if (p.problem.saddle) gaps = gap_bound_series(p.problem, p.generator, trace);

    if (p.problem.saddle) {
      const Vector zbar = p.problem.stacked_saddle();
      const Vector zbar_star = p.generator.subgrad(zbar);
      const bool extrapolation = is_extrapolation(config.method);
      auto append = [&](std::vector<InequalityReport> rs) {
        outcome.reports.insert(outcome.reports.end(), rs.begin(), rs.end());
      };
      if (config.checks.count(Check::regret)) {
        append(extrapolation
                   ? check_bep_per_iteration(p.generator, p.op, trace, zbar, zbar_star)
                   : check_beg_regret(p.generator, p.op, trace, zbar, zbar_star));
      }
      if (config.checks.count(Check::telescoped)) {
        append(extrapolation ? check_bep_telescoped(p.generator, p.op, trace, zbar, zbar_star)
                             : check_beg_telescoped(p.generator, p.op, trace, zbar, zbar_star));
      }
      if (config.checks.count(Check::distance)) append(check_distance_bound(p.generator, trace, zbar));
      if (config.checks.count(Check::gap)) {
        for (const auto& g : gaps) {
          InequalityReport r = make_report("gap_bound", g.k, g.value_error, g.bound_rhs, {1e-9, 0.0});
          outcome.reports.push_back(r);
        }
      }
    }
    const bool diagnostics_pass = all_pass(outcome.reports);
    outcome.exit_code = diagnostics_pass ? 0 : 2;

    json summary;
    summary["name"] = config.name;
    summary["method"] = to_string(config.method);
    summary["generator"] = trace.generator;
    summary["iterations"] = trace.iterations;
    summary["converged"] = trace.converged;
    summary["operator_calls"] = trace.operator_calls;
    summary["lambda"] = trace.lambda;
    summary["alpha_minus_one"] = trace.alpha_minus_one;
    summary["heuristic_schedule"] = trace.heuristic_schedule;
    summary["final_residual"] = trace.records.back().residual_norm;
    json series;
    if (!gaps.empty()) {
      double max_err = 0.0;
      double max_scaled = 0.0;
      for (const auto& g : gaps) {
        max_err = std::max(max_err, g.value_error);
        max_scaled = std::max(max_scaled, g.value_error * g.weight_sum);
      }
      series["count"] = gaps.size();
      series["first"] = gaps.front().value_error;
      series["last"] = gaps.back().value_error;
      series["max"] = max_err;
      series["max_scaled"] = max_scaled;
      series["last_scaled"] = gaps.back().value_error * gaps.back().weight_sum;
      series["last_bound"] = gaps.back().bound_rhs;
      series["bound_exact"] = gaps.back().bound_exact;
    }
    summary["value_error_series_summary"] = series;
    json counts = json::object();
    for (const auto& r : outcome.reports) {
      auto& entry = counts[r.name];
      if (entry.is_null()) entry = json{{"checked", 0}, {"failed", 0}};
      entry["checked"] = entry["checked"].get<long long>() + 1;
      if (!r.pass) entry["failed"] = entry["failed"].get<long long>() + 1;
    }
    summary["checks"] = counts;
    summary["all_inequalities_pass"] = diagnostics_pass;
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    summary["wall_time"] = config.timing ? json(seconds) : json(nullptr);
    outcome.summary = summary;

    if (write_files) {
      fs::create_directories(config.out_dir);
      {
        std::ofstream f(config.out_dir / "trace.csv");
        write_trace_csv(f, p.problem, p.generator, trace, config.record_stride);
      }
      {
        std::ofstream f(config.out_dir / "diagnostics.csv");
        write_reports_csv(f, outcome.reports);
      }
      {
        std::ofstream f(config.out_dir / "summary.json");
        f << summary.dump(2) << '\n';
      }
      {
        std::ofstream f(config.out_dir / "trace.json");
        f << trace_to_json(trace).dump() << '\n';
      }
    }
    outcome.trace = std::move(trace);
  } catch (const std::exception& e) {
    outcome.exit_code = 1;
    outcome.error = e.what();
  }
  return outcome;
}

Divergence compare_runs(const ExperimentConfig& a, const ExperimentConfig& b, double tolerance) {
  if (a.instance.m != b.instance.m || a.instance.n != b.instance.n) {
    throw InvalidArgument("compared runs have different problem dimensions");
  }
  auto trace_of = [](const ExperimentConfig& c) {
    const PreparedExperiment p = prepare(c);
    return run(c.method, p.generator, p.op, p.schedule, p.init, p.options);
  };
  const Trace ta = trace_of(a);
  const Trace tb = trace_of(b);
  Divergence d;
  const std::size_t n = std::min(ta.records.size(), tb.records.size());
  for (std::size_t k = 0; k < n; ++k) {
    const double diff = (ta.records[k].primal - tb.records[k].primal).lpNorm<Eigen::Infinity>();
    d.per_iteration.push_back(diff);
    d.max_difference = std::max(d.max_difference, diff);
  }
  if (same_iteration(a.method, b.method)) {
    d.pass = d.max_difference <= tolerance && ta.records.size() == tb.records.size();
  }
  return d;
}

}  // namespace bregsp
