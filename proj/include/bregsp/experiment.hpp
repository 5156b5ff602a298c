#pragma once

#include "bregsp/bregman.hpp"
#include "bregsp/diagnostics.hpp"
#include "bregsp/errors.hpp"
#include "bregsp/operators.hpp"
#include "bregsp/problems.hpp"
#include "bregsp/solvers.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

namespace bregsp {

// Bad or missing configuration value; field() names the offending key.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : Error("config field '" + field + "': " + what), field_(field) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

enum class Check { regret, telescoped, distance, gap };

std::string to_string(Check check);
std::set<Check> all_checks();
// "all", "none", or a comma separated list of check names.
std::set<Check> parse_check_list(const std::string& spec);

struct GeneratorSpec {
  std::string type = "euclidean";  // euclidean | augmented_l1 | prox_regularized
  double gamma = 1.0;
  std::string psi = "zero";  // zero | l1 | half_sq, for prox_regularized
};

struct ScheduleSpec {
  std::string type = "constant";  // constant | explicit
  double safety = 1.0;
  std::vector<double> alpha;
  std::vector<double> beta;
  std::optional<double> rho;
};

struct ExperimentConfig {
  std::string name = "experiment";
  Instance instance;
  GeneratorSpec generator;
  Method method = Method::beg;
  ScheduleSpec schedule;
  std::optional<double> lambda;
  std::optional<Vector> init;
  std::size_t max_iters = 100;
  std::optional<double> tolerance;
  std::size_t record_stride = 1;
  std::filesystem::path out_dir = "out";
  std::set<Check> checks = all_checks();
  bool timing = true;
};

ExperimentConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir = ".");
// One or more experiments: a file may hold a single config object or an
// array of config objects / paths to config files.
std::vector<ExperimentConfig> load_configs(const std::filesystem::path& path);

BregmanGenerator make_generator(const GeneratorSpec& spec, Eigen::Index dimension);

struct PreparedExperiment {
  SaddleProblem problem;
  BregmanGenerator generator;
  OperatorHandle op;
  StepSchedule schedule;
  DualPair init;
  RunOptions options;
};

// Builds every object the run needs. Does not validate the schedule.
PreparedExperiment prepare(const ExperimentConfig& config);

struct ExperimentOutcome {
  int exit_code = 0;  // 0 ok, 1 config/runtime error, 2 diagnostic failure
  std::string error;
  std::optional<Trace> trace;
  std::vector<InequalityReport> reports;
  nlohmann::json summary;
};

// Runs the solver and the enabled diagnostics; writes trace.csv,
// diagnostics.csv, summary.json and trace.json into config.out_dir when
// write_files is set.
ExperimentOutcome run_experiment(const ExperimentConfig& config, bool write_files = true);

struct Divergence {
  std::vector<double> per_iteration;  // max coordinate difference of u_k
  double max_difference = 0.0;
  // Set only when both runs implement the same iteration.
  std::optional<bool> pass;
};

Divergence compare_runs(const ExperimentConfig& a, const ExperimentConfig& b, double tolerance);

// Header: k,alpha,beta,resid_norm,value_error,gap_bound,dist_to_saddle,sparsity_fraction
void write_trace_csv(std::ostream& out, const SaddleProblem& problem, const BregmanGenerator& gen,
                     const Trace& trace, std::size_t stride = 1);
nlohmann::json trace_to_json(const Trace& trace);

}  // namespace bregsp
