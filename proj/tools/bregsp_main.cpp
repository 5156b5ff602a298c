// Command line runner for the Bregman extragradient / extrapolation solvers.
//
//   bregsp solve <config.json>... [--out-dir D] [--check all|none|list] [--jobs N] [--quiet]
//   bregsp compare <a.json> <b.json> [--tol 1e-12]
//   bregsp validate-schedule <config.json> [--horizon K]
//
// Exit codes: 0 success, 1 configuration or runtime error, 2 a diagnostic or
// comparison failed.

#include "bregsp/experiment.hpp"

#include <CLI11.hpp>
#include <fmt/color.h>
#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <mutex>
#include <thread>
#include <unistd.h>

namespace {

namespace fs = std::filesystem;

bool use_color() { return std::getenv("NO_COLOR") == nullptr && isatty(fileno(stderr)); }

std::mutex log_mutex;

void log_error(const std::string& msg) {
  std::lock_guard<std::mutex> lock(log_mutex);
  if (use_color()) {
    fmt::print(stderr, fmt::fg(fmt::color::red), "error: ");
  } else {
    fmt::print(stderr, "error: ");
  }
  fmt::print(stderr, "{}\n", msg);
}

void log_info(bool quiet, const std::string& msg) {
  if (quiet) return;
  std::lock_guard<std::mutex> lock(log_mutex);
  fmt::print(stderr, "{}\n", msg);
}

int cmd_solve(const std::vector<std::string>& paths, const std::string& out_dir,
              const std::string& check, int jobs, bool quiet) {
  std::vector<bregsp::ExperimentConfig> configs;
  try {
    for (const auto& p : paths) {
      for (auto& c : bregsp::load_configs(p)) configs.push_back(std::move(c));
    }
    if (!check.empty()) {
      const auto checks = bregsp::parse_check_list(check);
      for (auto& c : configs) c.checks = checks;
    }
  } catch (const std::exception& e) {
    log_error(e.what());
    return 1;
  }
  if (!out_dir.empty()) {
    for (auto& c : configs) {
      c.out_dir = configs.size() == 1 ? fs::path(out_dir) : fs::path(out_dir) / c.name;
    }
  }

  std::vector<int> codes(configs.size(), 0);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      const auto outcome = bregsp::run_experiment(configs[i]);
      codes[i] = outcome.exit_code;
      if (outcome.exit_code == 1) {
        log_error(configs[i].name + ": " + outcome.error);
      } else {
        const bool pass = outcome.summary.value("all_inequalities_pass", false);
        log_info(quiet, fmt::format("{}: {} iterations, final residual {:.3e}, diagnostics {} -> {}",
                                    configs[i].name, outcome.summary.value("iterations", 0),
                                    outcome.summary.value("final_residual", 0.0),
                                    pass ? "pass" : "FAIL", configs[i].out_dir.string()));
      }
    }
  };
  const int threads = std::max(1, std::min<int>(jobs, static_cast<int>(configs.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  if (std::find(codes.begin(), codes.end(), 1) != codes.end()) return 1;
  if (std::find(codes.begin(), codes.end(), 2) != codes.end()) return 2;
  return 0;
}

int cmd_compare(const std::string& a_path, const std::string& b_path, double tol, bool quiet) {
  try {
    const auto a = bregsp::load_configs(a_path);
    const auto b = bregsp::load_configs(b_path);
    if (a.size() != 1 || b.size() != 1) throw bregsp::InvalidArgument("compare takes single-experiment configs");
    const auto d = bregsp::compare_runs(a.front(), b.front(), tol);
    std::string verdict = "n/a (different iterations)";
    if (d.pass) verdict = *d.pass ? "pass" : "FAIL";
    if (!quiet) {
      fmt::print("{} vs {}: {} iterates, max coordinate difference {:.3e}, tolerance {:.1e}: {}\n",
                 a.front().name, b.front().name, d.per_iteration.size(), d.max_difference, tol,
                 verdict);
    }
    return d.pass.value_or(true) ? 0 : 2;
  } catch (const std::exception& e) {
    log_error(e.what());
    return 1;
  }
}

int cmd_validate(const std::string& path, std::size_t horizon, bool quiet) {
  try {
    const auto configs = bregsp::load_configs(path);
    int code = 0;
    for (const auto& c : configs) {
      const auto p = bregsp::prepare(c);
      const auto report = bregsp::validate_schedule(c.method, p.schedule, horizon);
      if (report.valid) {
        if (!quiet) fmt::print("{}: schedule valid for k = 0..{} (lambda = {:.6g})\n", c.name, horizon, p.schedule.lambda);
      } else {
        fmt::print("{}: schedule violates {} at k = {}: {}\n", c.name, report.condition, report.k,
                   report.message);
        code = 2;
      }
    }
    return code;
  } catch (const std::exception& e) {
    log_error(e.what());
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bregman extragradient and extrapolation saddle point solvers"};
  app.require_subcommand(1);
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "Suppress progress output");

  auto* solve = app.add_subcommand("solve", "Run experiments and their diagnostics");
  std::vector<std::string> solve_paths;
  std::string out_dir;
  std::string check;
  int jobs = 1;
  solve->add_option("configs", solve_paths, "Experiment config file(s)")->required()->check(CLI::ExistingFile);
  solve->add_option("--out-dir", out_dir, "Output directory (overrides the config)");
  solve->add_option("--check", check, "all, none, or a comma separated list of regret,telescoped,distance,gap");
  solve->add_option("--jobs", jobs, "Experiments to run concurrently")->check(CLI::PositiveNumber);
  solve->add_flag("--quiet", quiet, "Suppress progress output");

  auto* compare = app.add_subcommand("compare", "Per-iteration divergence between two runs");
  std::string a_path;
  std::string b_path;
  double tol = 1e-12;
  compare->add_option("a", a_path, "First config")->required()->check(CLI::ExistingFile);
  compare->add_option("b", b_path, "Second config")->required()->check(CLI::ExistingFile);
  compare->add_option("--tol", tol, "Largest allowed coordinate difference");
  compare->add_flag("--quiet", quiet, "Print nothing on success");

  auto* validate = app.add_subcommand("validate-schedule", "Check the step-size conditions");
  std::string v_path;
  std::size_t horizon = 1000;
  validate->add_option("config", v_path, "Experiment config")->required()->check(CLI::ExistingFile);
  validate->add_option("--horizon", horizon, "Last index to check");
  validate->add_flag("--quiet", quiet, "Print nothing for valid schedules");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  if (*solve) return cmd_solve(solve_paths, out_dir, check, jobs, quiet);
  if (*compare) return cmd_compare(a_path, b_path, tol, quiet);
  if (*validate) return cmd_validate(v_path, horizon, quiet);
  return 1;
}
