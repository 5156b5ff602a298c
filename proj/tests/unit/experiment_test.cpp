#include "bregsp/experiment.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

using namespace bregsp;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const fs::path kGolden = BREGSP_GOLDEN_DIR;
const fs::path kWork = BREGSP_WORK_DIR;

fs::path scratch(const std::string& name) {
  const fs::path p = kWork / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path write_json(const fs::path& p, const json& j) {
  std::ofstream(p) << j.dump(2);
  return p;
}

int cli(const std::string& args) {
  const std::string cmd = std::string("NO_COLOR=1 \"") + BREGSP_CLI + "\" " + args + " >/dev/null 2>&1";
  const int raw = std::system(cmd.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

std::size_t line_count(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

json minimal() { return json::parse(slurp(kGolden / "minimal_xy.json")); }

}  // namespace

TEST(Checks, ParseList) {
  EXPECT_EQ(parse_check_list("all"), all_checks());
  EXPECT_TRUE(parse_check_list("none").empty());
  EXPECT_EQ(parse_check_list("regret,gap"), (std::set<Check>{Check::regret, Check::gap}));
  try {
    parse_check_list("regret,bogus");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "checks");
  }
}

TEST(Config, Defaults) {
  const auto c = parse_config(minimal());
  EXPECT_EQ(c.name, "minimal_xy");
  EXPECT_EQ(c.method, Method::beg);
  EXPECT_EQ(c.max_iters, 100u);
  EXPECT_EQ(c.generator.type, "euclidean");
  EXPECT_EQ(c.checks, all_checks());
  EXPECT_TRUE(c.timing);
}

TEST(Config, ErrorsNameTheField) {
  auto expect_field = [](json j, const std::string& field) {
    try {
      const auto c = parse_config(j);
      make_generator(c.generator, 2);
      prepare(c);
      ADD_FAILURE() << "no error for " << field;
    } catch (const ConfigError& e) {
      EXPECT_EQ(e.field(), field) << e.what();
    }
  };
  json j = minimal();
  j.erase("problem");
  expect_field(j, "problem");
  j = minimal();
  j["method"] = "newton";
  expect_field(j, "method");
  j = minimal();
  j["generator"] = {{"type", "entropy"}};
  expect_field(j, "generator.type");
  j = minimal();
  j["generator"] = {{"type", "augmented_l1"}, {"gamma", -1.0}};
  expect_field(j, "generator.gamma");
  j = minimal();
  j["max_iters"] = -3;
  expect_field(j, "max_iters");
  j = minimal();
  j["init"] = {1.0, 2.0, 3.0};
  expect_field(j, "init");
  j = minimal();
  j["schedule"] = {{"type", "explicit"}};
  expect_field(j, "schedule.alpha");
  j = minimal();
  j["schedule"] = {{"type", "constant"}, {"safety", 2.0}};
  expect_field(j, "schedule");
  j = minimal();
  j["record_stride"] = 0;
  expect_field(j, "record_stride");
  j = minimal();
  j["max_iters"] = "many";
  expect_field(j, "max_iters");
}

TEST(Config, ProblemFromFileAndArrays) {
  const auto dir = scratch("config_files");
  write_json(dir / "instance.json", instance_to_json(*random_instance(ProblemKind::quadratic, 2, 3, 5).source));
  json j = minimal();
  j["name"] = "from_file";
  j["problem"] = {{"file", "instance.json"}};
  write_json(dir / "single.json", j);
  json other = minimal();
  other.erase("name");
  write_json(dir / "list.json", json::array({"single.json", other}));
  const auto configs = load_configs(dir / "list.json");
  ASSERT_EQ(configs.size(), 2u);
  EXPECT_EQ(configs[0].name, "from_file");
  EXPECT_EQ(configs[0].instance.kind, ProblemKind::quadratic);
  EXPECT_EQ(configs[1].name, "list_1");
  EXPECT_THROW(load_configs(dir / "missing.json"), ConfigError);
  std::ofstream(dir / "broken.json") << "{ not json";
  EXPECT_THROW(load_configs(dir / "broken.json"), ConfigError);
}

TEST(Generators, FromSpec) {
  EXPECT_EQ(make_generator({"euclidean", 1.0, "zero"}, 3).kind, GeneratorKind::euclidean);
  EXPECT_EQ(make_generator({"augmented_l1", 0.5, "zero"}, 3).gamma, 0.5);
  for (const char* psi : {"zero", "l1", "half_sq"}) {
    const auto g = make_generator({"prox_regularized", 0.5, psi}, 3);
    const Vector u = Vector::LinSpaced(3, -1.0, 1.0);
    EXPECT_LE((g.mirror(g.subgrad(u)) - u).norm(), 1e-12) << psi;
  }
  EXPECT_THROW(make_generator({"prox_regularized", 0.5, "cubic"}, 3), ConfigError);
}

TEST(RunExperiment, MinimalConfig) {
  auto c = parse_config(minimal());
  c.out_dir = scratch("minimal");
  const auto o = run_experiment(c);
  ASSERT_EQ(o.exit_code, 0) << o.error;
  const std::string trace = slurp(c.out_dir / "trace.csv");
  EXPECT_EQ(line_count(trace), 102u);
  EXPECT_EQ(trace.substr(0, trace.find('\n')),
            "k,alpha,beta,resid_norm,value_error,gap_bound,dist_to_saddle,sparsity_fraction");
  const auto summary = json::parse(slurp(c.out_dir / "summary.json"));
  for (const char* key : {"final_residual", "iterations", "value_error_series_summary", "all_inequalities_pass", "wall_time"}) {
    EXPECT_TRUE(summary.contains(key)) << key;
  }
  EXPECT_TRUE(summary["all_inequalities_pass"].get<bool>());
  EXPECT_TRUE(summary["wall_time"].is_number());
  EXPECT_TRUE(fs::exists(c.out_dir / "diagnostics.csv"));
  const auto tj = json::parse(slurp(c.out_dir / "trace.json"));
  EXPECT_EQ(tj["records"].size(), 101u);
}

TEST(RunExperiment, StrideThinsCsvOnly) {
  auto c = parse_config(minimal());
  c.record_stride = 10;
  c.out_dir = scratch("stride");
  const auto o = run_experiment(c);
  ASSERT_EQ(o.exit_code, 0) << o.error;
  EXPECT_EQ(line_count(slurp(c.out_dir / "trace.csv")), 12u);
}

TEST(RunExperiment, InvalidScheduleExitsOne) {
  auto c = load_configs(kGolden / "minimal_xy_bad_step.json").front();
  c.out_dir = scratch("bad_step");
  const auto o = run_experiment(c);
  EXPECT_EQ(o.exit_code, 1);
  EXPECT_NE(o.error.find("schedule"), std::string::npos) << o.error;
  EXPECT_FALSE(fs::exists(c.out_dir / "trace.csv"));
}

TEST(RunExperiment, DiagnosticFailureExitsTwo) {
  // lambda overridden below the true value lets an oversized step through validation
  json j = minimal();
  j["lambda"] = 0.1;
  j["schedule"] = {{"type", "constant"}, {"safety", 1.0}};
  j["max_iters"] = 30;
  auto c = parse_config(j);
  c.out_dir = scratch("diag_fail");
  const auto o = run_experiment(c);
  EXPECT_EQ(o.exit_code, 2);
  EXPECT_FALSE(o.summary["all_inequalities_pass"].get<bool>());
}

TEST(RunExperiment, ChecksNoneProducesNoReports) {
  auto c = parse_config(minimal());
  c.checks = {};
  const auto o = run_experiment(c, false);
  EXPECT_EQ(o.exit_code, 0);
  EXPECT_TRUE(o.reports.empty());
}

TEST(RunExperiment, DeterministicBytes) {
  auto c = load_configs(kGolden / "bilinear10_seed42.json").front();
  c.out_dir = scratch("det_a");
  ASSERT_EQ(run_experiment(c).exit_code, 0);
  auto d = c;
  d.out_dir = scratch("det_b");
  ASSERT_EQ(run_experiment(d).exit_code, 0);
  for (const char* f : {"trace.csv", "summary.json", "diagnostics.csv", "trace.json"}) {
    EXPECT_EQ(slurp(c.out_dir / f), slurp(d.out_dir / f)) << f;
  }
  EXPECT_EQ(slurp(c.out_dir / "trace.csv"), slurp(kGolden / "expected" / "trace.csv"));
}

TEST(CompareRuns, EquivalencePairsAndDifferentMethods) {
  const auto eg = compare_runs(load_configs(kGolden / "eg_beg.json").front(),
                               load_configs(kGolden / "eg_reference.json").front(), 1e-12);
  ASSERT_TRUE(eg.pass);
  EXPECT_TRUE(*eg.pass);
  EXPECT_EQ(eg.per_iteration.size(), 101u);
  const auto og = compare_runs(load_configs(kGolden / "ogda_bep.json").front(),
                               load_configs(kGolden / "ogda_reference.json").front(), 1e-12);
  ASSERT_TRUE(og.pass);
  EXPECT_TRUE(*og.pass);
  auto a = parse_config(minimal());
  auto b = a;
  b.method = Method::bep;
  const auto mixed = compare_runs(a, b, 1e-12);
  EXPECT_FALSE(mixed.pass.has_value());
  EXPECT_GT(mixed.max_difference, 0.0);
  auto big = load_configs(kGolden / "eg_beg.json").front();
  EXPECT_THROW(compare_runs(a, big, 1e-12), InvalidArgument);
}

TEST(Cli, ExitCodes) {
  const std::string g = kGolden.string();
  const std::string out = scratch("cli").string();
  EXPECT_EQ(cli("solve \"" + g + "/minimal_xy.json\" --out-dir \"" + out + "/a\" --quiet"), 0);
  EXPECT_EQ(cli("solve \"" + g + "/minimal_xy_bad_step.json\" --out-dir \"" + out + "/b\""), 1);
  EXPECT_EQ(cli("solve \"" + g + "/does_not_exist.json\""), 1);
  EXPECT_EQ(cli("frobnicate"), 1);
  EXPECT_EQ(cli("compare \"" + g + "/eg_beg.json\" \"" + g + "/eg_reference.json\" --tol 1e-12"), 0);
  EXPECT_EQ(cli("compare \"" + g + "/eg_beg.json\" \"" + g + "/minimal_xy.json\""), 1);
  EXPECT_EQ(cli("validate-schedule \"" + g + "/minimal_xy.json\" --horizon 50"), 0);
  EXPECT_EQ(cli("validate-schedule \"" + g + "/minimal_xy_bad_step.json\""), 2);
  EXPECT_EQ(cli("solve \"" + g + "/minimal_xy.json\" \"" + g + "/eg_beg.json\" --jobs 2 --check regret --out-dir \"" + out + "/multi\" --quiet"), 0);
  EXPECT_TRUE(fs::exists(fs::path(out) / "multi" / "minimal_xy" / "trace.csv"));
  EXPECT_TRUE(fs::exists(fs::path(out) / "multi" / "eg_beg" / "summary.json"));
}
