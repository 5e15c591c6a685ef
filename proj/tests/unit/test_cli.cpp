#include <gtest/gtest.h>

#include <fstream>
#include <algorithm>
#include <sstream>

#include <Eigen/Dense>

#include "bandprec/errors.hpp"
#include "bandprec/io.hpp"
#include "commands.hpp"

using namespace bandprec;
using namespace bandprec::cli;

namespace {

const fs::path kData = BANDPREC_TEST_DATA_DIR;

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("bandprec_cli_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

void write(const fs::path& p, const std::string& s) { std::ofstream(p) << s; }

}  // namespace

TEST(CliResolve, FlagsOverrideFileOverrideDefaults) {
  const fs::path dir = scratch("precedence");
  write(dir / "cfg.json",
        R"({"input": "data.csv", "seed": 5, "bp": {"gamma": 0.7, "a": 3.0}})");
  fs::copy_file(kData / "model1_n20_p5.csv", dir / "data.csv");
  EstimateFlags f;
  f.common.config = dir / "cfg.json";
  EstimateConfig c = resolve(f);
  EXPECT_EQ(c.seed, 5u);
  EXPECT_EQ(c.input, dir / "data.csv");
  EXPECT_EQ(c.bp.initial.gamma, 0.7);
  EXPECT_EQ(c.bp.scad.a, 3.0);
  EXPECT_EQ(c.bp.solver.M, 0.0);

  f.common.seed = 9;
  f.common.params.gamma = 0.6;
  c = resolve(f);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.bp.initial.gamma, 0.6);
  EXPECT_EQ(c.bp.scad.a, 3.0);
}

TEST(CliResolve, ValidationListsEveryField) {
  const fs::path dir = scratch("validation");
  write(dir / "cfg.json", R"({"input": "missing.csv", "colour": 1, "bp": {"gamma": 2.0}})");
  EstimateFlags f;
  f.common.config = dir / "cfg.json";
  f.common.params.a = 1.0;
  try {
    resolve(f);
    FAIL();
  } catch (const ValidationError& e) {
    const auto& fields = e.fields();
    auto has = [&](const std::string& s) {
      return std::any_of(fields.begin(), fields.end(),
                         [&](const std::string& x) { return x.find(s) != std::string::npos; });
    };
    EXPECT_TRUE(has("colour"));
    EXPECT_TRUE(has("input"));
    EXPECT_TRUE(has("gamma"));
    EXPECT_TRUE(has("a must"));
  }
  EstimateFlags none;
  none.common.config = dir / "nope.json";
  EXPECT_THROW(resolve(none), ValidationError);
}

TEST(CliResolve, SimulateRejectsUnknownModel) {
  SimulateFlags f;
  f.models = std::vector<std::string>{"II", "VII"};
  EXPECT_THROW(resolve(f), ValidationError);
  f.models = std::vector<std::string>{"II"};
  f.p_list = std::vector<Index>{20};
  f.common.runs = 2;
  const SimulateConfig c = resolve(f);
  EXPECT_EQ(c.plan.runs, 2);
  EXPECT_EQ(c.plan.models, std::vector<ModelKind>{ModelKind::AR6Banded});
}

TEST(CliEstimate, WritesOutputsDeterministically) {
  const fs::path out = scratch("estimate");
  EstimateFlags f;
  f.input = kData / "model1_n20_p5.csv";
  f.common.out = out / "a";
  std::ostringstream log;
  cmd_estimate(resolve(f), log);
  f.common.out = out / "b";
  cmd_estimate(resolve(f), log);
  for (const char* name : {"precision.json", "report.json", "omega.csv"}) {
    ASSERT_TRUE(fs::exists(out / "a" / name)) << name;
  }
  const std::string ra = io::read_text_file(out / "a" / "report.json");
  std::string rb = io::read_text_file(out / "b" / "report.json");
  // The echoed out path is the only intended difference.
  const auto pos = rb.find((out / "b").generic_string());
  ASSERT_NE(pos, std::string::npos);
  rb.replace(pos, (out / "b").generic_string().size(), (out / "a").generic_string());
  EXPECT_EQ(ra, rb);
  EXPECT_EQ(io::read_text_file(out / "a" / "precision.json"),
            io::read_text_file(out / "b" / "precision.json"));

  const PrecisionEstimate e = io::precision_from_json(io::read_text_file(out / "a" / "precision.json"));
  const Eigen::LLT<Matrix> llt(assemble_precision(e).matrix());
  EXPECT_EQ(llt.info(), Eigen::Success);
  const io::CsvTable omega = io::read_csv_file(out / "a" / "omega.csv");
  EXPECT_EQ(omega.values.rows(), 5);
}

TEST(CliEstimate, MalformedCsvGivesParseError) {
  EstimateFlags f;
  f.input = kData / "malformed.csv";
  f.common.out = scratch("malformed");
  std::ostringstream log;
  EXPECT_THROW(cmd_estimate(resolve(f), log), ParseError);
}

TEST(CliSimulate, SingleRunPrintsZeroSpread) {
  SimulateFlags f;
  f.models = std::vector<std::string>{"I"};
  f.p_list = std::vector<Index>{10};
  f.n = 30;
  f.common.runs = 1;
  f.common.threads = 1;
  f.common.out = scratch("simulate");
  std::ostringstream log;
  cmd_simulate(resolve(f), log);
  const std::string csv = io::read_text_file(*f.common.out / "results.csv");
  EXPECT_NE(csv.find("(0)"), std::string::npos);
  EXPECT_TRUE(fs::exists(*f.common.out / "results.json"));
}

TEST(CliForecast, CountsPipelineAndMissingTest) {
  ForecastFlags f;
  f.train = kData / "counts_train.csv";
  f.test = kData / "counts_test.csv";
  f.p1 = 4;
  f.raw_counts = true;
  f.k = 2;
  f.common.out = scratch("forecast");
  std::ostringstream log;
  cmd_forecast(resolve(f), log);
  const io::CsvTable err = io::read_csv_file(*f.common.out / "err_by_interval.csv");
  EXPECT_EQ(err.values.rows(), 4);
  EXPECT_EQ(err.header.size(), 4u);
  EXPECT_TRUE(fs::exists(*f.common.out / "summary.json"));

  f.test = kData / "no_such_file.csv";
  EXPECT_THROW(resolve(f), ValidationError);
}

TEST(CliSelftest, Passes) {
  SelftestFlags f;
  f.instances = 200;
  f.common.out = scratch("selftest");
  std::ostringstream log;
  EXPECT_TRUE(cmd_project_selftest(resolve(f), log)) << log.str();
  EXPECT_TRUE(fs::exists(*f.common.out / "selftest.json"));
}
