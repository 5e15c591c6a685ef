#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "bandprec/forecast.hpp"
#include "bandprec/pipeline.hpp"
#include "bandprec/simulation.hpp"

namespace bandprec::cli {

namespace fs = std::filesystem;

/// Method-parameter flags. Unset fields leave the file/default value alone.
struct ParamOverrides {
  std::optional<double> gamma;
  std::optional<double> h;
  bool no_smoothing = false;
  std::optional<double> a;
  std::optional<double> lambda;
  std::optional<std::vector<double>> lambda_grid;
  std::optional<int> grid_size;
  std::optional<double> M;
  std::optional<int> max_outer;
  std::optional<double> tol;
  std::optional<std::string> gcv_residual;
  std::optional<int> folds;
  std::optional<std::vector<Index>> k_grid;

  void apply(BpOptions& bp) const;
};

struct CommonFlags {
  std::optional<fs::path> config;
  std::optional<std::uint64_t> seed;
  std::optional<fs::path> out;
  std::optional<int> threads;
  std::optional<int> runs;
  ParamOverrides params;
};

struct EstimateFlags {
  CommonFlags common;
  std::optional<fs::path> input;
  std::optional<bool> center;
};

struct EstimateConfig {
  fs::path input;
  fs::path out = ".";
  std::uint64_t seed = 0;
  /// Subtract column means before fitting.
  bool center = true;
  BpOptions bp;
};

struct SimulateFlags {
  CommonFlags common;
  std::optional<std::vector<std::string>> models;
  std::optional<std::vector<Index>> p_list;
  std::optional<std::vector<std::string>> laws;
  std::optional<std::vector<std::string>> methods;
  std::optional<Index> n;
};

struct SimulateConfig {
  fs::path out = ".";
  ExperimentPlan plan;
};

struct ForecastFlags {
  CommonFlags common;
  std::optional<fs::path> train;
  std::optional<fs::path> test;
  std::optional<fs::path> data;
  std::optional<Index> train_rows;
  std::optional<Index> p1;
  std::optional<bool> raw_counts;
  std::optional<std::vector<std::string>> estimators;
  std::optional<Index> k;
};

struct ForecastConfig {
  /// Either train + test, or data split after train_rows rows.
  std::optional<fs::path> train;
  std::optional<fs::path> test;
  std::optional<fs::path> data;
  Index train_rows = 0;
  Index p1 = 0;
  /// Apply sqrt(N + 1/4) to the inputs.
  bool raw_counts = false;
  std::vector<ForecastEstimator> estimators{ForecastEstimator::SampleCov,
                                            ForecastEstimator::Banding, ForecastEstimator::BP};
  Index k = 19;
  fs::path out = ".";
  std::uint64_t seed = 0;
  BpOptions bp;
};

struct SelftestFlags {
  CommonFlags common;
  std::optional<int> instances;
};

struct SelftestConfig {
  int instances = 1000;
  std::uint64_t seed = 1;
  fs::path out = ".";
};

/// Resolution order: defaults, then the config file, then flags. Each
/// resolver validates the result and throws ValidationError listing every
/// bad field.
EstimateConfig resolve(const EstimateFlags& flags);
SimulateConfig resolve(const SimulateFlags& flags);
ForecastConfig resolve(const ForecastFlags& flags);
SelftestConfig resolve(const SelftestFlags& flags);

/// Resolved config as JSON (echoed into every output file).
std::string to_json(const EstimateConfig& c);
std::string to_json(const SimulateConfig& c);
std::string to_json(const ForecastConfig& c);
std::string to_json(const SelftestConfig& c);

/// Writes precision.json, report.json and omega.csv into c.out.
void cmd_estimate(const EstimateConfig& c, std::ostream& log);
/// Writes results.csv and results.json; prints the aligned table.
void cmd_simulate(const SimulateConfig& c, std::ostream& log);
/// Writes err_by_interval.csv and summary.json.
void cmd_forecast(const ForecastConfig& c, std::ostream& log);
/// Checks projection feasibility/optimality and KKT structure on random
/// instances; writes selftest.json. Returns true when every check passed.
bool cmd_project_selftest(const SelftestConfig& c, std::ostream& log);

}  // namespace bandprec::cli
