#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bandprec/baselines.hpp"
#include "bandprec/cholesky_core.hpp"
#include "bandprec/data.hpp"
#include "bandprec/evaluation.hpp"
#include "bandprec/pipeline.hpp"

namespace bandprec {

enum class ModelKind {
  /// Sigma = 0.8 I.
  IdentityScaled,
  /// phi_{i,i-1} = phi_{i,i-2} = -0.6, phi_{i,i-4} = phi_{i,i-6} = -0.4,
  /// sigma^2 = 0.8.
  AR6Banded,
  /// phi_{i,j} = 0.5^{i-j}, sigma^2 = 0.1.
  MA1Geometric,
};

enum class Law { Normal, StudentT3 };

enum class Method { BP, Banding, SampleCov };

std::string to_string(ModelKind k);
std::string to_string(Law l);
std::string to_string(Method m);
/// Accepts the enumerator name or the roman numeral (I, II, III);
/// throws ValidationError otherwise.
ModelKind parse_model_kind(const std::string& s);
/// "Normal"/"normal" or "StudentT3"/"t3".
Law parse_law(const std::string& s);
Method parse_method(const std::string& s);

struct ModelSpec {
  ModelKind kind = ModelKind::IdentityScaled;
  Index p = 0;
  void validate() const;
};

/// Exact (T_0, D_0) of the model.
PrecisionEstimate true_model(const ModelSpec& spec);

/// n observations. Normal rows follow the MCD recursion with N(0, sigma_j^2)
/// innovations; StudentT3 rows are L z / sqrt(g/3) / sqrt(3) with
/// L L' = Sigma, z standard normal and g ~ chi^2_3, so Cov = Sigma.
DataMatrix generate(const ModelSpec& spec, Index n, Law law, std::uint64_t seed);

struct ExperimentPlan {
  std::vector<ModelKind> models{ModelKind::IdentityScaled};
  Index n = 100;
  std::vector<Index> p_list{100};
  std::vector<Law> laws{Law::Normal};
  int runs = 50;
  std::uint64_t base_seed = 20240101;
  std::vector<Method> methods{Method::BP};
  BpOptions bp;
  /// Empty k_grid means 0..min(10, n-1, p-1).
  BandingConfig banding;
  /// 0 means one worker per hardware thread.
  int threads = 0;

  void validate() const;
};

struct RunRecord {
  ModelKind model = ModelKind::IdentityScaled;
  Index p = 0;
  Law law = Law::Normal;
  Method method = Method::BP;
  int run = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  MetricRow metrics;
  /// BP only.
  double lambda = 0.0;
  std::optional<bool> kkt_satisfied;
  double kkt_inequality_ratio = 0.0;
  double kkt_equality_violation = 0.0;
  Index ls_increases = 0;
  Index outer_increases = 0;
  bool exact_support = false;
  /// Banding only.
  Index k = 0;
};

struct CellResult {
  ModelKind model = ModelKind::IdentityScaled;
  Index p = 0;
  Law law = Law::Normal;
  Method method = Method::BP;
  MetricSummary summary;
  Index failures = 0;
};

struct ExperimentResult {
  std::vector<RunRecord> runs;
  std::vector<CellResult> cells;
};

/// One fit and evaluation. Errors are captured in the record.
RunRecord run_single(const ExperimentPlan& plan, ModelKind model, Index p, Law law,
                     Method method, int run, const DataMatrix& data,
                     const PrecisionEstimate& truth);

/// Runs every (model, p, law, run) on a worker pool; all methods see the
/// same data for a given seed. `progress`, if set, is called after each
/// data set with the number completed (from worker threads, serialized).
ExperimentResult run_experiment(
    const ExperimentPlan& plan,
    const std::function<void(std::size_t done, std::size_t total)>& progress = {});

/// Resolves a thread count: positive values are used as given, 0 falls back
/// to BANDPREC_THREADS, then to the hardware concurrency.
int resolve_threads(int requested);

/// Tables 1-3 layout: one row per model x p x law x method with the
/// median(SD_mad) of each metric.
TextTable results_table(const ExperimentResult& res);

}  // namespace bandprec
