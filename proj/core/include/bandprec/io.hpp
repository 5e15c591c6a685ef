#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "bandprec/cholesky_core.hpp"
#include "bandprec/pipeline.hpp"
#include "bandprec/simulation.hpp"

namespace bandprec::io {

struct CsvTable {
  Matrix values;
  /// Empty when the first row is numeric.
  std::vector<std::string> header;
};

/// Comma-separated numeric data. The first row is taken as a header when
/// any of its cells is not a number. Throws ParseError with the 1-based
/// line and column of the first bad cell.
CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::filesystem::path& path);

/// Shortest representation that parses back to the same double.
std::string format_double(double x);

void write_csv(std::ostream& out, const Matrix& m, const std::vector<std::string>& header = {});
void write_csv_file(const std::filesystem::path& path, const Matrix& m,
                    const std::vector<std::string>& header = {});

/// {"p": p, "bands": [[...], ...], "sigma2": [...]}.
std::string precision_to_json(const PrecisionEstimate& est);
PrecisionEstimate precision_from_json(const std::string& text);

/// Options as JSON (flat keys: gamma, h, a, lambda, lambda_grid, M, ...).
std::string bp_options_to_json(const BpOptions& opts);
/// Applies the keys present in `text` on top of `base`. Unknown keys and
/// ill-typed values are reported together in a ValidationError.
BpOptions bp_options_from_json(const std::string& text, BpOptions base = {});

/// Chosen lambda, GCV curve, solver report and KKT diagnostics.
std::string bp_report_to_json(const BpFit& fit);

std::string plan_to_json(const ExperimentPlan& plan);
ExperimentPlan plan_from_json(const std::string& text, ExperimentPlan base = {});

/// Plan echo, per-cell summaries and per-run records.
std::string experiment_to_json(const ExperimentPlan& plan, const ExperimentResult& res);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace bandprec::io
