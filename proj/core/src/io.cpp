#include "bandprec/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "bandprec/errors.hpp"

namespace bandprec::io {

using Json = nlohmann::ordered_json;

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  cells.push_back(trim(cur));
  return cells;
}

bool parse_number(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* b = s.data();
  const char* e = b + s.size();
  if (*b == '+') ++b;
  const auto r = std::from_chars(b, e, out);
  return r.ec == std::errc() && r.ptr == e && std::isfinite(out);
}

}  // namespace

CsvTable read_csv(std::istream& in) {
  CsvTable t;
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_line(line);
    if (first) {
      first = false;
      bool numeric = true;
      double v;
      for (const auto& c : cells) numeric = numeric && parse_number(c, v);
      width = cells.size();
      if (!numeric) {
        t.header = cells;
        continue;
      }
    }
    if (cells.size() != width) {
      throw ParseError("expected " + std::to_string(width) + " columns, found " +
                           std::to_string(cells.size()),
                       line_no, static_cast<std::size_t>(std::min(cells.size(), width) + 1));
    }
    std::vector<double> row(width);
    for (std::size_t c = 0; c < width; ++c) {
      if (!parse_number(cells[c], row[c])) {
        throw ParseError("not a finite number: '" + cells[c] + "'", line_no,
                         static_cast<std::size_t>(c + 1));
      }
    }
    rows.push_back(std::move(row));
  }
  t.values.resize(static_cast<Index>(rows.size()), static_cast<Index>(width));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t c = 0; c < width; ++c) {
      t.values(static_cast<Index>(i), static_cast<Index>(c)) = rows[i][c];
    }
  }
  return t;
}

CsvTable read_csv_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_csv(in);
}

std::string format_double(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

void write_csv(std::ostream& out, const Matrix& m, const std::vector<std::string>& header) {
  for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
  if (!header.empty()) out << '\n';
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << format_double(m(i, j));
    out << '\n';
  }
}

void write_csv_file(const std::filesystem::path& path, const Matrix& m,
                    const std::vector<std::string>& header) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_csv(out, m, header);
}

namespace {

Json vec_json(const Vector& v) {
  Json a = Json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Json precision_json(const PrecisionEstimate& est) {
  Json j;
  j["p"] = est.dim();
  Json bands = Json::array();
  for (Index b = 1; b < est.dim(); ++b) bands.push_back(vec_json(est.factor.band(b)));
  j["bands"] = std::move(bands);
  j["sigma2"] = vec_json(est.variances.values());
  return j;
}

Json parse_json(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what(), 0, static_cast<std::size_t>(e.byte));
  }
}

/// Collects unknown-key and type errors across all fields of an object.
class Reader {
 public:
  Reader(const Json& j, std::string prefix) : j_(j), prefix_(std::move(prefix)) {
    if (!j_.is_object()) errors_.push_back(prefix_ + ": expected a JSON object");
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.is_object() || !j_.contains(key)) return;
    try {
      out = j_.at(key).template get<T>();
    } catch (const Json::exception&) {
      errors_.push_back(prefix_ + key + ": wrong type");
    }
  }

  void get_optional(const char* key, std::optional<double>& out) {
    seen_.insert(key);
    if (!j_.is_object() || !j_.contains(key)) return;
    const Json& v = j_.at(key);
    if (v.is_null()) {
      out.reset();
    } else if (v.is_number()) {
      out = v.get<double>();
    } else {
      errors_.push_back(prefix_ + key + ": expected a number or null");
    }
  }

  const Json* sub(const char* key) {
    seen_.insert(key);
    if (!j_.is_object() || !j_.contains(key)) return nullptr;
    return &j_.at(key);
  }

  void error(const std::string& e) { errors_.push_back(prefix_ + e); }

  std::vector<std::string> finish() {
    if (j_.is_object()) {
      for (auto it = j_.begin(); it != j_.end(); ++it) {
        if (!seen_.count(it.key())) errors_.push_back(prefix_ + it.key() + ": unknown field");
      }
    }
    return std::move(errors_);
  }

 private:
  const Json& j_;
  std::string prefix_;
  std::set<std::string> seen_;
  std::vector<std::string> errors_;
};

Json bp_options_json(const BpOptions& o) {
  Json j;
  j["gamma"] = o.initial.gamma;
  j["continue_beyond_window"] = o.initial.continue_beyond_window;
  j["h"] = o.initial.smoothing_bandwidth ? Json(*o.initial.smoothing_bandwidth) : Json(nullptr);
  j["min_smooth_length"] = o.initial.min_smooth_length;
  j["a"] = o.scad.a;
  j["conventional_divisor"] = o.scad.conventional_divisor;
  j["lambda"] = o.lambda ? Json(*o.lambda) : Json(nullptr);
  j["lambda_grid"] = o.lambda_grid;
  j["grid_size"] = o.grid_size;
  j["stack_far_bands"] = o.stack_far_bands;
  j["M"] = o.solver.M;
  j["step"] = o.solver.step ? Json(*o.solver.step) : Json(nullptr);
  j["step_safety"] = o.solver.step_safety;
  j["max_outer"] = o.solver.max_outer;
  j["max_inner"] = o.solver.max_inner;
  j["tol"] = o.solver.tol;
  j["gcv_residual"] = o.gcv_residual == GcvResidual::FittedAtLambda ? "fitted" : "smoothed_initial";
  j["check_kkt"] = o.check_kkt;
  return j;
}

std::vector<std::string> read_bp_options(const Json& j, BpOptions& o, const std::string& prefix) {
  Reader r(j, prefix);
  r.get("gamma", o.initial.gamma);
  r.get("continue_beyond_window", o.initial.continue_beyond_window);
  r.get_optional("h", o.initial.smoothing_bandwidth);
  r.get("min_smooth_length", o.initial.min_smooth_length);
  r.get("a", o.scad.a);
  r.get("conventional_divisor", o.scad.conventional_divisor);
  r.get_optional("lambda", o.lambda);
  r.get("lambda_grid", o.lambda_grid);
  r.get("grid_size", o.grid_size);
  r.get("stack_far_bands", o.stack_far_bands);
  r.get("M", o.solver.M);
  r.get_optional("step", o.solver.step);
  r.get("step_safety", o.solver.step_safety);
  r.get("max_outer", o.solver.max_outer);
  r.get("max_inner", o.solver.max_inner);
  r.get("tol", o.solver.tol);
  r.get("check_kkt", o.check_kkt);
  std::string residual;
  r.get("gcv_residual", residual);
  if (residual == "fitted") {
    o.gcv_residual = GcvResidual::FittedAtLambda;
  } else if (residual == "smoothed_initial") {
    o.gcv_residual = GcvResidual::SmoothedInitial;
  } else if (!residual.empty()) {
    r.error("gcv_residual: expected \"fitted\" or \"smoothed_initial\"");
  }
  return r.finish();
}

Json solve_report_json(const SolveReport& s) {
  Json j;
  j["iterations_used"] = s.iterations_used;
  j["final_objective"] = s.final_objective;
  j["converged"] = s.converged;
  j["active_blocks"] = s.active_blocks;
  j["step"] = s.step;
  j["ls_increases"] = s.ls_increases;
  j["max_ls_increase"] = s.max_ls_increase;
  j["outer_objectives"] = s.outer_objectives;
  j["outer_increases"] = s.outer_increases;
  j["outer_steps"] = s.outer_steps;
  return j;
}

Json optional_number(const std::optional<double>& x) { return x ? Json(*x) : Json(nullptr); }

Json summary_json(const Summary& s) {
  Json j;
  j["median"] = s.median;
  j["sd_mad"] = s.sd_mad;
  j["count"] = s.count;
  j["formatted"] = format_summary(s);
  return j;
}

}  // namespace

std::string precision_to_json(const PrecisionEstimate& est) { return precision_json(est).dump(2); }

PrecisionEstimate precision_from_json(const std::string& text) {
  const Json j = parse_json(text);
  try {
    const Index p = j.at("p").get<Index>();
    std::vector<Vector> bands;
    const auto& jb = j.at("bands");
    if (!jb.is_array()) throw ValidationError({"bands: expected an array"});
    for (const auto& b : jb) {
      const auto v = b.get<std::vector<double>>();
      bands.push_back(Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size())));
    }
    const auto s = j.at("sigma2").get<std::vector<double>>();
    return {BandedCholesky(p, std::move(bands)),
            DiagonalVariances(Eigen::Map<const Vector>(s.data(), static_cast<Index>(s.size())))};
  } catch (const Json::exception& e) {
    throw ValidationError({std::string("precision JSON: ") + e.what()});
  }
}

std::string bp_options_to_json(const BpOptions& opts) { return bp_options_json(opts).dump(2); }

BpOptions bp_options_from_json(const std::string& text, BpOptions base) {
  auto errors = read_bp_options(parse_json(text), base, "");
  if (!errors.empty()) throw ValidationError(std::move(errors));
  return base;
}

std::string bp_report_to_json(const BpFit& fit) {
  Json j;
  j["lambda"] = fit.lambda;
  Json part;
  part["p"] = fit.partition.dim();
  part["blocks"] = fit.partition.block_count();
  j["partition"] = part;
  if (fit.gcv) {
    Json g;
    g["lambda_grid"] = fit.gcv->lambda_grid;
    g["gcv_values"] = fit.gcv->gcv_values;
    g["excluded_terms"] = fit.gcv->excluded_terms;
    g["best_lambda"] = fit.gcv->best_lambda;
    j["gcv"] = g;
  } else {
    j["gcv"] = nullptr;
  }
  j["solver"] = solve_report_json(fit.report);
  j["weights"] = vec_json(fit.weights.w);
  std::vector<Index> nonzero;
  for (Index b = 1; b < fit.estimate.dim(); ++b) {
    if (!fit.estimate.factor.band_is_zero(b)) nonzero.push_back(b);
  }
  j["nonzero_bands"] = nonzero;
  if (fit.kkt) {
    Json k;
    k["satisfied"] = fit.kkt->satisfied;
    k["max_equality_violation"] = fit.kkt->max_equality_violation;
    k["max_inequality_ratio"] = fit.kkt->max_inequality_ratio;
    k["equality_entries"] = fit.kkt->equality_entries;
    k["inequality_entries"] = fit.kkt->inequality_entries;
    k["required_multiplier"] = fit.kkt->required_multiplier;
    j["kkt"] = k;
  } else {
    j["kkt"] = nullptr;
  }
  j["jittered_windows"] = fit.jittered_windows;
  return j.dump(2);
}

namespace {

Json plan_json(const ExperimentPlan& plan) {
  Json j;
  Json models = Json::array();
  for (auto m : plan.models) models.push_back(to_string(m));
  j["models"] = models;
  j["n"] = plan.n;
  j["p_list"] = plan.p_list;
  Json laws = Json::array();
  for (auto l : plan.laws) laws.push_back(to_string(l));
  j["laws"] = laws;
  j["runs"] = plan.runs;
  j["base_seed"] = plan.base_seed;
  Json methods = Json::array();
  for (auto m : plan.methods) methods.push_back(to_string(m));
  j["methods"] = methods;
  j["threads"] = plan.threads;
  j["bp"] = bp_options_json(plan.bp);
  Json b;
  b["k_grid"] = plan.banding.k_grid;
  b["folds"] = plan.banding.folds;
  j["banding"] = b;
  return j;
}

template <class E, class F>
void read_enum_list(Reader& r, const char* key, std::vector<E>& out, F parse) {
  std::vector<std::string> names;
  r.get(key, names);
  if (names.empty()) return;
  std::vector<E> parsed;
  for (const auto& n : names) {
    try {
      parsed.push_back(parse(n));
    } catch (const ValidationError& e) {
      for (const auto& f : e.fields()) r.error(f);
    }
  }
  out = std::move(parsed);
}

}  // namespace

std::string plan_to_json(const ExperimentPlan& plan) { return plan_json(plan).dump(2); }

ExperimentPlan plan_from_json(const std::string& text, ExperimentPlan base) {
  const Json j = parse_json(text);
  Reader r(j, "");
  std::vector<std::string> errors;
  read_enum_list(r, "models", base.models, parse_model_kind);
  read_enum_list(r, "laws", base.laws, parse_law);
  read_enum_list(r, "methods", base.methods, parse_method);
  if (const Json* law = r.sub("law")) {
    try {
      base.laws = {parse_law(law->get<std::string>())};
    } catch (const ValidationError& e) {
      for (const auto& f : e.fields()) r.error(f);
    } catch (const Json::exception&) {
      r.error("law: wrong type");
    }
  }
  r.get("n", base.n);
  r.get("p_list", base.p_list);
  r.get("runs", base.runs);
  r.get("base_seed", base.base_seed);
  r.get("threads", base.threads);
  if (const Json* bp = r.sub("bp")) {
    auto e = read_bp_options(*bp, base.bp, "bp.");
    errors.insert(errors.end(), e.begin(), e.end());
  }
  if (const Json* b = r.sub("banding")) {
    Reader rb(*b, "banding.");
    rb.get("k_grid", base.banding.k_grid);
    rb.get("folds", base.banding.folds);
    auto e = rb.finish();
    errors.insert(errors.end(), e.begin(), e.end());
  }
  auto e = r.finish();
  errors.insert(errors.begin(), e.begin(), e.end());
  if (!errors.empty()) throw ValidationError(std::move(errors));
  return base;
}

std::string experiment_to_json(const ExperimentPlan& plan, const ExperimentResult& res) {
  Json j;
  j["plan"] = plan_json(plan);
  j["sparsity_accounting"] = "band-level";
  Json cells = Json::array();
  for (const auto& c : res.cells) {
    Json cj;
    cj["model"] = to_string(c.model);
    cj["p"] = c.p;
    cj["law"] = to_string(c.law);
    cj["method"] = to_string(c.method);
    cj["runs_ok"] = c.summary.runs;
    cj["failures"] = c.failures;
    if (c.summary.runs > 0) {
      cj["kl_loss"] = summary_json(c.summary.kl_loss);
      cj["op_norm"] = summary_json(c.summary.op_norm);
      cj["inf_norm"] = summary_json(c.summary.inf_norm);
    }
    cj["pct_correct_zeros"] =
        c.summary.pct_correct_zeros ? summary_json(*c.summary.pct_correct_zeros) : Json(nullptr);
    cj["pct_correct_nonzeros"] = c.summary.pct_correct_nonzeros
                                     ? summary_json(*c.summary.pct_correct_nonzeros)
                                     : Json(nullptr);
    cells.push_back(cj);
  }
  j["cells"] = cells;
  Json runs = Json::array();
  for (const auto& r : res.runs) {
    Json rj;
    rj["model"] = to_string(r.model);
    rj["p"] = r.p;
    rj["law"] = to_string(r.law);
    rj["method"] = to_string(r.method);
    rj["run"] = r.run;
    rj["seed"] = r.seed;
    rj["ok"] = r.ok;
    if (!r.ok) {
      rj["error"] = r.error;
      runs.push_back(rj);
      continue;
    }
    rj["kl_loss"] = r.metrics.kl_loss;
    rj["op_norm"] = r.metrics.op_norm;
    rj["inf_norm"] = r.metrics.inf_norm;
    rj["pct_correct_zeros"] = optional_number(r.metrics.pct_correct_zeros);
    rj["pct_correct_nonzeros"] = optional_number(r.metrics.pct_correct_nonzeros);
    if (r.method == Method::BP) {
      rj["lambda"] = r.lambda;
      rj["exact_support"] = r.exact_support;
      rj["kkt_satisfied"] = r.kkt_satisfied ? Json(*r.kkt_satisfied) : Json(nullptr);
      rj["kkt_inequality_ratio"] = r.kkt_inequality_ratio;
      rj["kkt_equality_violation"] = r.kkt_equality_violation;
      rj["ls_increases"] = r.ls_increases;
      rj["outer_increases"] = r.outer_increases;
    } else if (r.method == Method::Banding) {
      rj["k"] = r.k;
    }
    runs.push_back(rj);
  }
  j["runs"] = runs;
  return j.dump(2);
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!text.empty() && text.back() != '\n') out << '\n';
}

}  // namespace bandprec::io
