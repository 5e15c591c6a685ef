#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "bandprec/errors.hpp"
#include "bandprec/gp_solver.hpp"
#include "bandprec/io.hpp"

namespace bandprec::cli {

using Json = nlohmann::ordered_json;

namespace {

struct ConfigFile {
  Json json = Json::object();
  fs::path dir;
};

ConfigFile load_config(const std::optional<fs::path>& path) {
  ConfigFile cf;
  if (!path) return cf;
  if (!fs::exists(*path)) throw ValidationError({"config: file not found: " + path->string()});
  try {
    cf.json = Json::parse(io::read_text_file(*path));
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string("config: invalid JSON: ") + e.what(), 0, e.byte);
  }
  if (!cf.json.is_object()) throw ValidationError({"config: top level must be an object"});
  cf.dir = path->parent_path();
  return cf;
}

fs::path relative_to(const fs::path& dir, const std::string& p) {
  const fs::path q(p);
  return q.is_absolute() || dir.empty() ? q : dir / q;
}

/// Pops `key` from the config object into `out`, recording type errors.
template <class T>
void take(Json& j, const char* key, T& out, std::vector<std::string>& errors) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const Json::exception&) {
    errors.push_back(std::string(key) + ": wrong type");
  }
  j.erase(key);
}

void take_path(Json& j, const char* key, const fs::path& dir, std::optional<fs::path>& out,
               std::vector<std::string>& errors) {
  std::string s;
  take(j, key, s, errors);
  if (!s.empty()) out = relative_to(dir, s);
}

void unknown_keys(const Json& j, std::vector<std::string>& errors) {
  for (auto it = j.begin(); it != j.end(); ++it) errors.push_back(it.key() + ": unknown field");
}

void apply_bp(Json& j, BpOptions& bp, std::vector<std::string>& errors) {
  if (!j.contains("bp")) return;
  try {
    bp = io::bp_options_from_json(j.at("bp").dump(), bp);
  } catch (const ValidationError& e) {
    for (const auto& f : e.fields()) errors.push_back("bp." + f);
  }
  j.erase("bp");
}

void collect_validation(const BpOptions& bp, std::vector<std::string>& errors) {
  try {
    bp.validate();
  } catch (const ValidationError& e) {
    errors.insert(errors.end(), e.fields().begin(), e.fields().end());
  }
}

void require_file(const std::optional<fs::path>& p, const char* name, std::vector<std::string>& errors) {
  if (!p) {
    errors.push_back(std::string(name) + ": required");
  } else if (!fs::exists(*p)) {
    errors.push_back(std::string(name) + ": file not found: " + p->string());
  }
}

void throw_if(std::vector<std::string>& errors) {
  if (!errors.empty()) throw ValidationError(std::move(errors));
}

Json parse(const std::string& s) { return Json::parse(s); }

void write_json(const fs::path& path, const Json& j) { io::write_text_file(path, j.dump(2)); }

DataMatrix load_data(const fs::path& path, bool raw_counts) {
  const io::CsvTable t = io::read_csv_file(path);
  if (t.values.rows() == 0) throw ParseError("no data rows in " + path.string(), 0, 0);
  return raw_counts ? transform_counts(t.values) : DataMatrix(t.values);
}

}  // namespace

void ParamOverrides::apply(BpOptions& bp) const {
  if (gamma) bp.initial.gamma = *gamma;
  if (h) bp.initial.smoothing_bandwidth = *h;
  if (no_smoothing) bp.initial.smoothing_bandwidth.reset();
  if (a) bp.scad.a = *a;
  if (lambda) bp.lambda = *lambda;
  if (lambda_grid) bp.lambda_grid = *lambda_grid;
  if (grid_size) bp.grid_size = *grid_size;
  if (M) bp.solver.M = *M;
  if (max_outer) bp.solver.max_outer = *max_outer;
  if (tol) bp.solver.tol = *tol;
  if (gcv_residual) {
    if (*gcv_residual == "fitted") {
      bp.gcv_residual = GcvResidual::FittedAtLambda;
    } else if (*gcv_residual == "smoothed_initial") {
      bp.gcv_residual = GcvResidual::SmoothedInitial;
    } else {
      throw ValidationError({"gcv-residual: expected fitted or smoothed_initial"});
    }
  }
}

// ---------------------------------------------------------------- estimate

EstimateConfig resolve(const EstimateFlags& flags) {
  ConfigFile cf = load_config(flags.common.config);
  EstimateConfig c;
  std::vector<std::string> errors;
  std::optional<fs::path> input, out;
  take_path(cf.json, "input", cf.dir, input, errors);
  take_path(cf.json, "out", cf.dir, out, errors);
  take(cf.json, "seed", c.seed, errors);
  take(cf.json, "center", c.center, errors);
  apply_bp(cf.json, c.bp, errors);
  unknown_keys(cf.json, errors);

  if (flags.input) input = flags.input;
  if (flags.common.out) out = flags.common.out;
  if (flags.common.seed) c.seed = *flags.common.seed;
  if (flags.center) c.center = *flags.center;
  flags.common.params.apply(c.bp);
  if (out) c.out = *out;

  require_file(input, "input", errors);
  if (input) c.input = *input;
  collect_validation(c.bp, errors);
  throw_if(errors);
  return c;
}

std::string to_json(const EstimateConfig& c) {
  Json j;
  j["command"] = "estimate";
  j["input"] = c.input.generic_string();
  j["out"] = c.out.generic_string();
  j["seed"] = c.seed;
  j["center"] = c.center;
  j["bp"] = parse(io::bp_options_to_json(c.bp));
  return j.dump(2);
}

void cmd_estimate(const EstimateConfig& c, std::ostream& log) {
  const DataMatrix raw = load_data(c.input, false);
  const DataMatrix data = c.center ? raw.centered() : raw;
  log << "estimate: n = " << data.n() << ", p = " << data.p() << '\n';
  const BpFit fit = estimate_bp(data, c.bp);

  fs::create_directories(c.out);
  io::write_text_file(c.out / "precision.json", io::precision_to_json(fit.estimate));
  Json report;
  report["config"] = parse(to_json(c));
  report["n"] = data.n();
  report["p"] = data.p();
  report["fit"] = parse(io::bp_report_to_json(fit));
  write_json(c.out / "report.json", report);
  io::write_csv_file(c.out / "omega.csv", assemble_precision(fit.estimate).matrix());

  log << "estimate: lambda = " << io::format_double(fit.lambda) << ", nonzero bands:";
  Index shown = 0;
  for (Index b = 1; b < fit.estimate.dim(); ++b) {
    if (!fit.estimate.factor.band_is_zero(b)) {
      if (shown++ < 20) log << ' ' << b;
    }
  }
  if (shown > 20) log << " ... (" << shown << " total)";
  if (shown == 0) log << " none";
  log << '\n';
}

// ---------------------------------------------------------------- simulate

SimulateConfig resolve(const SimulateFlags& flags) {
  ConfigFile cf = load_config(flags.common.config);
  SimulateConfig c;
  std::vector<std::string> errors;
  std::optional<fs::path> out;
  take_path(cf.json, "out", cf.dir, out, errors);
  try {
    c.plan = io::plan_from_json(cf.json.dump(), c.plan);
  } catch (const ValidationError& e) {
    errors.insert(errors.end(), e.fields().begin(), e.fields().end());
  }

  auto parse_all = [&errors](const std::vector<std::string>& names, auto parser, auto& dest) {
    dest.clear();
    for (const auto& n : names) {
      try {
        dest.push_back(parser(n));
      } catch (const ValidationError& e) {
        errors.insert(errors.end(), e.fields().begin(), e.fields().end());
      }
    }
  };
  if (flags.models) parse_all(*flags.models, parse_model_kind, c.plan.models);
  if (flags.laws) parse_all(*flags.laws, parse_law, c.plan.laws);
  if (flags.methods) parse_all(*flags.methods, parse_method, c.plan.methods);
  if (flags.p_list) c.plan.p_list = *flags.p_list;
  if (flags.n) c.plan.n = *flags.n;
  if (flags.common.runs) c.plan.runs = *flags.common.runs;
  if (flags.common.seed) c.plan.base_seed = *flags.common.seed;
  if (flags.common.threads) c.plan.threads = *flags.common.threads;
  flags.common.params.apply(c.plan.bp);
  if (flags.common.params.folds) c.plan.banding.folds = *flags.common.params.folds;
  if (flags.common.params.k_grid) c.plan.banding.k_grid = *flags.common.params.k_grid;
  if (flags.common.out) out = flags.common.out;
  if (out) c.out = *out;

  if (errors.empty()) {
    try {
      c.plan.validate();
    } catch (const ValidationError& e) {
      errors.insert(errors.end(), e.fields().begin(), e.fields().end());
    }
  }
  throw_if(errors);
  return c;
}

std::string to_json(const SimulateConfig& c) {
  Json j;
  j["command"] = "simulate";
  j["out"] = c.out.generic_string();
  j["plan"] = parse(io::plan_to_json(c.plan));
  return j.dump(2);
}

void cmd_simulate(const SimulateConfig& c, std::ostream& log) {
  const ExperimentResult res = run_experiment(
      c.plan, [&log](std::size_t done, std::size_t total) {
        if (done == total || done % 10 == 0) log << "simulate: " << done << "/" << total << " data sets\n";
      });
  fs::create_directories(c.out);
  const TextTable table = results_table(res);
  {
    std::ofstream csv(c.out / "results.csv");
    if (!csv) throw std::runtime_error("cannot write " + (c.out / "results.csv").string());
    table.write_csv(csv);
  }
  Json j = parse(io::experiment_to_json(c.plan, res));
  Json top;
  top["config"] = parse(to_json(c));
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() != "plan") top[it.key()] = it.value();
  }
  write_json(c.out / "results.json", top);
  table.write_text(log);
}

// ---------------------------------------------------------------- forecast

ForecastConfig resolve(const ForecastFlags& flags) {
  ConfigFile cf = load_config(flags.common.config);
  ForecastConfig c;
  std::vector<std::string> errors;
  std::optional<fs::path> out;
  take_path(cf.json, "train", cf.dir, c.train, errors);
  take_path(cf.json, "test", cf.dir, c.test, errors);
  take_path(cf.json, "data", cf.dir, c.data, errors);
  take_path(cf.json, "out", cf.dir, out, errors);
  take(cf.json, "train_rows", c.train_rows, errors);
  take(cf.json, "p1", c.p1, errors);
  take(cf.json, "raw_counts", c.raw_counts, errors);
  take(cf.json, "k", c.k, errors);
  take(cf.json, "seed", c.seed, errors);
  std::vector<std::string> est_names;
  take(cf.json, "estimators", est_names, errors);
  apply_bp(cf.json, c.bp, errors);
  unknown_keys(cf.json, errors);

  if (flags.train) c.train = flags.train;
  if (flags.test) c.test = flags.test;
  if (flags.data) c.data = flags.data;
  if (flags.train_rows) c.train_rows = *flags.train_rows;
  if (flags.p1) c.p1 = *flags.p1;
  if (flags.raw_counts) c.raw_counts = *flags.raw_counts;
  if (flags.k) c.k = *flags.k;
  if (flags.estimators) est_names = *flags.estimators;
  if (flags.common.seed) c.seed = *flags.common.seed;
  if (flags.common.out) out = flags.common.out;
  flags.common.params.apply(c.bp);
  if (out) c.out = *out;

  if (!est_names.empty()) {
    c.estimators.clear();
    for (const auto& n : est_names) {
      try {
        c.estimators.push_back(parse_forecast_estimator(n));
      } catch (const ValidationError& e) {
        errors.insert(errors.end(), e.fields().begin(), e.fields().end());
      }
    }
  }
  if (c.data) {
    if (c.train || c.test) errors.push_back("data: give either data or train/test, not both");
    require_file(c.data, "data", errors);
    if (c.train_rows < 1) errors.push_back("train_rows: required with data and must be >= 1");
  } else {
    require_file(c.train, "train", errors);
    require_file(c.test, "test", errors);
  }
  if (c.p1 < 1) errors.push_back("p1: must be >= 1");
  if (c.k < 0) errors.push_back("k: must be non-negative");
  collect_validation(c.bp, errors);
  throw_if(errors);
  return c;
}

std::string to_json(const ForecastConfig& c) {
  Json j;
  j["command"] = "forecast";
  j["train"] = c.train ? Json(c.train->generic_string()) : Json(nullptr);
  j["test"] = c.test ? Json(c.test->generic_string()) : Json(nullptr);
  j["data"] = c.data ? Json(c.data->generic_string()) : Json(nullptr);
  j["train_rows"] = c.train_rows;
  j["p1"] = c.p1;
  j["raw_counts"] = c.raw_counts;
  Json est = Json::array();
  for (auto e : c.estimators) est.push_back(to_string(e));
  j["estimators"] = est;
  j["k"] = c.k;
  j["out"] = c.out.generic_string();
  j["seed"] = c.seed;
  j["bp"] = parse(io::bp_options_to_json(c.bp));
  return j.dump(2);
}

void cmd_forecast(const ForecastConfig& c, std::ostream& log) {
  DataMatrix train, test;
  if (c.data) {
    const DataMatrix all = load_data(*c.data, c.raw_counts);
    if (c.train_rows >= all.n()) {
      throw ValidationError({"train_rows: must leave at least one test row"});
    }
    std::vector<Index> tr, te;
    for (Index i = 0; i < all.n(); ++i) (i < c.train_rows ? tr : te).push_back(i);
    train = all.rows(tr);
    test = all.rows(te);
  } else {
    train = load_data(*c.train, c.raw_counts);
    test = load_data(*c.test, c.raw_counts);
  }
  if (train.p() != test.p()) throw ValidationError({"test: column count differs from train"});
  const ForecastSplit split{c.p1};
  split.validate(train.p());
  log << "forecast: train " << train.n() << " x " << train.p() << ", test " << test.n()
      << " rows, p1 = " << c.p1 << '\n';

  const Index p2 = train.p() - c.p1;
  Matrix err = Matrix::Constant(p2, static_cast<Index>(c.estimators.size()),
                                std::numeric_limits<double>::quiet_NaN());
  Json summary;
  summary["config"] = parse(to_json(c));
  Json per = Json::object();
  for (std::size_t e = 0; e < c.estimators.size(); ++e) {
    ForecastOptions opt;
    opt.estimator = c.estimators[e];
    opt.k = c.k;
    opt.bp = c.bp;
    const std::string name = to_string(opt.estimator);
    Json ej;
    try {
      const ForecastResult r = run_callcenter(train, test, split, opt);
      err.col(static_cast<Index>(e)) = r.err;
      ej["ok"] = true;
      ej["mean_err"] = r.mean_err;
      if (opt.estimator == ForecastEstimator::BP) ej["lambda"] = r.lambda;
      log << "forecast: " << name << " mean Err = " << io::format_double(r.mean_err) << '\n';
    } catch (const DomainError& ex) {
      ej["ok"] = false;
      ej["error"] = ex.what();
      log << "forecast: " << name << " failed: " << ex.what() << '\n';
    }
    per[name] = ej;
  }
  summary["estimators"] = per;

  fs::create_directories(c.out);
  {
    std::ofstream csv(c.out / "err_by_interval.csv");
    if (!csv) throw std::runtime_error("cannot write err_by_interval.csv");
    csv << "interval";
    for (auto e : c.estimators) csv << ',' << to_string(e);
    csv << '\n';
    for (Index j = 0; j < p2; ++j) {
      csv << (c.p1 + j + 1);
      for (Index e = 0; e < err.cols(); ++e) {
        csv << ',' << (std::isnan(err(j, e)) ? std::string("NA") : io::format_double(err(j, e)));
      }
      csv << '\n';
    }
  }
  write_json(c.out / "summary.json", summary);
}

// ---------------------------------------------------------------- selftest

SelftestConfig resolve(const SelftestFlags& flags) {
  ConfigFile cf = load_config(flags.common.config);
  SelftestConfig c;
  std::vector<std::string> errors;
  std::optional<fs::path> out;
  take(cf.json, "instances", c.instances, errors);
  take(cf.json, "seed", c.seed, errors);
  take_path(cf.json, "out", cf.dir, out, errors);
  unknown_keys(cf.json, errors);
  if (flags.instances) c.instances = *flags.instances;
  if (flags.common.seed) c.seed = *flags.common.seed;
  if (flags.common.out) out = flags.common.out;
  if (out) c.out = *out;
  if (c.instances < 1) errors.push_back("instances: must be >= 1");
  throw_if(errors);
  return c;
}

std::string to_json(const SelftestConfig& c) {
  Json j;
  j["command"] = "project-selftest";
  j["instances"] = c.instances;
  j["seed"] = c.seed;
  j["out"] = c.out.generic_string();
  return j.dump(2);
}

namespace {

/// Independent reference: with the constraint active, the projection is
/// max(b - tau w, 0), and tau solves sum w max(b - tau w, 0) = M; found by
/// bisection.
Vector bisection_projection(const Vector& b, const Vector& w, double m) {
  Vector out = b;
  double used = 0.0;
  for (Index i = 0; i < b.size(); ++i) {
    if (w[i] > 0.0) used += w[i] * b[i];
  }
  if (used <= m) return out;
  auto mass = [&](double tau) {
    double s = 0.0;
    for (Index i = 0; i < b.size(); ++i) {
      if (w[i] > 0.0) s += w[i] * std::max(b[i] - tau * w[i], 0.0);
    }
    return s;
  };
  double lo = 0.0, hi = 0.0;
  for (Index i = 0; i < b.size(); ++i) {
    if (w[i] > 0.0) hi = std::max(hi, b[i] / w[i]);
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (mass(mid) > m ? lo : hi) = mid;
  }
  for (Index i = 0; i < b.size(); ++i) {
    if (w[i] > 0.0) out[i] = std::max(b[i] - hi * w[i], 0.0);
  }
  return out;
}

}  // namespace

bool cmd_project_selftest(const SelftestConfig& c, std::ostream& log) {
  std::mt19937_64 rng(c.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::uniform_int_distribution<int> size(1, 6);
  int infeasible = 0, mismatched = 0;
  double worst = 0.0;
  for (int t = 0; t < c.instances; ++t) {
    const Index s = size(rng);
    Vector b(s), w(s);
    for (Index i = 0; i < s; ++i) {
      b[i] = unif(rng) < 0.15 ? 0.0 : 3.0 * unif(rng);
      w[i] = unif(rng) < 0.2 ? 0.0 : 0.1 + 2.0 * unif(rng);
    }
    const double m = unif(rng) < 0.2 ? 0.0 : 4.0 * unif(rng);
    const Vector proj = project_block_norms(b, BlockWeights{w}, m);
    double used = 0.0;
    bool ok = true;
    for (Index i = 0; i < s; ++i) {
      if (proj[i] < 0.0) ok = false;
      if (w[i] > 0.0) used += w[i] * proj[i];
      else if (proj[i] != b[i]) ok = false;
    }
    if (used > m + 1e-10 * std::max(1.0, m)) ok = false;
    if (!ok) ++infeasible;
    const double diff = (proj - bisection_projection(b, w, m)).cwiseAbs().maxCoeff();
    worst = std::max(worst, diff);
    if (diff > 1e-8) ++mismatched;
  }

  // KKT structure on a fixed model II sample: stationarity must hold on
  // every nonzero block of the one-step solution.
  const ModelSpec spec{ModelKind::AR6Banded, 12};
  const DataMatrix data = generate(spec, 60, Law::Normal, c.seed);
  BpOptions bp;
  bp.grid_size = 10;
  const BpFit fit = estimate_bp(data, bp);
  const bool kkt_equality_ok = !fit.kkt || fit.kkt->max_equality_violation <= 1e-4;

  Json j;
  j["config"] = parse(to_json(c));
  j["instances"] = c.instances;
  j["infeasible"] = infeasible;
  j["mismatched"] = mismatched;
  j["max_abs_difference"] = worst;
  Json k;
  k["lambda"] = fit.lambda;
  if (fit.kkt) {
    k["max_equality_violation"] = fit.kkt->max_equality_violation;
    k["max_inequality_ratio"] = fit.kkt->max_inequality_ratio;
    k["required_multiplier"] = fit.kkt->required_multiplier;
    k["satisfied"] = fit.kkt->satisfied;
  }
  k["equality_ok"] = kkt_equality_ok;
  j["kkt"] = k;
  const bool pass = infeasible == 0 && mismatched == 0 && kkt_equality_ok;
  j["pass"] = pass;
  fs::create_directories(c.out);
  write_json(c.out / "selftest.json", j);

  log << "project-selftest: " << c.instances << " instances, " << infeasible << " infeasible, "
      << mismatched << " mismatched (max diff " << io::format_double(worst) << ")\n";
  log << "project-selftest: KKT stationarity on nonzero blocks "
      << (kkt_equality_ok ? "ok" : "VIOLATED") << '\n';
  log << "project-selftest: " << (pass ? "PASS" : "FAIL") << '\n';
  return pass;
}

}  // namespace bandprec::cli
