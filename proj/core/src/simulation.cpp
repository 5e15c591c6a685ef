#include "bandprec/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <map>
#include <mutex>
#include <random>
#include <thread>
#include <tuple>

#include <Eigen/Cholesky>

#include "bandprec/errors.hpp"

namespace bandprec {

std::string to_string(ModelKind k) {
  switch (k) {
    case ModelKind::IdentityScaled: return "IdentityScaled";
    case ModelKind::AR6Banded: return "AR6Banded";
    case ModelKind::MA1Geometric: return "MA1Geometric";
  }
  return "?";
}

std::string to_string(Law l) { return l == Law::Normal ? "Normal" : "StudentT3"; }

std::string to_string(Method m) {
  switch (m) {
    case Method::BP: return "BP";
    case Method::Banding: return "Banding";
    case Method::SampleCov: return "SampleCov";
  }
  return "?";
}

ModelKind parse_model_kind(const std::string& s) {
  if (s == "IdentityScaled" || s == "I") return ModelKind::IdentityScaled;
  if (s == "AR6Banded" || s == "II") return ModelKind::AR6Banded;
  if (s == "MA1Geometric" || s == "III") return ModelKind::MA1Geometric;
  throw ValidationError({"model: unknown model '" + s + "'"});
}

Law parse_law(const std::string& s) {
  if (s == "Normal" || s == "normal") return Law::Normal;
  if (s == "StudentT3" || s == "t3") return Law::StudentT3;
  throw ValidationError({"law: unknown law '" + s + "'"});
}

Method parse_method(const std::string& s) {
  if (s == "BP" || s == "bp") return Method::BP;
  if (s == "Banding" || s == "banding") return Method::Banding;
  if (s == "SampleCov" || s == "sample") return Method::SampleCov;
  throw ValidationError({"method: unknown method '" + s + "'"});
}

void ModelSpec::validate() const {
  std::vector<std::string> bad;
  if (p < 2) bad.push_back("p: must be >= 2");
  if (kind == ModelKind::AR6Banded && p < 8) bad.push_back("p: AR6Banded needs p >= 8");
  if (!bad.empty()) throw ValidationError(std::move(bad));
}

PrecisionEstimate true_model(const ModelSpec& spec) {
  spec.validate();
  const Index p = spec.p;
  BandedCholesky t(p);
  double s2 = 0.8;
  switch (spec.kind) {
    case ModelKind::IdentityScaled:
      break;
    case ModelKind::AR6Banded:
      t.band(1).setConstant(-0.6);
      t.band(2).setConstant(-0.6);
      t.band(4).setConstant(-0.4);
      t.band(6).setConstant(-0.4);
      break;
    case ModelKind::MA1Geometric:
      for (Index j = 1; j < p; ++j) t.band(j).setConstant(std::pow(0.5, static_cast<double>(j)));
      s2 = 0.1;
      break;
  }
  return {std::move(t), DiagonalVariances::constant(p, s2)};
}

DataMatrix generate(const ModelSpec& spec, Index n, Law law, std::uint64_t seed) {
  const PrecisionEstimate truth = true_model(spec);
  const Index p = spec.p;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix y(n, p);

  if (law == Law::Normal) {
    std::vector<Index> bands;
    for (Index j = 1; j < p; ++j) {
      if (!truth.factor.band_is_zero(j)) bands.push_back(j);
    }
    const Vector sd = truth.variances.values().cwiseSqrt();
    for (Index i = 0; i < n; ++i) {
      for (Index c = 0; c < p; ++c) {
        double v = sd[c] * normal(rng);
        for (Index j : bands) {
          if (j > c) break;
          v += truth.factor.phi(c, c - j) * y(i, c - j);
        }
        y(i, c) = v;
      }
    }
    return DataMatrix(std::move(y));
  }

  const Matrix sigma = assemble_covariance(truth).matrix();
  const Eigen::LLT<Matrix> llt(sigma);
  if (llt.info() != Eigen::Success) throw NumericError("generate: Sigma is not positive definite", 0);
  const Matrix l = llt.matrixL();
  Vector z(p);
  for (Index i = 0; i < n; ++i) {
    for (Index c = 0; c < p; ++c) z[c] = normal(rng);
    double g = 0.0;
    for (int k = 0; k < 3; ++k) {
      const double e = normal(rng);
      g += e * e;
    }
    const double scale = 1.0 / (std::sqrt(g / 3.0) * std::sqrt(3.0));
    y.row(i) = (l * z).transpose() * scale;
  }
  return DataMatrix(std::move(y));
}

void ExperimentPlan::validate() const {
  std::vector<std::string> bad;
  if (models.empty()) bad.push_back("models: empty");
  if (p_list.empty()) bad.push_back("p_list: empty");
  if (laws.empty()) bad.push_back("laws: empty");
  if (methods.empty()) bad.push_back("methods: empty");
  if (runs < 1) bad.push_back("runs: must be >= 1");
  if (n < 2) bad.push_back("n: must be >= 2");
  if (threads < 0) bad.push_back("threads: must be >= 0");
  for (ModelKind m : models) {
    for (Index p : p_list) {
      if (p < 2 || (m == ModelKind::AR6Banded && p < 8)) {
        bad.push_back("p_list: " + std::to_string(p) + " invalid for " + to_string(m));
      }
    }
  }
  try {
    bp.validate();
  } catch (const ValidationError& e) {
    bad.insert(bad.end(), e.fields().begin(), e.fields().end());
  }
  if (!bad.empty()) throw ValidationError(std::move(bad));
}

namespace {

BandingConfig banding_for(const ExperimentPlan& plan, Index n, Index p, std::uint64_t seed) {
  BandingConfig cfg = plan.banding;
  if (cfg.k_grid.empty()) {
    const Index kmax = std::min<Index>({10, n - 1, p - 1});
    for (Index k = 0; k <= kmax; ++k) cfg.k_grid.push_back(k);
  }
  cfg.seed = seed;
  return cfg;
}

}  // namespace

RunRecord run_single(const ExperimentPlan& plan, ModelKind model, Index p, Law law,
                     Method method, int run, const DataMatrix& data,
                     const PrecisionEstimate& truth) {
  RunRecord rec;
  rec.model = model;
  rec.p = p;
  rec.law = law;
  rec.method = method;
  rec.run = run;
  rec.seed = plan.base_seed + static_cast<std::uint64_t>(run);
  const std::string label = to_string(method);
  try {
    switch (method) {
      case Method::BP: {
        const BpFit fit = estimate_bp(data, plan.bp);
        rec.metrics = evaluate(label, truth, fit.estimate);
        rec.lambda = fit.lambda;
        if (fit.kkt) {
          rec.kkt_satisfied = fit.kkt->satisfied;
          rec.kkt_inequality_ratio = fit.kkt->max_inequality_ratio;
          rec.kkt_equality_violation = fit.kkt->max_equality_violation;
        }
        rec.ls_increases = fit.report.ls_increases;
        rec.outer_increases = fit.report.outer_increases;
        break;
      }
      case Method::Banding: {
        const BandedCvFit fit = fit_banded_cv(data, banding_for(plan, data.n(), p, rec.seed));
        rec.metrics = evaluate(label, truth, fit.estimate);
        rec.k = fit.k;
        break;
      }
      case Method::SampleCov:
        rec.metrics = evaluate(label, truth, sample_covariance(data));
        break;
    }
    rec.exact_support = rec.metrics.pct_correct_zeros.value_or(100.0) == 100.0 &&
                        rec.metrics.pct_correct_nonzeros.value_or(100.0) == 100.0 &&
                        method != Method::SampleCov;
    rec.ok = true;
  } catch (const std::exception& e) {
    rec.ok = false;
    rec.error = e.what();
  }
  return rec;
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("BANDPREC_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

ExperimentResult run_experiment(
    const ExperimentPlan& plan,
    const std::function<void(std::size_t, std::size_t)>& progress) {
  plan.validate();
  struct Task {
    ModelKind model;
    Index p;
    Law law;
    int run;
  };
  std::vector<Task> tasks;
  for (ModelKind m : plan.models)
    for (Index p : plan.p_list)
      for (Law l : plan.laws)
        for (int r = 0; r < plan.runs; ++r) tasks.push_back({m, p, l, r});

  std::map<std::pair<ModelKind, Index>, PrecisionEstimate> truths;
  for (ModelKind m : plan.models)
    for (Index p : plan.p_list) truths.emplace(std::make_pair(m, p), true_model({m, p}));

  const std::size_t per_task = plan.methods.size();
  std::vector<RunRecord> records(tasks.size() * per_task);
  std::atomic<std::size_t> next{0};
  std::size_t done = 0;
  std::mutex mu;

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      const Task& t = tasks[i];
      const PrecisionEstimate& truth = truths.at({t.model, t.p});
      const std::uint64_t seed = plan.base_seed + static_cast<std::uint64_t>(t.run);
      std::optional<DataMatrix> data;
      std::string gen_error;
      try {
        data = generate({t.model, t.p}, plan.n, t.law, seed);
      } catch (const std::exception& e) {
        gen_error = e.what();
      }
      for (std::size_t m = 0; m < per_task; ++m) {
        RunRecord& rec = records[i * per_task + m];
        if (data) {
          rec = run_single(plan, t.model, t.p, t.law, plan.methods[m], t.run, *data, truth);
        } else {
          rec = RunRecord{};
          rec.model = t.model;
          rec.p = t.p;
          rec.law = t.law;
          rec.method = plan.methods[m];
          rec.run = t.run;
          rec.seed = seed;
          rec.error = gen_error;
        }
      }
      if (progress) {
        std::lock_guard<std::mutex> lock(mu);
        progress(++done, tasks.size());
      }
    }
  };

  const int nthreads = std::min<int>(resolve_threads(plan.threads), static_cast<int>(tasks.size()));
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < nthreads; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  ExperimentResult res;
  res.runs = std::move(records);
  using Key = std::tuple<int, Index, int, int>;
  std::map<Key, std::size_t> cell_of;
  std::vector<std::vector<MetricRow>> ok_rows;
  for (const auto& r : res.runs) {
    const Key key{static_cast<int>(r.model), r.p, static_cast<int>(r.law), static_cast<int>(r.method)};
    auto it = cell_of.find(key);
    if (it == cell_of.end()) {
      it = cell_of.emplace(key, res.cells.size()).first;
      CellResult c;
      c.model = r.model;
      c.p = r.p;
      c.law = r.law;
      c.method = r.method;
      res.cells.push_back(c);
      ok_rows.emplace_back();
    }
    if (r.ok) {
      ok_rows[it->second].push_back(r.metrics);
    } else {
      ++res.cells[it->second].failures;
    }
  }
  for (std::size_t c = 0; c < res.cells.size(); ++c) {
    res.cells[c].summary = summarize(ok_rows[c]);
    res.cells[c].summary.method = to_string(res.cells[c].method);
  }
  return res;
}

TextTable results_table(const ExperimentResult& res) {
  TextTable t;
  t.header = {"model", "p", "law", "method", "runs", "failures", "kl_loss", "op_norm",
              "inf_norm", "pct_correct_zeros", "pct_correct_nonzeros"};
  for (const auto& c : res.cells) {
    const auto& s = c.summary;
    auto opt = [](const std::optional<Summary>& x) { return x ? format_summary(*x) : std::string("NA"); };
    const bool any = s.runs > 0;
    t.rows.push_back({to_string(c.model), std::to_string(c.p), to_string(c.law),
                      to_string(c.method), std::to_string(s.runs), std::to_string(c.failures),
                      any ? format_summary(s.kl_loss) : "NA", any ? format_summary(s.op_norm) : "NA",
                      any ? format_summary(s.inf_norm) : "NA", opt(s.pct_correct_zeros),
                      opt(s.pct_correct_nonzeros)});
  }
  return t;
}

}  // namespace bandprec
