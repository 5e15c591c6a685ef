#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "bandprec/errors.hpp"
#include "commands.hpp"

using namespace bandprec;
using namespace bandprec::cli;

namespace {

void add_common(CLI::App* app, CommonFlags& f) {
  app->add_option("--config", f.config, "JSON config file");
  app->add_option("--seed", f.seed, "Random seed");
  app->add_option("--out", f.out, "Output directory");
  app->add_option("--threads", f.threads, "Worker threads (0 = auto; env BANDPREC_THREADS)");
  app->add_option("--runs", f.runs, "Simulation runs");
  ParamOverrides& p = f.params;
  app->add_option("--gamma", p.gamma, "Initial-estimator window fraction");
  app->add_option("--bandwidth", p.h, "Band smoothing bandwidth h");
  app->add_flag("--no-smoothing", p.no_smoothing, "Skip band smoothing");
  app->add_option("--a", p.a, "SCAD parameter a");
  app->add_option("--lambda", p.lambda, "Fixed lambda (skips GCV)");
  app->add_option("--lambda-grid", p.lambda_grid, "GCV lambda grid")->delimiter(',');
  app->add_option("--grid-size", p.grid_size, "Points in the default lambda grid");
  app->add_option("--M", p.M, "Constraint radius");
  app->add_option("--max-outer", p.max_outer, "Linearization steps");
  app->add_option("--tol", p.tol, "Solver tolerance");
  app->add_option("--gcv-residual", p.gcv_residual, "fitted or smoothed_initial");
  app->add_option("--folds", p.folds, "CV folds for banding");
  app->add_option("--k-grid", p.k_grid, "Banding orders for CV")->delimiter(',');
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Block-penalized estimation of sparse precision matrices"};
  app.require_subcommand(1);

  EstimateFlags ef;
  auto* est = app.add_subcommand("estimate", "Fit a precision matrix to a CSV data matrix");
  add_common(est, ef.common);
  est->add_option("--input", ef.input, "CSV data matrix (rows = observations)");
  est->add_option("--center", ef.center, "Subtract column means (true/false)");

  SimulateFlags sf;
  auto* sim = app.add_subcommand("simulate", "Run the simulation study");
  add_common(sim, sf.common);
  sim->add_option("--models", sf.models, "I, II, III (or enumerator names)")->delimiter(',');
  sim->add_option("--p", sf.p_list, "Dimensions")->delimiter(',');
  sim->add_option("--laws", sf.laws, "Normal, t3")->delimiter(',');
  sim->add_option("--methods", sf.methods, "BP, Banding, SampleCov")->delimiter(',');
  sim->add_option("--n", sf.n, "Sample size");

  ForecastFlags ff;
  auto* fc = app.add_subcommand("forecast", "Conditional-mean forecasting");
  add_common(fc, ff.common);
  fc->add_option("--train", ff.train, "Training CSV");
  fc->add_option("--test", ff.test, "Test CSV");
  fc->add_option("--data", ff.data, "Single CSV split by --train-rows");
  fc->add_option("--train-rows", ff.train_rows, "Rows of --data used for training");
  fc->add_option("--p1", ff.p1, "Size of the conditioning block");
  fc->add_option("--raw-counts", ff.raw_counts, "Apply sqrt(N + 1/4) (true/false)");
  fc->add_option("--estimators", ff.estimators, "SampleCov, Banding, BP")->delimiter(',');
  fc->add_option("--k", ff.k, "Banding order");

  SelftestFlags tf;
  auto* st = app.add_subcommand("project-selftest", "Check the projection and KKT structure");
  add_common(st, tf.common);
  st->add_option("--instances", tf.instances, "Random projection instances");

  CLI11_PARSE(app, argc, argv);

  try {
    if (est->parsed()) {
      cmd_estimate(resolve(ef), std::cout);
    } else if (sim->parsed()) {
      cmd_simulate(resolve(sf), std::cout);
    } else if (fc->parsed()) {
      cmd_forecast(resolve(ff), std::cout);
    } else if (st->parsed()) {
      return cmd_project_selftest(resolve(tf), std::cout) ? 0 : 3;
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: invalid configuration\n";
    for (const auto& f : e.fields()) std::cerr << "  " << f << '\n';
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
