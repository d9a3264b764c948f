// ogtt: simulate, infer and classify OGTT glucose curves.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "ogtt/pipeline.hpp"

int main(int argc, char** argv) {
  using namespace ogtt;
  RunConfig cfg;
  std::string input, out = ".";

  CLI::App app{"Glucose-insulin-glucagon OGTT model: simulation, Bayesian inference and classification"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value file; command-line flags take precedence");
  app.add_option("--input", input, "patient CSV (infer) or summary directory (classify)");
  app.add_option("--out", out, "output directory")->capture_default_str();
  app.add_option("--iters", cfg.n_iter, "t-walk iterations per patient")->capture_default_str();
  app.add_option("--burnin", cfg.burn_in, "iterations discarded as burn-in")->capture_default_str();
  app.add_option("--seed", cfg.seed, "base random seed")->capture_default_str();
  app.add_option("--step", cfg.step, "RK4 step, hours")->capture_default_str();
  app.add_option("--c", cfg.c, "SVM regularization constant")->capture_default_str();
  app.add_option("--workers", cfg.workers, "worker threads, 0 = all cores")->capture_default_str();
  app.add_option("--band-samples", cfg.band_samples, "posterior trajectories per band file")->capture_default_str();

  auto* sim = app.add_subcommand("simulate", "integrate the model and write trajectory.csv")->fallthrough();
  sim->add_option("--theta0", cfg.params.theta0)->capture_default_str();
  sim->add_option("--theta1", cfg.params.theta1)->capture_default_str();
  sim->add_option("--theta2", cfg.params.theta2)->capture_default_str();
  sim->add_option("--gb", cfg.params.Gb)->capture_default_str();
  sim->add_option("--theta3", cfg.params.theta3)->capture_default_str();
  sim->add_option("--v0", cfg.params.V0, "ingested glucose load")->capture_default_str();
  sim->add_option("--g0", cfg.g0, "initial glucose, mg/dl")->capture_default_str();
  sim->add_option("--t-end", cfg.t_end, "hours")->capture_default_str();

  auto* cohort = app.add_subcommand("make-cohort", "write a synthetic patients.csv and truth.csv")->fallthrough();
  cohort->add_option("--n", cfg.cohort.n, "number of patients")->capture_default_str();
  cohort->add_option("--impaired-fraction", cfg.cohort.impaired_fraction)->capture_default_str();

  auto* infer = app.add_subcommand("infer", "sample each patient's posterior")->fallthrough();
  auto* classify = app.add_subcommand("classify", "train the quantile SVM ensemble on inferred summaries")->fallthrough();
  auto* verify = app.add_subcommand("verify", "run the identifiability and stability checks")->fallthrough();
  auto* verify_id = app.add_subcommand("verify-identifiability", "similarity-transform residuals")->fallthrough();
  auto* verify_st = app.add_subcommand("verify-stability", "characteristic cubic checks")->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }
  cfg.input = input;
  cfg.out = out;

  if (sim->parsed()) return run_simulate(cfg);
  if (cohort->parsed()) return run_make_cohort(cfg);
  if ((infer->parsed() || classify->parsed()) && input.empty()) {
    std::cerr << "error: --input is required\n";
    return kExitInput;
  }
  if (infer->parsed()) return run_infer(cfg);
  if (classify->parsed()) return run_classify(cfg);
  if (verify_id->parsed()) return report_checks(identifiability_checks(cfg.seed), std::cout);
  if (verify_st->parsed()) return report_checks(stability_checks(cfg.seed), std::cout);
  if (verify->parsed()) {
    auto checks = identifiability_checks(cfg.seed);
    for (auto& c : stability_checks(cfg.seed)) checks.push_back(c);
    return report_checks(checks, std::cout);
  }
  return kExitInput;
}
