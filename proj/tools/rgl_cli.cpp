// rgl_cli: sweeps, certificate studies, baseline comparisons and one-off solves.
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "rgl/certificate.hpp"
#include "rgl/experiments.hpp"
#include "rgl/instance.hpp"
#include "rgl/io.hpp"
#include "rgl/solver.hpp"

namespace fs = std::filesystem;
using namespace rgl;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::string out = "out";
  bool dump_failures = false;
};

void add_common(CLI::App* app, Common& c, bool needs_config) {
  auto* opt = app->add_option("--config", c.config, "INI experiment config");
  if (needs_config) opt->required()->check(CLI::ExistingFile);
  app->add_option("--seed", c.seed, "base seed (overrides the config)");
  app->add_option("--threads", c.threads, "worker threads (overrides the config)")
      ->check(CLI::PositiveNumber);
  app->add_option("--out", c.out, "output directory");
  app->add_flag("--dump-failures", c.dump_failures, "save the bundle of every failed trial");
}

ExperimentConfig load(const Common& c, ExperimentMode forced) {
  auto cfg = ExperimentConfig::from_ini(c.config);
  // the subcommand decides the mode, except that phase keeps theorem_regime
  if (!(forced == ExperimentMode::phase_transition && cfg.mode == ExperimentMode::theorem_regime)) {
    cfg.mode = forced;
  }
  if (c.seed) cfg.seed = *c.seed;
  if (c.threads) cfg.threads = *c.threads;
  cfg.validate();
  return cfg;
}

RunOptions run_options(const Common& c) {
  RunOptions r;
  r.out_dir = fs::path(c.out);
  r.dump_failures = c.dump_failures;
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust group lasso recovery experiments"};
  app.require_subcommand(1);

  Common phase_opts, cert_opts, compare_opts, gen_opts, solve_opts;
  auto* phase = app.add_subcommand("phase", "phase-transition sweep (phase.csv, phase.dat)");
  add_common(phase, phase_opts, true);
  auto* cert = app.add_subcommand("cert", "golfing certificate pass rates (certificate.csv)");
  add_common(cert, cert_opts, true);
  auto* compare = app.add_subcommand("compare", "RGL against the l2,1 baselines");
  add_common(compare, compare_opts, true);

  auto* gen = app.add_subcommand("gen", "create instance bundles for every grid cell");
  add_common(gen, gen_opts, true);
  Index per_cell = 1;
  gen->add_option("--count", per_cell, "bundles per cell")->check(CLI::PositiveNumber);

  auto* solve = app.add_subcommand("solve", "solve a saved instance bundle");
  add_common(solve, solve_opts, false);
  std::string bundle;
  std::string program = "rgl";
  double gamma = 1e4;
  SolverOptions sopts;
  solve->add_option("--bundle", bundle, "bundle directory")->required()->check(CLI::ExistingDirectory);
  solve->add_option("--program", program, "rgl | l21_equality | group_lasso")
      ->check(CLI::IsMember({"rgl", "l21_equality", "group_lasso"}));
  solve->add_option("--gamma", gamma, "group-lasso weight");
  solve->add_option("--max-iters", sopts.max_iters, "iteration cap");
  solve->add_option("--tol", sopts.tol_primal, "primal and dual tolerance");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*phase) {
      const auto cfg = load(phase_opts, ExperimentMode::phase_transition);
      const auto cells = run_phase_transition(cfg, run_options(phase_opts));
      write_phase_csv(std::cout, cells);
    } else if (*cert) {
      const auto cfg = load(cert_opts, ExperimentMode::certificate_study);
      const auto cells = run_certificate_study(cfg, run_options(cert_opts));
      write_certificate_csv(std::cout, cells);
    } else if (*compare) {
      const auto cfg = load(compare_opts, ExperimentMode::baseline_compare);
      const auto res = run_baseline_compare(cfg, run_options(compare_opts));
      std::cout << "program,lambda_scale,kT,kmax,trials,successes,solver_failures\n";
      for (const auto& r : res.summary) {
        std::cout << r.program << ',' << io::format_sig(r.lambda_scale) << ',' << r.k_T << ','
                  << r.k_max << ',' << r.trials << ',' << r.successes << ',' << r.solver_failures
                  << '\n';
      }
    } else if (*gen) {
      const auto cfg = load(gen_opts, ExperimentMode::phase_transition);
      const auto cells = cfg.cells();
      for (Index ci = 0; ci < cells.size(); ++ci) {
        for (Index t = 0; t < per_cell; ++t) {
          const auto seed = cfg.cell_seed(ci) + t;
          const auto inst = make_instance(cfg.request(cells[ci], seed));
          const fs::path dir = fs::path(gen_opts.out) /
                               ("cell" + std::to_string(ci) + "_seed" + std::to_string(seed));
          fs::create_directories(dir);
          save_bundle(dir, inst);
          std::cout << dir.string() << '\n';
        }
      }
    } else if (*solve) {
      sopts.tol_dual = sopts.tol_primal;
      const auto inst = load_bundle(bundle);
      SolverReport rep;
      if (program == "rgl") rep = solve_rgl(inst.M, *inst.ensemble, inst.lambda, sopts);
      else if (program == "l21_equality") rep = solve_l21_equality(inst.M, *inst.ensemble, sopts);
      else rep = solve_group_lasso(inst.M, *inst.ensemble, gamma, sopts);
      const auto rc = check_exact_recovery(rep, inst.Y_true, inst.S_true);
      auto j = report_to_json(rep);
      j["recovery"] = {{"success", rc.success},
                       {"rel_err_Y", rc.rel_err_Y},
                       {"rel_err_S", rc.rel_err_S},
                       {"support_match", rc.support_match}};
      fs::create_directories(solve_opts.out);
      std::ofstream(fs::path(solve_opts.out) / "report.json") << j.dump(2) << '\n';
      std::cout << "program=" << program << " converged=" << rep.converged
                << " iterations=" << rep.iterations << " success=" << rc.success
                << " rel_err_Y=" << io::format_sig(rc.rel_err_Y)
                << " rel_err_S=" << io::format_sig(rc.rel_err_S) << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
