// Acceptance run: one PASS/FAIL line per criterion, exit code 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "rgl/certificate.hpp"
#include "rgl/experiments.hpp"
#include "rgl/instance.hpp"
#include "rgl/rng.hpp"
#include "rgl/solver.hpp"

using namespace rgl;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void run(int id, const char* title, double budget_s, const std::function<Verdict()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = body();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = secs < budget_s;
  const bool ok = v.pass && in_time;
  failures += !ok;
  std::printf("[%s] %d %s: %s (%.1f s of %.0f s)\n", ok ? "PASS" : "FAIL", id, title, v.detail.c_str(), secs,
              budget_s);
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0, double e = 0, double g = 0) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, a, b, c, d, e, g);
  return buf;
}

// Minimizer of t r + (r - a)^2 / 2 over r >= 0 by bisection on the derivative.
double radial_oracle(double a, double t) {
  if (t + (0.0 - a) >= 0.0) return 0.0;
  double lo = 0.0, hi = a;
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (lo + hi);
    (t + mid - a < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Minimizer of t|y| + (y - x)^2 / 2 by locating 0 in the subdifferential.
double scalar_oracle(double x, double t) {
  if (std::abs(x) <= t) return 0.0;
  const double s = x > 0 ? 1.0 : -1.0;
  return s * radial_oracle(std::abs(x), t);
}

InstanceRequest rademacher_cell(Index n, Index m, Index L, Index k_T, Index k, std::uint64_t seed) {
  InstanceRequest r;
  r.n = n;
  r.m = m;
  r.L = L;
  r.k_T = k_T;
  r.k_per_column.assign(L, k);
  r.specs.assign(L, DistributionSpec::rademacher(n));
  r.seed = seed;
  return r;
}

std::vector<int> ints(const IndexSet& s) { return {s.begin(), s.end()}; }

// In-budget certificate cell at n = 256: with mu = kappa = 1 the group
// sparsity budget admits k_T = 1 once m >= 9600 log^2(256), about 295,000.
ExperimentConfig in_budget_config() {
  ExperimentConfig c;
  c.mode = ExperimentMode::certificate_study;
  c.seed = 20240601;
  c.trials = 100;
  c.n = 256;
  c.m = 300000;
  c.L = 1;
  c.distribution = "rademacher";
  c.in_budget = true;
  c.k_T_values = {1};
  c.corruption_counts = {40};
  return c;
}

}  // namespace

int main() {
  run(1, "prox correctness", 1.0, [] {
    std::mt19937_64 g(1);
    std::normal_distribution<double> nd;
    std::uniform_real_distribution<double> ud(0.0, 3.0);
    double worst = 0.0;
    for (int t = 0; t < 1000; ++t) {
      const Index d = 1 + g() % 6;
      std::vector<double> row(d);
      for (auto& v : row) v = 2.0 * nd(g);
      const double th = t % 10 == 0 ? 0.0 : ud(g);
      const double nr = std::sqrt(std::inner_product(row.begin(), row.end(), row.begin(), 0.0));
      const double r = radial_oracle(nr, th);
      const auto got = prox_group_soft(row, th);
      for (Index k = 0; k < d; ++k) worst = std::max(worst, std::abs(got[k] - (nr > 0 ? row[k] / nr * r : 0.0)));
      worst = std::max(worst, std::abs(prox_soft(row[0], th) - scalar_oracle(row[0], th)));
    }
    return Verdict{worst <= 1e-8, fmt("max deviation %.3g over 1000 inputs", worst)};
  });

  run(2, "solver optimality on tiny instances", 120.0, [] {
    std::mt19937_64 g(2);
    double worst_gap = -1e300, worst_feas = 0.0;
    int ok = 0;
    for (int t = 0; t < 50; ++t) {
      InstanceRequest r;
      r.n = 4 + g() % 7;
      r.m = 4 + g() % 5;
      r.L = 1 + g() % 2;
      r.k_T = 1 + g() % 2;
      r.k_per_column.assign(r.L, g() % 2);
      r.specs.assign(r.L, DistributionSpec::isotropic_gaussian(r.n));
      r.seed = 5000 + t;
      const auto inst = make_instance(r);
      const auto rep = solve_rgl(inst.M, *inst.ensemble, inst.lambda);
      const double feas = norm_fro(inst.M - oracle::naive_forward(inst.ensemble->A, rep.Y_hat) - rep.S_hat);
      const double best = oracle::rgl_subgradient_optimum(oracle::to_eigen(inst.ensemble->A),
                                                          oracle::to_eigen(inst.M), inst.lambda, 1'000'000, 5, t);
      worst_gap = std::max(worst_gap, rep.objective - best);
      worst_feas = std::max(worst_feas, feas);
      ok += rep.converged && rep.objective <= best + 1e-6 && feas <= 1e-7;
    }
    return Verdict{ok == 50, fmt("%g/50 within oracle + 1e-6, worst gap %.3g, worst feasibility %.3g", ok,
                                 worst_gap, worst_feas)};
  });

  run(3, "exact recovery in-regime (n=256, L=4, m=128, kT=4, 2 per column)", 600.0, [] {
    int rec = 0, cert = 0;
    std::vector<std::string> names;
    std::vector<int> per_bound;
    for (int t = 0; t < 100; ++t) {
      const auto inst = make_instance(rademacher_cell(256, 128, 4, 4, 2, 30000 + t));
      const auto rep = solve_rgl(inst.M, *inst.ensemble, inst.lambda);
      rec += rep.converged && check_exact_recovery(rep, inst.Y_true, inst.S_true, 1e-3).success;
      const auto c = certify(inst, derive_seed(30000 + t, {3}));
      cert += c.all_pass;
      if (names.empty())
        for (const auto& b : c.bound_checks) names.push_back(b.name);
      per_bound.resize(names.size());
      for (std::size_t b = 0; b < names.size(); ++b) per_bound[b] += c.bound_checks[b].pass;
    }
    std::string per;
    for (std::size_t b = 0; b < names.size(); ++b) per += " " + names[b] + "=" + std::to_string(per_bound[b]);
    return Verdict{rec >= 95 && cert >= 90,
                   fmt("recovery %g/100 (need 95), certificate all-pass %g/100 (need 90)", rec, cert) + ";" + per};
  });

  run(4, "robustness separation (5% corruption, x10 magnitude)", 600.0, [] {
    int rgl_ok = 0, l21_ok = 0;
    const Index k = static_cast<Index>(std::llround(0.05 * 128));
    for (int t = 0; t < 100; ++t) {
      auto req = rademacher_cell(256, 128, 4, 4, k, 40000 + t);
      req.corruption_scale = 10.0;
      const auto inst = make_instance(req);
      const auto a = solve_rgl(inst.M, *inst.ensemble, inst.lambda);
      const auto b = solve_l21_equality(inst.M, *inst.ensemble);
      rgl_ok += a.converged && check_exact_recovery(a, inst.Y_true, inst.S_true).success;
      l21_ok += b.converged && check_exact_recovery(b, inst.Y_true, inst.S_true).success;
    }
    return Verdict{rgl_ok > 0 && l21_ok <= 0.5 * rgl_ok,
                   fmt("RGL %g/100, l2,1 equality %g/100 (need <= half of RGL)", rgl_ok, l21_ok)};
  });

  run(5, "golfing identity", 120.0, [] {
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
      const Index n = t % 2 ? 64 : 128;
      auto req = rademacher_cell(n, 256, 1 + t % 4, 1 + t % 3, t % 4, 50000 + t);
      if (t % 3 == 1) req.specs.assign(req.L, DistributionSpec::ar1(n, 0.4));
      if (t % 3 == 2) req.specs.assign(req.L, DistributionSpec::subsampled_hadamard(n));
      const auto rep = certify(make_instance(req), t);
      worst = std::max(worst, rep.identity_residual);
    }
    return Verdict{worst <= 1e-10, fmt("max ||(Q0 - Ql) - P_T U||_F = %.3g over 100 instances", worst)};
  });

  // criteria 6 and 7 share one in-budget certificate study
  std::vector<CertCellResult> study;
  run(6, "certificate pass rates in budget (n=256, m=300000, kT=1, 40 corruptions)", 900.0, [&] {
    const auto cfg = in_budget_config();
    cfg.validate();
    study = run_certificate_study(cfg);
    if (study.empty() || study[0].infeasible) return Verdict{false, "study did not run"};
    const auto& c = study[0];
    std::string per;
    for (std::size_t b = 0; b < c.bound_names.size(); ++b)
      per += " " + c.bound_names[b] + "=" + std::to_string(c.bound_pass[b]);
    const bool contraction = c.contraction_holds == c.batch_isometry_trials;
    return Verdict{c.all_pass >= 90 && contraction,
                   fmt("all-pass %g/100, contraction %g/%g", c.all_pass, c.contraction_holds,
                       c.batch_isometry_trials) + ";" + per};
  });

  run(7, "concentration checks in budget", 600.0, [&] {
    if (study.empty() || study[0].infeasible) return Verdict{false, "study did not run"};
    const auto& c = study[0];
    return Verdict{c.isometry_pass >= 95 && c.off_support_pass >= 95,
                   fmt("near isometry %g/100, off-support %g/100 (need 95 each)", c.isometry_pass,
                       c.off_support_pass)};
  });

  run(8, "determinism", 600.0, [] {
    ExperimentConfig c;
    c.n = 64;
    c.m = 32;
    c.L = 4;
    c.trials = 8;
    c.seed = 99;
    c.k_T_values = {1, 2, 4};
    c.corruption_counts = {0, 1, 2};
    const auto base = fs::temp_directory_path() / "rgl_acceptance_det";
    fs::remove_all(base);
    auto go = [&](const std::string& name, int threads) {
      RunOptions r;
      r.out_dir = base / name;
      r.threads = threads;
      return run_phase_transition(c, r);
    };
    auto slurp = [](const fs::path& p) {
      std::ifstream in(p, std::ios::binary);
      std::stringstream ss;
      ss << in.rdbuf();
      return ss.str();
    };
    const auto a = go("a", 1);
    go("b", 1);
    const auto m = go("m", 4);
    const bool bytes = slurp(base / "a" / "phase.csv") == slurp(base / "b" / "phase.csv");
    bool agg = a.size() == m.size();
    for (std::size_t k = 0; agg && k < a.size(); ++k)
      agg = a[k].successes == m[k].successes && a[k].solver_failures == m[k].solver_failures &&
            a[k].mean_rel_err_Y == m[k].mean_rel_err_Y && a[k].mean_rel_err_S == m[k].mean_rel_err_S &&
            a[k].mean_iterations == m[k].mean_iterations && a[k].worst_seed == m[k].worst_seed;
    fs::remove_all(base);
    return Verdict{bytes && agg, std::string("single-thread CSV ") + (bytes ? "identical" : "differs") +
                                     ", 4-thread aggregates " + (agg ? "identical" : "differ")};
  });

  run(9, "duality cross-check", 600.0, [] {
    int certified = 0, recovered = 0;
    for (int t = 0; t < 300; ++t) {
      InstanceRequest r;
      r.n = 8;
      r.m = 8;
      r.L = 2;
      r.k_T = 1;
      r.k_per_column = {Index(t % 2), 1};
      r.specs.assign(2, DistributionSpec::isotropic_gaussian(8));
      r.seed = 90000 + t;
      const auto inst = make_instance(r);
      const auto V = row_normalized_truth(inst.Y_true, inst.supports);
      const auto W = oracle::from_eigen(oracle::least_norm_dual(oracle::to_eigen(inst.ensemble->A),
                                                                ints(inst.supports.row_support),
                                                                oracle::to_eigen(inst.S_true),
                                                                oracle::to_eigen(V), inst.lambda));
      if (!all_pass(verify_exact_dual(W, *inst.ensemble, inst.supports, V, sign_matrix(inst.S_true), inst.lambda)))
        continue;
      ++certified;
      const auto rep = solve_rgl(inst.M, *inst.ensemble, inst.lambda);
      recovered += rep.converged && check_exact_recovery(rep, inst.Y_true, inst.S_true, 1e-5).success;
    }
    return Verdict{certified > 0 && recovered == certified,
                   fmt("%g of %g certified instances recovered to 1e-5 (300 drawn)", recovered, certified)};
  });

  std::printf("%s: %d criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
