#include "rgl/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <type_traits>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "rgl/io.hpp"
#include "rgl/kernels.hpp"
#include "rgl/linalg.hpp"
#include "rgl/rng.hpp"

namespace rgl {

namespace {

namespace pt = boost::property_tree;

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(text);
  while (std::getline(is, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

template <class T>
std::vector<T> parse_list(const std::string& text, const std::string& key) {
  std::vector<T> out;
  for (const auto& s : split_list(text)) {
    try {
      std::size_t used = 0;
      if constexpr (std::is_floating_point_v<T>) {
        out.push_back(std::stod(s, &used));
      } else {
        if (!s.empty() && s.front() == '-') throw std::invalid_argument("negative");
        out.push_back(static_cast<T>(std::stoull(s, &used)));
      }
      if (used != s.size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw ValidationError("config: bad value '" + s + "' in " + key);
    }
  }
  return out;
}

bool parse_bool(const std::string& s, const std::string& key) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ValidationError("config: " + key + " must be a boolean");
}

template <class T>
T get(const pt::ptree& tree, const std::string& key, T fallback) {
  const auto raw = tree.get_optional<std::string>(key);
  if (!raw) return fallback;
  if constexpr (std::is_unsigned_v<T>) {
    if (raw->find('-') != std::string::npos) throw ValidationError("config: " + key + " must be non-negative");
  }
  try {
    return tree.get<T>(key);
  } catch (const pt::ptree_bad_data&) {
    throw ValidationError("config: bad value for " + key);
  }
}

ExperimentConfig from_tree(const pt::ptree& tree) {
  static const std::vector<std::string> known_sections{"experiment", "problem", "grid", "solver"};
  for (const auto& [section, _] : tree) {
    if (std::find(known_sections.begin(), known_sections.end(), section) == known_sections.end()) {
      throw ValidationError("config: unknown section [" + section + "]");
    }
  }
  ExperimentConfig c;
  c.mode = experiment_mode_from_string(get<std::string>(tree, "experiment.mode", to_string(c.mode)));
  c.seed = get<std::uint64_t>(tree, "experiment.seed", c.seed);
  c.trials = get<Index>(tree, "experiment.trials", c.trials);
  c.threads = get<int>(tree, "experiment.threads", c.threads);

  c.n = get<Index>(tree, "problem.n", c.n);
  c.m = get<Index>(tree, "problem.m", c.m);
  c.L = get<Index>(tree, "problem.L", c.L);
  c.distribution = get<std::string>(tree, "problem.distribution", c.distribution);
  c.ar1_rho = get<double>(tree, "problem.ar1_rho", c.ar1_rho);
  const auto mag = get<std::string>(tree, "problem.magnitude", "unit");
  if (mag == "unit") {
    c.magnitude = MagnitudeModel::unit();
  } else if (mag == "loguniform") {
    c.magnitude = MagnitudeModel::loguniform(get<double>(tree, "problem.magnitude_low", 0.1),
                                             get<double>(tree, "problem.magnitude_high", 10.0));
  } else {
    throw ValidationError("config: problem.magnitude must be unit or loguniform");
  }
  c.corruption_scale = get<double>(tree, "problem.corruption_scale", c.corruption_scale);
  c.lambda = get<double>(tree, "problem.lambda", c.lambda);
  c.in_budget = parse_bool(get<std::string>(tree, "problem.in_budget", "false"), "problem.in_budget");

  if (auto v = tree.get_optional<std::string>("grid.kT")) c.k_T_values = parse_list<Index>(*v, "grid.kT");
  if (auto v = tree.get_optional<std::string>("grid.corruption_fraction")) {
    c.corruption_fractions = parse_list<double>(*v, "grid.corruption_fraction");
  }
  if (auto v = tree.get_optional<std::string>("grid.corruptions_per_column")) {
    c.corruption_counts = parse_list<Index>(*v, "grid.corruptions_per_column");
  }
  if (auto v = tree.get_optional<std::string>("grid.lambda_scale")) {
    c.lambda_scales = parse_list<double>(*v, "grid.lambda_scale");
  }

  c.solver.rho = get<double>(tree, "solver.rho", c.solver.rho);
  c.solver.max_iters = get<int>(tree, "solver.max_iters", c.solver.max_iters);
  c.solver.tol_primal = get<double>(tree, "solver.tol_primal", c.solver.tol_primal);
  c.solver.tol_dual = get<double>(tree, "solver.tol_dual", c.solver.tol_dual);
  c.solver.over_relaxation = get<double>(tree, "solver.over_relaxation", c.solver.over_relaxation);
  c.solver.adaptive_rho = parse_bool(
      get<std::string>(tree, "solver.adaptive_rho", c.solver.adaptive_rho ? "true" : "false"),
      "solver.adaptive_rho");
  c.gamma = get<double>(tree, "solver.gamma", c.gamma);
  c.rel_tol = get<double>(tree, "solver.rel_tol", c.rel_tol);
  c.validate();
  return c;
}

template <class F>
void run_pool(Index count, int threads, F&& body) {
  std::exception_ptr error;
  const long total = static_cast<long>(count);
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (long k = 0; k < total; ++k) {
    try {
      body(static_cast<Index>(k));
    } catch (...) {
#pragma omp critical(rgl_pool_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

int thread_count(const ExperimentConfig& c, const RunOptions& run) {
  const int t = run.threads.value_or(c.threads);
  if (t < 1) throw ValidationError("threads must be >= 1");
  return t;
}

TrialOutcome judge(const SolverReport& rep, const ProblemInstance& inst, double rel_tol) {
  const auto rc = check_exact_recovery(rep, inst.Y_true, inst.S_true, rel_tol);
  TrialOutcome o;
  o.seed = inst.seed;
  o.converged = rep.converged;
  o.success = rep.converged && rc.success;
  o.rel_err_Y = rc.rel_err_Y;
  o.rel_err_S = rc.rel_err_S;
  o.iterations = rep.iterations;
  return o;
}

nlohmann::json config_json(const ExperimentConfig& c, int threads) {
  nlohmann::json mag = c.magnitude.kind == MagnitudeModel::Kind::unit
                           ? nlohmann::json{{"kind", "unit"}}
                           : nlohmann::json{{"kind", "loguniform"},
                                            {"low", c.magnitude.low},
                                            {"high", c.magnitude.high}};
  return {
      {"mode", to_string(c.mode)},
      {"seed", c.seed},
      {"trials", c.trials},
      {"threads", threads},
      {"rng", kRngAlgorithm},
      {"n", c.n},
      {"m", c.m},
      {"L", c.L},
      {"distribution", c.distribution},
      {"ar1_rho", c.ar1_rho},
      {"magnitude", mag},
      {"corruption_scale", c.corruption_scale},
      {"lambda", c.lambda_for()},
      {"in_budget", c.in_budget},
      {"kT", c.k_T_values},
      {"corruption_fraction", c.corruption_fractions},
      {"corruptions_per_column", c.corruption_counts},
      {"lambda_scale", c.lambda_scales},
      {"solver",
       {{"rho", c.solver.rho},
        {"max_iters", c.solver.max_iters},
        {"tol_primal", c.solver.tol_primal},
        {"tol_dual", c.solver.tol_dual},
        {"over_relaxation", c.solver.over_relaxation},
        {"adaptive_rho", c.solver.adaptive_rho},
        {"gamma", c.gamma},
        {"rel_tol", c.rel_tol}}},
      {"empirical_thresholds",
       "success criteria and pass-rate targets are calibrated at desk scale, not derived "
       "from the recovery theorem's constants"},
  };
}

void write_run_json(const std::filesystem::path& dir, const ExperimentConfig& c, int threads) {
  std::ofstream(dir / "run.json") << config_json(c, threads).dump(2) << '\n';
}

void dump_failure(const RunOptions& run, Index cell, const ProblemInstance& inst,
                  const std::string& tag) {
  if (!run.dump_failures || !run.out_dir) return;
  const auto dir = *run.out_dir / "failures" /
                   ("cell" + std::to_string(cell) + "_" + tag + "_seed" + std::to_string(inst.seed));
  std::filesystem::create_directories(dir);
  save_bundle(dir, inst);
}

std::string fmt(double v) { return io::format_sig(v, 12); }

void write_cell_row(std::ostream& os, const CellResult& c) {
  os << c.mode << ',' << c.n << ',' << c.m << ',' << c.L << ',' << c.k_T << ',' << c.k_omega << ','
     << c.k_max << ',' << fmt(c.lambda) << ',' << c.trials << ',' << c.successes << ','
     << c.solver_failures << ',' << fmt(c.mean_rel_err_Y) << ',' << fmt(c.mean_rel_err_S) << ','
     << fmt(c.mean_iterations) << ',' << c.base_seed << '\n';
}

CellResult cell_header(const ExperimentConfig& c, const GridCell& g, std::uint64_t base,
                       double lambda) {
  CellResult r;
  r.mode = to_string(c.mode);
  r.n = c.n;
  r.m = c.m;
  r.L = c.L;
  r.k_T = g.k_T;
  r.k_omega = g.k_per_column * c.L;
  r.k_max = g.k_per_column;
  r.lambda = lambda;
  r.base_seed = base;
  return r;
}

void merge_into(CellResult& dst, const CellResult& agg) {
  dst.trials = agg.trials;
  dst.successes = agg.successes;
  dst.solver_failures = agg.solver_failures;
  dst.mean_rel_err_Y = agg.mean_rel_err_Y;
  dst.mean_rel_err_S = agg.mean_rel_err_S;
  dst.mean_iterations = agg.mean_iterations;
  dst.worst_seed = agg.worst_seed;
  dst.worst_rel_err_Y = agg.worst_rel_err_Y;
}

}  // namespace

std::string to_string(ExperimentMode mode) {
  switch (mode) {
    case ExperimentMode::phase_transition: return "phase_transition";
    case ExperimentMode::theorem_regime: return "theorem_regime";
    case ExperimentMode::certificate_study: return "certificate_study";
    case ExperimentMode::baseline_compare: return "baseline_compare";
  }
  return "unknown";
}

ExperimentMode experiment_mode_from_string(const std::string& name) {
  if (name == "phase_transition" || name == "phase") return ExperimentMode::phase_transition;
  if (name == "theorem_regime") return ExperimentMode::theorem_regime;
  if (name == "certificate_study" || name == "cert") return ExperimentMode::certificate_study;
  if (name == "baseline_compare" || name == "compare") return ExperimentMode::baseline_compare;
  throw ValidationError("unknown experiment mode '" + name + "'");
}

ExperimentConfig ExperimentConfig::from_ini(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ValidationError("config: cannot open " + path.string());
  pt::ptree tree;
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  return from_tree(tree);
}

ExperimentConfig ExperimentConfig::from_ini_string(const std::string& text) {
  std::istringstream is(text);
  pt::ptree tree;
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  return from_tree(tree);
}

void ExperimentConfig::validate() const {
  if (trials < 1) throw ValidationError("config: trials must be >= 1");
  if (threads < 1) throw ValidationError("config: threads must be >= 1");
  if (n < 2 || m < 1 || L < 1) throw ValidationError("config: need n >= 2, m >= 1, L >= 1");
  if (k_T_values.empty()) throw ValidationError("config: grid.kT is empty");
  if (corruption_counts.empty() && corruption_fractions.empty()) {
    throw ValidationError("config: corruption grid is empty");
  }
  for (Index k : k_T_values)
    if (k > n) throw ValidationError("config: kT exceeds n");
  for (double f : corruption_fractions)
    if (!(f >= 0.0 && f <= 1.0)) throw ValidationError("config: corruption fractions lie in [0, 1]");
  for (Index k : corruption_counts)
    if (k > m) throw ValidationError("config: corruptions per column exceed m");
  if (lambda_scales.empty()) throw ValidationError("config: grid.lambda_scale is empty");
  for (double s : lambda_scales)
    if (!(s > 0.0)) throw ValidationError("config: lambda scales must be positive");
  if (!(corruption_scale > 0.0)) throw ValidationError("config: corruption_scale must be positive");
  if (!(gamma > 0.0)) throw ValidationError("config: gamma must be positive");
  if (!(rel_tol > 0.0)) throw ValidationError("config: rel_tol must be positive");
  solver.validate();
  for (const auto& s : specs()) s.validate();
  if (mode == ExperimentMode::certificate_study) {
    const auto kind = distribution_kind_from_string(distribution);
    if (kind != DistributionKind::rademacher_rows &&
        kind != DistributionKind::subsampled_orthonormal) {
      throw ValidationError("config: certificate_study needs a bounded family (rademacher or hadamard)");
    }
  }
}

std::vector<GridCell> ExperimentConfig::cells() const {
  std::vector<GridCell> out;
  for (Index k : k_T_values) {
    if (!corruption_counts.empty()) {
      for (Index c : corruption_counts)
        out.push_back({k, c, static_cast<double>(c) / static_cast<double>(m)});
    } else {
      for (double f : corruption_fractions)
        out.push_back({k, static_cast<Index>(std::llround(f * static_cast<double>(m))), f});
    }
  }
  return out;
}

std::vector<DistributionSpec> ExperimentConfig::specs() const {
  DistributionSpec s;
  if (distribution == "ar1") {
    s = DistributionSpec::ar1(n, ar1_rho);
  } else {
    switch (distribution_kind_from_string(distribution)) {
      case DistributionKind::isotropic_gaussian: s = DistributionSpec::isotropic_gaussian(n); break;
      case DistributionKind::rademacher_rows: s = DistributionSpec::rademacher(n); break;
      case DistributionKind::subsampled_orthonormal: s = DistributionSpec::subsampled_hadamard(n); break;
      case DistributionKind::correlated_gaussian: s = DistributionSpec::ar1(n, ar1_rho); break;
    }
  }
  return std::vector<DistributionSpec>(L, s);
}

InstanceMode ExperimentConfig::instance_mode() const {
  return mode == ExperimentMode::theorem_regime || in_budget ? InstanceMode::theorem_regime
                                                             : InstanceMode::free;
}

double ExperimentConfig::lambda_for(double scale) const {
  return (lambda > 0.0 ? lambda : default_lambda(n)) * scale;
}

std::uint64_t ExperimentConfig::cell_seed(Index index) const {
  return derive_seed(seed, {0xCE11u, index});
}

InstanceRequest ExperimentConfig::request(const GridCell& cell, std::uint64_t trial_seed) const {
  InstanceRequest r;
  r.n = n;
  r.m = m;
  r.L = L;
  r.k_T = cell.k_T;
  r.k_per_column.assign(L, cell.k_per_column);
  r.specs = specs();
  r.magnitude = magnitude;
  r.mode = instance_mode();
  r.lambda = lambda_for();
  r.corruption_scale = corruption_scale;
  r.seed = trial_seed;
  return r;
}

CellResult aggregate(std::vector<TrialOutcome> outcomes) {
  CellResult r;
  r.trials = outcomes.size();
  std::vector<double> ey, es, it;
  for (const auto& o : outcomes) {
    if (o.success) ++r.successes;
    if (!o.converged) ++r.solver_failures;
    ey.push_back(o.rel_err_Y);
    es.push_back(o.rel_err_S);
    it.push_back(static_cast<double>(o.iterations));
    if (!o.success && (!r.worst_seed || o.rel_err_Y > r.worst_rel_err_Y)) {
      r.worst_seed = o.seed;
      r.worst_rel_err_Y = o.rel_err_Y;
    }
  }
  if (r.trials > 0) {
    const double t = static_cast<double>(r.trials);
    r.mean_rel_err_Y = order_invariant_sum(std::move(ey)) / t;
    r.mean_rel_err_S = order_invariant_sum(std::move(es)) / t;
    r.mean_iterations = order_invariant_sum(std::move(it)) / t;
  }
  return r;
}

void write_phase_csv(std::ostream& os, const std::vector<CellResult>& cells) {
  os << kPhaseHeader << '\n';
  for (const auto& c : cells) write_cell_row(os, c);
}

void write_phase_dat(std::ostream& os, const std::vector<CellResult>& cells) {
  os << "# kT kmax corruption_fraction success_rate mean_relerr_Y\n";
  for (Index k = 0; k < cells.size(); ++k) {
    const auto& c = cells[k];
    if (k > 0 && cells[k - 1].k_T != c.k_T) os << '\n';
    os << c.k_T << ' ' << c.k_max << ' ' << fmt(double(c.k_max) / double(c.m)) << ' '
       << fmt(c.success_rate()) << ' ' << fmt(c.mean_rel_err_Y) << '\n';
  }
}

void write_worst_failures(std::ostream& os, const std::vector<CellResult>& cells) {
  os << "mode,program,lambda_scale,kT,kOmega,kmax,base_seed,worst_trial_seed,worst_relerr_Y\n";
  for (const auto& c : cells) {
    if (!c.worst_seed) continue;
    os << c.mode << ',' << c.program << ',' << fmt(c.lambda_scale) << ',' << c.k_T << ','
       << c.k_omega << ',' << c.k_max << ',' << c.base_seed << ',' << *c.worst_seed << ','
       << fmt(c.worst_rel_err_Y) << '\n';
  }
}

std::vector<CellResult> run_phase_transition(const ExperimentConfig& config, const RunOptions& run) {
  config.validate();
  const int threads = thread_count(config, run);
  const auto cells = config.cells();
  const Index T = config.trials;
  std::vector<TrialOutcome> slots(cells.size() * T);
  run_pool(slots.size(), threads, [&](Index k) {
    const Index ci = k / T;
    const std::uint64_t seed = config.cell_seed(ci) + (k % T);
    const auto inst = make_instance(config.request(cells[ci], seed));
    const auto rep = solve_rgl(inst.M, *inst.ensemble, inst.lambda, config.solver);
    slots[k] = judge(rep, inst, config.rel_tol);
    if (!slots[k].success) dump_failure(run, ci, inst, "rgl");
  });
  std::vector<CellResult> out;
  for (Index ci = 0; ci < cells.size(); ++ci) {
    CellResult r = cell_header(config, cells[ci], config.cell_seed(ci), config.lambda_for());
    merge_into(r, aggregate({slots.begin() + ci * T, slots.begin() + (ci + 1) * T}));
    out.push_back(std::move(r));
  }
  if (run.out_dir) {
    std::filesystem::create_directories(*run.out_dir);
    std::ofstream csv(*run.out_dir / "phase.csv");
    write_phase_csv(csv, out);
    std::ofstream dat(*run.out_dir / "phase.dat");
    write_phase_dat(dat, out);
    std::ofstream worst(*run.out_dir / "worst_failures.csv");
    write_worst_failures(worst, out);
    write_run_json(*run.out_dir, config, threads);
  }
  return out;
}

namespace {

struct CertTrial {
  bool infeasible = false;
  std::string reason;
  CertificateReport report;
  bool iso = false, iso_strong = false, iso_sigma = false, off = false;
};

}  // namespace

std::vector<CertCellResult> run_certificate_study(const ExperimentConfig& config,
                                                  const RunOptions& run) {
  config.validate();
  if (config.mode != ExperimentMode::certificate_study) {
    // still allowed; the bounded-family rule applies either way
    const auto kind = distribution_kind_from_string(config.distribution);
    if (kind != DistributionKind::rademacher_rows &&
        kind != DistributionKind::subsampled_orthonormal) {
      throw ValidationError("certificate study needs a bounded family (rademacher or hadamard)");
    }
  }
  const int threads = thread_count(config, run);
  const auto cells = config.cells();
  const Index T = config.trials;
  std::vector<CertTrial> slots(cells.size() * T);
  run_pool(slots.size(), threads, [&](Index k) {
    const Index ci = k / T;
    const std::uint64_t seed = config.cell_seed(ci) + (k % T);
    const auto inst = make_instance(config.request(cells[ci], seed));
    CertTrial& tr = slots[k];
    try {
      tr.report = certify(inst, derive_seed(seed, {3}));
    } catch (const ValidationError& e) {
      if (std::string(e.what()).find("make_plan") == std::string::npos) throw;
      tr.infeasible = true;
      tr.reason = e.what();
      return;
    }
    const auto& ens = *inst.ensemble;
    const auto iso = near_isometry_check(ens, inst.supports, IsometryForm::identity_form);
    tr.iso = iso.pass;
    tr.iso_strong = iso.strong_pass;
    tr.iso_sigma = near_isometry_check(ens, inst.supports, IsometryForm::sigma_inverse_form).pass;
    tr.off = off_support_check(ens, inst.supports).pass;
    if (!tr.report.all_pass) dump_failure(run, ci, inst, "cert");
  });

  std::vector<CertCellResult> out;
  for (Index ci = 0; ci < cells.size(); ++ci) {
    CertCellResult r;
    r.n = config.n;
    r.m = config.m;
    r.L = config.L;
    r.k_T = cells[ci].k_T;
    r.k_max = cells[ci].k_per_column;
    r.k_omega = r.k_max * config.L;
    r.lambda = config.lambda_for();
    r.trials = T;
    r.base_seed = config.cell_seed(ci);
    for (Index t = 0; t < T; ++t) {
      const auto& tr = slots[ci * T + t];
      if (tr.infeasible) {
        r.infeasible = true;
        r.infeasible_reason = tr.reason;
        continue;
      }
      const auto& rep = tr.report;
      if (r.bound_names.empty()) {
        for (const auto& c : rep.bound_checks) r.bound_names.push_back(c.name);
        r.bound_pass.assign(r.bound_names.size(), 0);
      }
      for (Index b = 0; b < rep.bound_checks.size(); ++b) r.bound_pass[b] += rep.bound_checks[b].pass;
      r.all_pass += rep.all_pass;
      r.exact_dual_pass += all_pass(rep.exact_dual);
      r.inexact_dual_pass += !rep.inexact_dual.empty() && all_pass(rep.inexact_dual);
      r.isometry_pass += tr.iso;
      r.isometry_strong_pass += tr.iso_strong;
      r.sigma_isometry_pass += tr.iso_sigma;
      r.off_support_pass += tr.off;
      const bool iso_all = std::all_of(rep.batch_isometry.begin(), rep.batch_isometry.end(),
                                       [](bool b) { return b; });
      if (iso_all) {
        ++r.batch_isometry_trials;
        r.contraction_holds += rep.contraction_implication;
      }
      r.max_identity_residual = std::max(r.max_identity_residual, rep.identity_residual);
      r.q0_within += rep.q0_norm <= 9.0 / 8.0 * std::sqrt(static_cast<double>(r.k_T));
      r.ratios.push_back(rep.contraction_ratios);
      r.batch_iso.push_back(rep.batch_isometry);
    }
    out.push_back(std::move(r));
  }
  if (run.out_dir) {
    std::filesystem::create_directories(*run.out_dir);
    std::ofstream csv(*run.out_dir / "certificate.csv");
    write_certificate_csv(csv, out);
    std::ofstream con(*run.out_dir / "contraction.csv");
    con << "kT,kOmega,kmax,trial,j,ratio,target,batch_isometry\n";
    const double ln = std::log(static_cast<double>(config.n));
    for (const auto& r : out)
      for (Index t = 0; t < r.ratios.size(); ++t)
        for (Index j = 0; j < r.ratios[t].size(); ++j) {
          const double target = j < 2 ? 1.0 / (2.0 * std::sqrt(ln)) : 0.5;
          con << r.k_T << ',' << r.k_omega << ',' << r.k_max << ',' << t << ',' << j + 1 << ','
              << fmt(r.ratios[t][j]) << ',' << fmt(target) << ',' << (r.batch_iso[t][j] ? 1 : 0)
              << '\n';
        }
    write_run_json(*run.out_dir, config, threads);
  }
  return out;
}

void write_certificate_csv(std::ostream& os, const std::vector<CertCellResult>& cells) {
  os << "mode,n,m,L,kT,kOmega,kmax,lambda,trials,infeasible,all_pass,bound_sign_leak,"
        "bound_support_residual,bound_U_off_support,bound_W_linf,exact_dual,inexact_dual,"
        "isometry,isometry_strong,isometry_sigma,off_support,batch_isometry_trials,"
        "contraction_holds,q0_within,max_identity_residual,base_seed\n";
  for (const auto& c : cells) {
    os << "certificate_study," << c.n << ',' << c.m << ',' << c.L << ',' << c.k_T << ','
       << c.k_omega << ',' << c.k_max << ',' << fmt(c.lambda) << ',' << c.trials << ','
       << (c.infeasible ? 1 : 0) << ',' << c.all_pass;
    for (Index b = 0; b < 4; ++b) os << ',' << (b < c.bound_pass.size() ? c.bound_pass[b] : 0);
    os << ',' << c.exact_dual_pass << ',' << c.inexact_dual_pass << ',' << c.isometry_pass << ','
       << c.isometry_strong_pass << ',' << c.sigma_isometry_pass << ',' << c.off_support_pass
       << ',' << c.batch_isometry_trials << ',' << c.contraction_holds << ',' << c.q0_within << ','
       << fmt(c.max_identity_residual) << ',' << c.base_seed << '\n';
  }
}

CompareResult run_baseline_compare(const ExperimentConfig& config, const RunOptions& run) {
  config.validate();
  const int threads = thread_count(config, run);
  const auto cells = config.cells();
  const Index T = config.trials;
  const Index S = config.lambda_scales.size();
  CompareResult res;
  res.pairs.resize(cells.size() * T);
  run_pool(res.pairs.size(), threads, [&](Index k) {
    const Index ci = k / T;
    const std::uint64_t seed = config.cell_seed(ci) + (k % T);
    const auto inst = make_instance(config.request(cells[ci], seed));
    PairedTrial& p = res.pairs[k];
    p.cell = ci;
    p.seed = seed;
    for (double scale : config.lambda_scales) {
      const auto rep = solve_rgl(inst.M, *inst.ensemble, config.lambda_for(scale), config.solver);
      p.rgl.push_back(judge(rep, inst, config.rel_tol));
    }
    p.l21 = judge(solve_l21_equality(inst.M, *inst.ensemble, config.solver), inst, config.rel_tol);
    p.group_lasso = judge(solve_group_lasso(inst.M, *inst.ensemble, config.gamma, config.solver),
                          inst, config.rel_tol);
    if (!p.rgl.empty() && !p.rgl.front().success) dump_failure(run, ci, inst, "rgl");
  });

  for (Index ci = 0; ci < cells.size(); ++ci) {
    const auto base = config.cell_seed(ci);
    auto collect = [&](auto pick) {
      std::vector<TrialOutcome> v;
      for (Index t = 0; t < T; ++t) v.push_back(pick(res.pairs[ci * T + t]));
      return aggregate(std::move(v));
    };
    for (Index s = 0; s < S; ++s) {
      CellResult r = cell_header(config, cells[ci], base, config.lambda_for(config.lambda_scales[s]));
      r.program = "rgl";
      r.lambda_scale = config.lambda_scales[s];
      merge_into(r, collect([s](const PairedTrial& p) { return p.rgl[s]; }));
      res.summary.push_back(std::move(r));
    }
    CellResult l21 = cell_header(config, cells[ci], base, 0.0);
    l21.program = "l21_equality";
    l21.lambda_scale = 0.0;
    merge_into(l21, collect([](const PairedTrial& p) { return p.l21; }));
    res.summary.push_back(std::move(l21));
    CellResult gl = cell_header(config, cells[ci], base, 0.0);
    gl.program = "group_lasso";
    gl.lambda_scale = 0.0;
    merge_into(gl, collect([](const PairedTrial& p) { return p.group_lasso; }));
    res.summary.push_back(std::move(gl));
  }

  if (run.out_dir) {
    std::filesystem::create_directories(*run.out_dir);
    std::ofstream sum(*run.out_dir / "compare_summary.csv");
    sum << "program,lambda_scale," << kPhaseHeader << '\n';
    for (const auto& r : res.summary) {
      sum << r.program << ',' << fmt(r.lambda_scale) << ',';
      write_cell_row(sum, r);
    }
    std::ofstream pairs(*run.out_dir / "compare_pairs.csv");
    pairs << "cell,kT,kmax,seed,program,lambda_scale,success,converged,relerr_Y,relerr_S,iters\n";
    auto row = [&](const PairedTrial& p, const std::string& prog, double scale,
                   const TrialOutcome& o) {
      pairs << p.cell << ',' << cells[p.cell].k_T << ',' << cells[p.cell].k_per_column << ','
            << p.seed << ',' << prog << ',' << fmt(scale) << ',' << (o.success ? 1 : 0) << ','
            << (o.converged ? 1 : 0) << ',' << fmt(o.rel_err_Y) << ',' << fmt(o.rel_err_S) << ','
            << o.iterations << '\n';
    };
    for (const auto& p : res.pairs) {
      for (Index s = 0; s < S; ++s) row(p, "rgl", config.lambda_scales[s], p.rgl[s]);
      row(p, "l21_equality", 0.0, p.l21);
      row(p, "group_lasso", 0.0, p.group_lasso);
    }
    std::ofstream worst(*run.out_dir / "worst_failures.csv");
    write_worst_failures(worst, res.summary);
    write_run_json(*run.out_dir, config, threads);
  }
  return res;
}

}  // namespace rgl
