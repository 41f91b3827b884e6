#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rgl/certificate.hpp"
#include "rgl/instance.hpp"
#include "rgl/solver.hpp"

namespace rgl {

enum class ExperimentMode { phase_transition, theorem_regime, certificate_study, baseline_compare };

std::string to_string(ExperimentMode mode);
ExperimentMode experiment_mode_from_string(const std::string& name);

/// One grid point: k_T and the per-column corruption count.
struct GridCell {
  Index k_T = 0;
  Index k_per_column = 0;
  double fraction = 0.0;  // k_per_column / m as requested
};

struct ExperimentConfig {
  ExperimentMode mode = ExperimentMode::phase_transition;
  std::uint64_t seed = 1;
  Index trials = 10;
  int threads = 1;

  Index n = 64;
  Index m = 32;
  Index L = 4;
  std::string distribution = "rademacher";
  double ar1_rho = 0.5;
  MagnitudeModel magnitude;
  double corruption_scale = 1.0;
  double lambda = 0.0;  // <= 0: 1/sqrt(log n)
  bool in_budget = false;  // theorem-regime instances outside the theorem_regime mode

  std::vector<Index> k_T_values{1};
  /// Exactly one of the two corruption axes is used; counts win when set.
  std::vector<double> corruption_fractions{0.0};
  std::vector<Index> corruption_counts;
  std::vector<double> lambda_scales{1.0};

  SolverOptions solver;
  double gamma = 1e4;  // group-lasso weight
  double rel_tol = 1e-3;

  /// Sections [experiment], [problem], [grid], [solver]; see configs/.
  static ExperimentConfig from_ini(const std::filesystem::path& path);
  static ExperimentConfig from_ini_string(const std::string& text);

  void validate() const;
  std::vector<GridCell> cells() const;
  std::vector<DistributionSpec> specs() const;
  InstanceMode instance_mode() const;
  double lambda_for(double scale = 1.0) const;
  /// Base seed of cell `index`; trial t uses base + t.
  std::uint64_t cell_seed(Index index) const;
  InstanceRequest request(const GridCell& cell, std::uint64_t trial_seed) const;
};

struct TrialOutcome {
  std::uint64_t seed = 0;
  bool success = false;
  bool converged = false;
  double rel_err_Y = 0.0;
  double rel_err_S = 0.0;
  int iterations = 0;
};

struct CellResult {
  std::string mode;
  std::string program = "rgl";
  double lambda_scale = 1.0;
  Index n = 0, m = 0, L = 0;
  Index k_T = 0, k_omega = 0, k_max = 0;
  double lambda = 0.0;
  Index trials = 0;
  Index successes = 0;
  Index solver_failures = 0;
  double mean_rel_err_Y = 0.0;
  double mean_rel_err_S = 0.0;
  double mean_iterations = 0.0;
  std::uint64_t base_seed = 0;
  std::optional<std::uint64_t> worst_seed;  // failing trial with the largest Y error
  double worst_rel_err_Y = 0.0;

  double success_rate() const { return trials ? double(successes) / double(trials) : 0.0; }
};

/// Merges per-trial outcomes in trial order.
CellResult aggregate(std::vector<TrialOutcome> outcomes);

struct RunOptions {
  std::optional<std::filesystem::path> out_dir;
  bool dump_failures = false;
  std::optional<int> threads;  // overrides the config
};

inline const char* const kPhaseHeader =
    "mode,n,m,L,kT,kOmega,kmax,lambda,trials,successes,solver_failures,mean_relerr_Y,"
    "mean_relerr_S,mean_iters,base_seed";

void write_phase_csv(std::ostream& os, const std::vector<CellResult>& cells);
void write_phase_dat(std::ostream& os, const std::vector<CellResult>& cells);
void write_worst_failures(std::ostream& os, const std::vector<CellResult>& cells);

/// Phase-transition and theorem-regime sweeps (the config mode decides the
/// instance mode). Writes phase.csv, phase.dat, worst_failures.csv, run.json.
std::vector<CellResult> run_phase_transition(const ExperimentConfig& config,
                                             const RunOptions& run = {});

struct CertCellResult {
  Index n = 0, m = 0, L = 0;
  Index k_T = 0, k_omega = 0, k_max = 0;
  double lambda = 0.0;
  Index trials = 0;
  bool infeasible = false;
  std::string infeasible_reason;
  Index all_pass = 0;
  std::vector<std::string> bound_names;
  std::vector<Index> bound_pass;
  Index exact_dual_pass = 0;
  Index inexact_dual_pass = 0;
  Index isometry_pass = 0;
  Index isometry_strong_pass = 0;
  Index sigma_isometry_pass = 0;
  Index off_support_pass = 0;
  Index batch_isometry_trials = 0;  // trials where every batch check held
  Index contraction_holds = 0;      // ... and the contraction chain held too
  double max_identity_residual = 0.0;
  Index q0_within = 0;  // ||Q_0||_F <= (9/8) sqrt(k_T)
  std::uint64_t base_seed = 0;
  /// ratios[t][j] and the matching per-batch isometry verdicts.
  std::vector<std::vector<double>> ratios;
  std::vector<std::vector<bool>> batch_iso;
};

/// Golfing plus every verifier per trial. Writes certificate.csv,
/// contraction.csv and run.json.
std::vector<CertCellResult> run_certificate_study(const ExperimentConfig& config,
                                                  const RunOptions& run = {});
void write_certificate_csv(std::ostream& os, const std::vector<CertCellResult>& cells);

struct PairedTrial {
  Index cell = 0;
  std::uint64_t seed = 0;
  std::vector<TrialOutcome> rgl;  // one per lambda scale
  TrialOutcome l21;
  TrialOutcome group_lasso;
};

struct CompareResult {
  std::vector<CellResult> summary;  // one row per (cell, program, lambda scale)
  std::vector<PairedTrial> pairs;
};

/// RGL at each lambda scale against the two baselines on identical instances.
/// Writes compare_pairs.csv, compare_summary.csv and run.json.
CompareResult run_baseline_compare(const ExperimentConfig& config, const RunOptions& run = {});

}  // namespace rgl
