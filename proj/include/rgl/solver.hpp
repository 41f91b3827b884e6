#pragma once

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "rgl/ensemble.hpp"
#include "rgl/linalg.hpp"
#include "rgl/matrix.hpp"

namespace rgl {

struct SolverOptions {
  double rho = 1.0;
  int max_iters = 50'000;
  double tol_primal = 1e-7;
  double tol_dual = 1e-7;
  double over_relaxation = 1.6;  // in [1, 1.8]
  bool adaptive_rho = true;      // residual balancing
  double balance_ratio = 10.0;
  double balance_factor = 2.0;
  bool record_history = false;

  void validate() const;
};

struct SolverReport {
  std::string program;
  RealMatrix Y_hat;
  RealMatrix S_hat;  // corruption estimate (or residual N for group lasso)
  int iterations = 0;
  double primal_residual = 0.0;  // ||M - [A y_hat] - S_hat||_F
  double dual_residual = 0.0;
  double objective = 0.0;
  bool converged = false;
  double rho_final = 0.0;
  std::vector<double> residual_history;  // max(primal, dual) per iteration
};

/// Block soft threshold: max(0, 1 - t/||row||) * row.
std::vector<double> prox_group_soft(std::span<const double> row, double t);
/// Scalar soft threshold: sign(x) * max(0, |x| - t).
double prox_soft(double x, double t);

/// min ||Y||_{2,1} + lambda ||S||_1  s.t.  M = [A_(i) y_i] + S.
SolverReport solve_rgl(const RealMatrix& M, const SensingEnsemble& ensemble, double lambda,
                       const SolverOptions& opts = {});
/// min ||Y||_{2,1}  s.t.  M = [A_(i) y_i].
SolverReport solve_l21_equality(const RealMatrix& M, const SensingEnsemble& ensemble,
                                const SolverOptions& opts = {});
/// min ||Y||_{2,1} + gamma ||M - [A_(i) y_i]||_F^2.
SolverReport solve_group_lasso(const RealMatrix& M, const SensingEnsemble& ensemble, double gamma,
                               const SolverOptions& opts = {});

struct RecoveryCheck {
  bool success = false;
  double rel_err_Y = 0.0;
  double rel_err_S = 0.0;
  bool support_match = false;
};

/// success iff ||Y_hat - Y||_F <= rel_tol * max(1, ||Y||_F) and the same for S.
RecoveryCheck check_exact_recovery(const SolverReport& report, const RealMatrix& Y_true,
                                   const RealMatrix& S_true, double rel_tol = 1e-3,
                                   double zero_tol = kDefaultZeroTol);

nlohmann::json report_to_json(const SolverReport& report);

}  // namespace rgl
