#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "rgl/ensemble.hpp"
#include "rgl/instance.hpp"
#include "rgl/linalg.hpp"
#include "rgl/support.hpp"

namespace rgl {

/// Disjoint row batches K_ij inside each Omega_i*.
struct GolfingPlan {
  Index n = 0;
  Index m = 0;
  Index L = 0;
  Index l = 0;
  std::vector<Index> sizes;                   // m_j, j = 0..l-1
  std::vector<double> targets;                // c_j
  std::vector<std::vector<IndexSet>> batches;  // batches[i][j], sorted
  std::uint64_t seed = 0;

  double weight(Index j) const { return static_cast<double>(m) / static_cast<double>(sizes[j]); }
};

/// l = floor(log n + 1); m_1 = m_2 = floor(m/4); m_j = floor(m/(4 log n)).
/// Throws ValidationError naming the violated capacity when the batches do
/// not fit in m - k_max rows or a batch would be empty.
GolfingPlan make_plan(Index n, Index m, const SupportPattern& supports, std::uint64_t seed);

struct DualCertificate {
  std::vector<RealMatrix> Q;  // Q_0 .. Q_l
  RealMatrix W;
  RealMatrix U;
  RealMatrix V_bar;
};

/// Row-normalized truth on T, zero elsewhere. Throws if a row in T is zero.
RealMatrix row_normalized_truth(const RealMatrix& Y, const SupportPattern& supports,
                                double zero_tol = kDefaultZeroTol);

/// Q_0 = V_bar - lambda P_T [A_(i)' sgn(s_i)].
RealMatrix q_initial(const RealMatrix& V_bar, const SensingEnsemble& ensemble,
                     const SupportPattern& supports, const RealMatrix& sgn_S, double lambda);

/// Column i: P_T (I - (m/m_j) A~_(i,j)) P_T q_i with A~_(i,j) = Sigma^{-1} A' P_K A.
/// `j` is 1-based.
RealMatrix golfing_step(const RealMatrix& Q_prev, const SensingEnsemble& ensemble,
                        const GolfingPlan& plan, const SupportPattern& supports, Index j);

RealMatrix assemble_W(const GolfingPlan& plan, const SensingEnsemble& ensemble,
                      const SupportPattern& supports, const std::vector<RealMatrix>& Q);
RealMatrix assemble_U(const GolfingPlan& plan, const SensingEnsemble& ensemble,
                      const SupportPattern& supports, const std::vector<RealMatrix>& Q);

/// Runs the whole recursion, accumulating W and U in the same pass.
DualCertificate build_certificate(const GolfingPlan& plan, const SensingEnsemble& ensemble,
                                  const SupportPattern& supports, const RealMatrix& V_bar,
                                  const RealMatrix& sgn_S, double lambda);

struct NamedCheck {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool strict = false;  // value <= threshold - kStrictSlack
  bool pass = false;
  double slack() const { return threshold - value; }
};

inline constexpr double kStrictSlack = 1e-9;
inline constexpr double kEqualityTol = 1e-8;

using CheckList = std::vector<NamedCheck>;

bool all_pass(const CheckList& checks);

/// Exact duality: P_T[A'w] = V_bar, ||P_{T^c}[A'w]||_{2,inf} < 1,
/// P_Omega W = lambda sgn(S), ||P_{Omega^c} W||_inf < lambda.
CheckList verify_exact_dual(const RealMatrix& W, const SensingEnsemble& ensemble,
                            const SupportPattern& supports, const RealMatrix& V_bar,
                            const RealMatrix& sgn_S, double lambda);

/// V = [A' P_{Omega^c} w] + lambda [A' sgn s], then
/// ||P_T V - V_bar||_F <= lambda/(4 sqrt(kappa_max)), ||P_{T^c} V||_{2,inf} <= 1/4,
/// ||P_{Omega^c} W||_inf <= lambda/4. Requires lambda < 1.
CheckList verify_inexact_dual(const RealMatrix& W, const SensingEnsemble& ensemble,
                              const SupportPattern& supports, const RealMatrix& V_bar,
                              const RealMatrix& sgn_S, double lambda, double kappa_max);

/// The four certificate bounds (1/8, lambda/(4 sqrt(kappa_max)), 1/8, lambda/4).
CheckList verify_certificate_bounds(const DualCertificate& cert, const SensingEnsemble& ensemble,
                                    const SupportPattern& supports, const RealMatrix& sgn_S,
                                    double lambda, double kappa_max);

enum class IsometryForm { identity_form, sigma_inverse_form, batch };

struct IsometryCheck {
  IsometryForm form = IsometryForm::identity_form;
  Index batch = 0;              // 1-based, only for the batch form
  std::vector<double> norms;    // per column
  double max_norm = 0.0;
  double threshold = 0.0;
  bool pass = false;            // max_norm < threshold
  double strong_threshold = 0.0;  // identity form only: 1/(2 sqrt(log n))
  bool strong_pass = false;
};

/// Spectral norm of P_T(c A~_(i) - I)P_T per column (or its Sigma^{-1}
/// variant, or the per-batch version with c = m/m_j).
IsometryCheck near_isometry_check(const SensingEnsemble& ensemble, const SupportPattern& supports,
                                  IsometryForm form, const GolfingPlan* plan = nullptr,
                                  Index batch = 0);

struct OffSupportCheck {
  double value = 0.0;
  double threshold = 1.0;
  bool pass = true;
};

/// max over i and k outside T of ||P_T A~_(i) e_k||_2.
OffSupportCheck off_support_check(const SensingEnsemble& ensemble, const SupportPattern& supports);

struct CertificateReport {
  std::vector<double> contraction_ratios;  // ||Q_j|| / ||Q_{j-1}||
  std::vector<bool> batch_isometry;        // per j
  bool contraction_implication = true;     // isometry for all j => ratio <= c_j for all j
  CheckList bound_checks;
  CheckList exact_dual;
  CheckList inexact_dual;
  double identity_residual = 0.0;  // ||(Q_0 - Q_l) - P_T U||_F
  double q0_norm = 0.0;
  double ql_norm = 0.0;
  bool all_pass = false;  // the four certificate bounds
};

/// Golfing plus every verifier on one instance.
CertificateReport certify(const ProblemInstance& inst, std::uint64_t plan_seed,
                          DualCertificate* out = nullptr);

nlohmann::json to_json(const NamedCheck& c);
nlohmann::json to_json(const CertificateReport& r);

}  // namespace rgl
