#include "rgl/certificate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rgl/kernels.hpp"
#include "rgl/linalg.hpp"
#include "rgl/rng.hpp"

namespace rgl {

namespace {

double log_n(Index n) { return std::log(static_cast<double>(n)); }

void check_shapes(const SensingEnsemble& ens, const SupportPattern& s) {
  if (s.n != ens.n || s.m != ens.m || s.L != ens.L()) {
    throw ValidationError("certificate: support pattern does not match the ensemble");
  }
}

// One golfing step on column i. Reads q only on T, writes q_out on T (zero
// elsewhere) and optionally accumulates into u (length n) and w (length m).
void column_step(const SensingEnsemble& ens, Index i, const IndexSet& K, double weight,
                 const IndexSet& T, std::span<const double> q, std::span<double> q_out,
                 double* u, double* w) {
  const RealMatrix& A = ens.A[i];
  const Index n = ens.n;
  std::vector<double> aw(K.size(), 0.0);
  for (Index t = 0; t < K.size(); ++t) {
    auto row = A.row(K[t]);
    double acc = 0.0;
    for (Index k : T) acc += row[k] * q[k];
    aw[t] = acc;
  }
  std::vector<double> z(n, 0.0);
  for (Index t = 0; t < K.size(); ++t) {
    if (aw[t] == 0.0) continue;
    auto row = A.row(K[t]);
    for (Index k = 0; k < n; ++k) z[k] += row[k] * aw[t];
  }
  if (!ens.identity_sigma(i)) ens.apply_sigma_inverse(i, z);
  std::fill(q_out.begin(), q_out.end(), 0.0);
  for (Index k : T) q_out[k] = q[k] - weight * z[k];
  if (u)
    for (Index k = 0; k < n; ++k) u[k] += weight * z[k];
  if (w)
    for (Index t = 0; t < K.size(); ++t) w[K[t]] += weight * aw[t];
}

void require_plan(const GolfingPlan& plan, const SensingEnsemble& ens) {
  if (plan.n != ens.n || plan.m != ens.m || plan.L != ens.L()) {
    throw ValidationError("certificate: golfing plan does not match the ensemble");
  }
}

std::vector<double> column_of(const RealMatrix& a, Index c) {
  std::vector<double> out(a.rows());
  for (Index r = 0; r < a.rows(); ++r) out[r] = a(r, c);
  return out;
}

NamedCheck make_check(std::string name, double value, double threshold, bool strict) {
  NamedCheck c{std::move(name), value, threshold, strict, false};
  c.pass = strict ? value <= threshold - kStrictSlack : value <= threshold;
  return c;
}

double max_abs_diff(const RealMatrix& a, const RealMatrix& b) {
  return norm_linf(a - b);
}

// Columns of A_R Sigma^{-1}_{:,T}, one row per selected measurement.
RealMatrix whitened_support_columns(const SensingEnsemble& ens, Index i, const IndexSet& R,
                                    const IndexSet& T) {
  const RealMatrix& A = ens.A[i];
  RealMatrix C(std::max<Index>(R.size(), 1), std::max<Index>(T.size(), 1));
  if (ens.identity_sigma(i)) {
    for (Index r = 0; r < R.size(); ++r)
      for (Index a = 0; a < T.size(); ++a) C(r, a) = A(R[r], T[a]);
    return C;
  }
  const RealMatrix& si = ens.sigma_inv[i];
  for (Index r = 0; r < R.size(); ++r) {
    auto row = A.row(R[r]);
    for (Index a = 0; a < T.size(); ++a) {
      double acc = 0.0;
      for (Index k = 0; k < ens.n; ++k) acc += row[k] * si(k, T[a]);
      C(r, a) = acc;
    }
  }
  return C;
}

}  // namespace

GolfingPlan make_plan(Index n, Index m, const SupportPattern& supports, std::uint64_t seed) {
  if (n < 2) throw ValidationError("make_plan: need n >= 2 so that log n > 0");
  if (supports.n != n || supports.m != m) throw ValidationError("make_plan: support shape mismatch");
  const double ln = log_n(n);
  GolfingPlan plan;
  plan.n = n;
  plan.m = m;
  plan.L = supports.L;
  plan.seed = seed;
  plan.l = static_cast<Index>(std::floor(ln + 1.0));
  const Index head = m / 4;
  const Index tail = static_cast<Index>(std::floor(static_cast<double>(m) / (4.0 * ln)));
  for (Index j = 0; j < plan.l; ++j) {
    plan.sizes.push_back(j < 2 ? head : tail);
    plan.targets.push_back(j < 2 ? 1.0 / (2.0 * std::sqrt(ln)) : 0.5);
  }
  if (head == 0) throw ValidationError("make_plan: capacity m_1 = floor(m/4) is zero");
  if (plan.l > 2 && tail == 0) {
    throw ValidationError("make_plan: capacity m_j = floor(m/(4 log n)) is zero for j >= 3");
  }
  const Index total = std::accumulate(plan.sizes.begin(), plan.sizes.end(), Index{0});
  const Index room = m - supports.k_max();
  if (total > room) {
    throw ValidationError("make_plan: capacity sum of m_j = " + std::to_string(total) +
                          " exceeds m - k_max = " + std::to_string(room));
  }
  plan.batches.resize(plan.L);
  for (Index i = 0; i < plan.L; ++i) {
    RandomStream rs(derive_seed(seed, {0xB7u, i}));
    IndexSet pool = supports.omega_star[i];
    // partial Fisher-Yates over Omega_i*
    Index pos = 0;
    for (Index j = 0; j < plan.l; ++j) {
      IndexSet batch;
      for (Index t = 0; t < plan.sizes[j]; ++t, ++pos) {
        const Index pick = pos + rs.index_below(pool.size() - pos);
        std::swap(pool[pos], pool[pick]);
        batch.push_back(pool[pos]);
      }
      std::sort(batch.begin(), batch.end());
      plan.batches[i].push_back(std::move(batch));
    }
  }
  return plan;
}

RealMatrix row_normalized_truth(const RealMatrix& Y, const SupportPattern& supports,
                                double zero_tol) {
  if (Y.rows() != supports.n || Y.cols() != supports.L) {
    throw ValidationError("row_normalized_truth: Y must be n x L");
  }
  RealMatrix V(Y.rows(), Y.cols());
  for (Index r : supports.row_support) {
    const double nrm = norm2(Y.row(r));
    if (nrm <= zero_tol) {
      throw ValidationError("row_normalized_truth: zero truth row " + std::to_string(r) +
                            " inside T");
    }
    for (Index i = 0; i < Y.cols(); ++i) V(r, i) = Y(r, i) / nrm;
  }
  return V;
}

RealMatrix q_initial(const RealMatrix& V_bar, const SensingEnsemble& ensemble,
                     const SupportPattern& supports, const RealMatrix& sgn_S, double lambda) {
  check_shapes(ensemble, supports);
  RealMatrix Q = project_rows(serial::adjoint(ensemble.A, sgn_S), supports.row_support);
  Q *= -lambda;
  Q += V_bar;
  return Q;
}

RealMatrix golfing_step(const RealMatrix& Q_prev, const SensingEnsemble& ensemble,
                        const GolfingPlan& plan, const SupportPattern& supports, Index j) {
  require_plan(plan, ensemble);
  if (j < 1 || j > plan.l) throw ValidationError("golfing_step: j must lie in [1, l]");
  RealMatrix out(ensemble.n, ensemble.L());
  std::vector<double> q_out(ensemble.n);
  for (Index i = 0; i < ensemble.L(); ++i) {
    const auto q = column_of(Q_prev, i);
    column_step(ensemble, i, plan.batches[i][j - 1], plan.weight(j - 1), supports.row_support, q,
                q_out, nullptr, nullptr);
    out.set_column(i, q_out);
  }
  return out;
}

RealMatrix assemble_W(const GolfingPlan& plan, const SensingEnsemble& ensemble,
                      const SupportPattern& supports, const std::vector<RealMatrix>& Q) {
  require_plan(plan, ensemble);
  if (Q.size() < plan.l) throw ValidationError("assemble_W: Q sequence too short");
  RealMatrix W(ensemble.m, ensemble.L());
  std::vector<double> q_out(ensemble.n), w(ensemble.m);
  for (Index i = 0; i < ensemble.L(); ++i) {
    std::fill(w.begin(), w.end(), 0.0);
    for (Index j = 0; j < plan.l; ++j) {
      const auto q = column_of(Q[j], i);
      column_step(ensemble, i, plan.batches[i][j], plan.weight(j), supports.row_support, q, q_out,
                  nullptr, w.data());
    }
    W.set_column(i, w);
  }
  return W;
}

RealMatrix assemble_U(const GolfingPlan& plan, const SensingEnsemble& ensemble,
                      const SupportPattern& supports, const std::vector<RealMatrix>& Q) {
  require_plan(plan, ensemble);
  if (Q.size() < plan.l) throw ValidationError("assemble_U: Q sequence too short");
  RealMatrix U(ensemble.n, ensemble.L());
  std::vector<double> q_out(ensemble.n), u(ensemble.n);
  for (Index i = 0; i < ensemble.L(); ++i) {
    std::fill(u.begin(), u.end(), 0.0);
    for (Index j = 0; j < plan.l; ++j) {
      const auto q = column_of(Q[j], i);
      column_step(ensemble, i, plan.batches[i][j], plan.weight(j), supports.row_support, q, q_out,
                  u.data(), nullptr);
    }
    U.set_column(i, u);
  }
  return U;
}

DualCertificate build_certificate(const GolfingPlan& plan, const SensingEnsemble& ensemble,
                                  const SupportPattern& supports, const RealMatrix& V_bar,
                                  const RealMatrix& sgn_S, double lambda) {
  require_plan(plan, ensemble);
  check_shapes(ensemble, supports);
  const Index n = ensemble.n;
  const Index m = ensemble.m;
  const Index L = ensemble.L();
  DualCertificate cert;
  cert.V_bar = V_bar;
  cert.Q.push_back(q_initial(V_bar, ensemble, supports, sgn_S, lambda));
  for (Index j = 0; j < plan.l; ++j) cert.Q.emplace_back(n, L);
  cert.W = RealMatrix(m, L);
  cert.U = RealMatrix(n, L);
  std::vector<double> q(n), q_out(n), u(n), w(m);
  for (Index i = 0; i < L; ++i) {
    q = column_of(cert.Q[0], i);
    std::fill(u.begin(), u.end(), 0.0);
    std::fill(w.begin(), w.end(), 0.0);
    for (Index j = 0; j < plan.l; ++j) {
      column_step(ensemble, i, plan.batches[i][j], plan.weight(j), supports.row_support, q, q_out,
                  u.data(), w.data());
      cert.Q[j + 1].set_column(i, q_out);
      std::swap(q, q_out);
    }
    cert.U.set_column(i, u);
    cert.W.set_column(i, w);
  }
  return cert;
}

bool all_pass(const CheckList& checks) {
  return std::all_of(checks.begin(), checks.end(), [](const NamedCheck& c) { return c.pass; });
}

CheckList verify_exact_dual(const RealMatrix& W, const SensingEnsemble& ensemble,
                            const SupportPattern& supports, const RealMatrix& V_bar,
                            const RealMatrix& sgn_S, double lambda) {
  check_shapes(ensemble, supports);
  const RealMatrix AW = serial::adjoint(ensemble.A, W);
  const auto& T = supports.row_support;
  const auto& Om = supports.column_support;
  CheckList out;
  out.push_back(make_check("support_match", norm_fro(project_rows(AW, T) - V_bar), kEqualityTol,
                           false));
  out.push_back(make_check("off_support_l2inf", norm_l2inf(project_rows_complement(AW, T)), 1.0,
                           true));
  out.push_back(make_check("corruption_match",
                           max_abs_diff(project_entries(W, Om), project_entries(sgn_S, Om) * lambda),
                           kEqualityTol, false));
  out.push_back(make_check("off_corruption_linf", norm_linf(project_entries_complement(W, Om)),
                           lambda, true));
  return out;
}

CheckList verify_inexact_dual(const RealMatrix& W, const SensingEnsemble& ensemble,
                              const SupportPattern& supports, const RealMatrix& V_bar,
                              const RealMatrix& sgn_S, double lambda, double kappa_max) {
  if (!(lambda < 1.0)) throw ValidationError("verify_inexact_dual: requires lambda < 1");
  check_shapes(ensemble, supports);
  const auto& T = supports.row_support;
  const auto& Om = supports.column_support;
  const RealMatrix Wc = project_entries_complement(W, Om);
  RealMatrix V = serial::adjoint(ensemble.A, Wc);
  V += serial::adjoint(ensemble.A, sgn_S) * lambda;
  CheckList out;
  out.push_back(make_check("inexact_support_residual", norm_fro(project_rows(V, T) - V_bar),
                           lambda / (4.0 * std::sqrt(kappa_max)), false));
  out.push_back(make_check("inexact_off_support", norm_l2inf(project_rows_complement(V, T)), 0.25,
                           false));
  out.push_back(make_check("inexact_W_linf", norm_linf(Wc), lambda / 4.0, false));
  return out;
}

CheckList verify_certificate_bounds(const DualCertificate& cert, const SensingEnsemble& ensemble,
                                    const SupportPattern& supports, const RealMatrix& sgn_S,
                                    double lambda, double kappa_max) {
  check_shapes(ensemble, supports);
  const auto& T = supports.row_support;
  const RealMatrix AS = serial::adjoint(ensemble.A, sgn_S) * lambda;
  RealMatrix mid = project_rows(cert.U, T) + project_rows(AS, T);
  mid -= cert.V_bar;
  CheckList out;
  out.push_back(make_check("bound_sign_leak", norm_l2inf(project_rows_complement(AS, T)), 0.125,
                           false));
  out.push_back(make_check("bound_support_residual", norm_fro(mid),
                           lambda / (4.0 * std::sqrt(kappa_max)), false));
  out.push_back(make_check("bound_U_off_support", norm_l2inf(project_rows_complement(cert.U, T)),
                           0.125, false));
  out.push_back(make_check("bound_W_linf",
                           norm_linf(project_entries_complement(cert.W, supports.column_support)),
                           lambda / 4.0, false));
  return out;
}

IsometryCheck near_isometry_check(const SensingEnsemble& ensemble, const SupportPattern& supports,
                                  IsometryForm form, const GolfingPlan* plan, Index batch) {
  check_shapes(ensemble, supports);
  if (form == IsometryForm::batch) {
    if (!plan) throw ValidationError("near_isometry_check: batch form needs a plan");
    require_plan(*plan, ensemble);
    if (batch < 1 || batch > plan->l) throw ValidationError("near_isometry_check: batch out of range");
  }
  const auto& T = supports.row_support;
  const Index kT = T.size();
  const Index m = ensemble.m;
  IsometryCheck out;
  out.form = form;
  out.batch = batch;
  const double ln = log_n(std::max<Index>(ensemble.n, 2));
  switch (form) {
    case IsometryForm::identity_form:
      out.threshold = 0.5;
      out.strong_threshold = 1.0 / (2.0 * std::sqrt(ln));
      break;
    case IsometryForm::sigma_inverse_form: out.threshold = ensemble.kappa_max / 2.0; break;
    case IsometryForm::batch: out.threshold = plan->targets[batch - 1]; break;
  }
  for (Index i = 0; i < ensemble.L(); ++i) {
    if (kT == 0) {
      out.norms.push_back(0.0);
      continue;
    }
    const IndexSet& R = form == IsometryForm::batch ? plan->batches[i][batch - 1]
                                                    : supports.omega_star[i];
    const double c = static_cast<double>(m) /
                     static_cast<double>(form == IsometryForm::batch ? plan->sizes[batch - 1]
                                                                     : m - supports.k_max());
    const RealMatrix& A = ensemble.A[i];
    RealMatrix D(kT, kT);
    if (form == IsometryForm::sigma_inverse_form) {
      const RealMatrix C = whitened_support_columns(ensemble, i, R, T);
      for (Index r = 0; r < R.size(); ++r)
        for (Index a = 0; a < kT; ++a)
          for (Index b = 0; b < kT; ++b) D(a, b) += C(r, a) * C(r, b);
      D *= c;
      const RealMatrix& si = ensemble.sigma_inv[i];
      for (Index a = 0; a < kT; ++a)
        for (Index b = 0; b < kT; ++b) D(a, b) -= si(T[a], T[b]);
    } else {
      // (A_R Sigma^{-1}_{:,T})' A_{R,T}; the transpose has the same norm
      const RealMatrix C = whitened_support_columns(ensemble, i, R, T);
      for (Index r = 0; r < R.size(); ++r)
        for (Index a = 0; a < kT; ++a)
          for (Index b = 0; b < kT; ++b) D(a, b) += C(r, a) * A(R[r], T[b]);
      D *= c;
      for (Index a = 0; a < kT; ++a) D(a, a) -= 1.0;
    }
    out.norms.push_back(induced_22(D, kPowerIterationTol));
  }
  out.max_norm = out.norms.empty() ? 0.0 : *std::max_element(out.norms.begin(), out.norms.end());
  out.pass = form == IsometryForm::batch ? out.max_norm <= out.threshold
                                         : out.max_norm < out.threshold;
  out.strong_pass = form == IsometryForm::identity_form && out.max_norm < out.strong_threshold;
  return out;
}

OffSupportCheck off_support_check(const SensingEnsemble& ensemble, const SupportPattern& supports) {
  check_shapes(ensemble, supports);
  OffSupportCheck out;
  const auto& T = supports.row_support;
  const IndexSet Tc = supports.row_complement();
  if (T.empty() || Tc.empty()) return out;
  const Index kT = T.size();
  for (Index i = 0; i < ensemble.L(); ++i) {
    const IndexSet& R = supports.omega_star[i];
    const RealMatrix C = whitened_support_columns(ensemble, i, R, T);
    const RealMatrix& A = ensemble.A[i];
    RealMatrix E(kT, ensemble.n);
    for (Index r = 0; r < R.size(); ++r) {
      auto row = A.row(R[r]);
      for (Index a = 0; a < kT; ++a) {
        const double c = C(r, a);
        auto e = E.row(a);
        for (Index k = 0; k < ensemble.n; ++k) e[k] += c * row[k];
      }
    }
    for (Index k : Tc) {
      double acc = 0.0;
      for (Index a = 0; a < kT; ++a) acc += E(a, k) * E(a, k);
      out.value = std::max(out.value, std::sqrt(acc));
    }
  }
  out.pass = out.value <= out.threshold;
  return out;
}

CertificateReport certify(const ProblemInstance& inst, std::uint64_t plan_seed,
                          DualCertificate* out) {
  const SensingEnsemble& ens = *inst.ensemble;
  const auto& sup = inst.supports;
  const RealMatrix V_bar = row_normalized_truth(inst.Y_true, sup);
  const RealMatrix sgn = sign_matrix(inst.S_true);
  const GolfingPlan plan = make_plan(ens.n, ens.m, sup, plan_seed);
  DualCertificate cert = build_certificate(plan, ens, sup, V_bar, sgn, inst.lambda);

  CertificateReport rep;
  rep.q0_norm = norm_fro(cert.Q.front());
  rep.ql_norm = norm_fro(cert.Q.back());
  for (Index j = 1; j <= plan.l; ++j) {
    const double prev = norm_fro(cert.Q[j - 1]);
    const double cur = norm_fro(cert.Q[j]);
    rep.contraction_ratios.push_back(prev > 0.0 ? cur / prev : 0.0);
    rep.batch_isometry.push_back(near_isometry_check(ens, sup, IsometryForm::batch, &plan, j).pass);
  }
  const bool iso_all = std::all_of(rep.batch_isometry.begin(), rep.batch_isometry.end(),
                                   [](bool b) { return b; });
  if (iso_all) {
    for (Index j = 1; j <= plan.l; ++j) {
      if (norm_fro(cert.Q[j]) > plan.targets[j - 1] * norm_fro(cert.Q[j - 1])) {
        rep.contraction_implication = false;
      }
    }
  }
  const RealMatrix lhs = cert.Q.front() - cert.Q.back();
  rep.identity_residual = norm_fro(lhs - project_rows(cert.U, sup.row_support));
  rep.bound_checks = verify_certificate_bounds(cert, ens, sup, sgn, inst.lambda, ens.kappa_max);
  rep.exact_dual = verify_exact_dual(cert.W, ens, sup, V_bar, sgn, inst.lambda);
  if (inst.lambda < 1.0) {
    rep.inexact_dual = verify_inexact_dual(cert.W, ens, sup, V_bar, sgn, inst.lambda, ens.kappa_max);
  }
  rep.all_pass = all_pass(rep.bound_checks);
  if (out) *out = std::move(cert);
  return rep;
}

nlohmann::json to_json(const NamedCheck& c) {
  return {{"name", c.name},       {"value", c.value}, {"threshold", c.threshold},
          {"strict", c.strict},   {"pass", c.pass},   {"slack", c.slack()}};
}

nlohmann::json to_json(const CertificateReport& r) {
  auto list = [](const CheckList& cl) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& c : cl) a.push_back(to_json(c));
    return a;
  };
  return {
      {"contraction_ratios", r.contraction_ratios},
      {"batch_isometry", r.batch_isometry},
      {"contraction_implication", r.contraction_implication},
      {"bound_checks", list(r.bound_checks)},
      {"exact_dual", list(r.exact_dual)},
      {"inexact_dual", list(r.inexact_dual)},
      {"identity_residual", r.identity_residual},
      {"q0_norm", r.q0_norm},
      {"ql_norm", r.ql_norm},
      {"all_pass", r.all_pass},
  };
}

}  // namespace rgl
