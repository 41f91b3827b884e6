#include "rgl/solver.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "rgl/io.hpp"

namespace rgl {

namespace {

enum class ResidualTerm { l1, zero, quadratic };

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (Index k = 0; k < a.size(); ++k) acc += a[k] * b[k];
  return acc;
}

double sum_squares(std::span<const double> a) { return dot(a, a); }

// y += A' z, rows accumulated in ascending order
void add_adjoint(const RealMatrix& a, std::span<const double> z, std::span<double> y) {
  for (Index r = 0; r < a.rows(); ++r) {
    const double zr = z[r];
    if (zr == 0.0) continue;
    auto row = a.row(r);
    for (Index k = 0; k < row.size(); ++k) y[k] += row[k] * zr;
  }
}

void apply(const RealMatrix& a, std::span<const double> x, std::span<double> out) {
  for (Index r = 0; r < a.rows(); ++r) out[r] = dot(a.row(r), x);
}

// Solves (I + A'A) x = p + A'q for one column. With m < n the Woodbury form
//   x = p + A'(q - K^{-1}(A p + G q)),  K = I + G,  G = A A'
// keeps every solve m x m; it also yields A x = A p + G z for free.
class ColumnSystem {
 public:
  explicit ColumnSystem(const RealMatrix& a) : a_(a), wide_(a.rows() < a.cols()) {
    const Index m = a.rows();
    const Index n = a.cols();
    if (wide_) {
      gram_ = RealMatrix(m, m);
      for (Index i = 0; i < m; ++i)
        for (Index j = 0; j <= i; ++j) {
          const double g = dot(a.row(i), a.row(j));
          gram_(i, j) = g;
          gram_(j, i) = g;
        }
      RealMatrix k = gram_;
      for (Index i = 0; i < m; ++i) k(i, i) += 1.0;
      chol_.emplace(k);
    } else {
      RealMatrix k(n, n);
      for (Index r = 0; r < m; ++r) {
        auto row = a.row(r);
        for (Index i = 0; i < n; ++i)
          for (Index j = 0; j < n; ++j) k(i, j) += row[i] * row[j];
      }
      for (Index i = 0; i < n; ++i) k(i, i) += 1.0;
      chol_.emplace(k);
    }
    ap_.resize(m);
    t_.resize(m);
  }

  // x <- solution, ax <- A x
  void solve(std::span<const double> p, std::span<const double> q, std::span<double> x,
             std::span<double> ax) {
    const Index m = a_.rows();
    if (wide_) {
      apply(a_, p, ap_);
      for (Index r = 0; r < m; ++r) t_[r] = ap_[r] + dot(gram_.row(r), q);
      chol_->solve_in_place(t_);
      for (Index r = 0; r < m; ++r) t_[r] = q[r] - t_[r];  // z
      std::copy(p.begin(), p.end(), x.begin());
      add_adjoint(a_, t_, x);
      for (Index r = 0; r < m; ++r) ax[r] = ap_[r] + dot(gram_.row(r), t_);
    } else {
      std::copy(p.begin(), p.end(), x.begin());
      add_adjoint(a_, q, x);
      chol_->solve_in_place(x);
      apply(a_, x, ax);
    }
  }

 private:
  const RealMatrix& a_;
  bool wide_;
  RealMatrix gram_;
  std::optional<Cholesky> chol_;
  std::vector<double> ap_;
  std::vector<double> t_;
};

double group_norm(std::span<const double> row) {
  double buf[16];
  std::vector<double> heap;
  std::span<double> sq;
  if (row.size() <= 16) {
    sq = std::span<double>(buf, row.size());
  } else {
    heap.resize(row.size());
    sq = heap;
  }
  for (Index k = 0; k < row.size(); ++k) sq[k] = row[k] * row[k];
  std::sort(sq.begin(), sq.end());
  double acc = 0.0;
  for (double v : sq) acc += v;
  return std::sqrt(acc);
}

double residual_prox(double w, ResidualTerm term, double weight, double rho) {
  switch (term) {
    case ResidualTerm::l1: return prox_soft(w, weight / rho);
    case ResidualTerm::zero: return 0.0;
    case ResidualTerm::quadratic: return rho * w / (rho + 2.0 * weight);
  }
  return 0.0;
}

SolverReport run_splitting(const RealMatrix& M, const SensingEnsemble& ens, ResidualTerm term,
                           double weight, const SolverOptions& opts, std::string program) {
  opts.validate();
  const Index n = ens.n;
  const Index m = ens.m;
  const Index L = ens.L();
  if (M.rows() != m || M.cols() != L) throw ValidationError("solver: M must be m x L");
  for (const auto& a : ens.A)
    if (a.rows() != m || a.cols() != n) throw ValidationError("solver: sensing matrix shape mismatch");

  using Vec = std::vector<double>;
  std::vector<ColumnSystem> systems;
  systems.reserve(L);
  for (const auto& a : ens.A) systems.emplace_back(a);

  std::vector<Vec> meas(L, Vec(m)), x(L, Vec(n)), ax(L, Vec(m)), y(L, Vec(n)), s(L, Vec(m)),
      u(L, Vec(n)), v(L, Vec(m)), xr(L, Vec(n)), axr(L, Vec(m)), y_old(L, Vec(n)),
      s_old(L, Vec(m));
  for (Index i = 0; i < L; ++i)
    for (Index r = 0; r < m; ++r) meas[i][r] = M(r, i);

  Vec p(n), q(m), dual_vec(n), row(L), ay(m);
  std::vector<double> col_primal(L), col_dual(L), col_feas(L);
  const double alpha = opts.over_relaxation;
  double rho = opts.rho;

  SolverReport rep;
  rep.program = std::move(program);
  double primal = 0.0, dual = 0.0, feas = 0.0;
  int it = 0;
  for (it = 1; it <= opts.max_iters; ++it) {
    for (Index i = 0; i < L; ++i) {
      for (Index k = 0; k < n; ++k) p[k] = y[i][k] - u[i][k];
      for (Index r = 0; r < m; ++r) q[r] = meas[i][r] - s[i][r] - v[i][r];
      systems[i].solve(p, q, x[i], ax[i]);
      for (Index k = 0; k < n; ++k) xr[i][k] = alpha * x[i][k] + (1.0 - alpha) * y[i][k];
      for (Index r = 0; r < m; ++r)
        axr[i][r] = alpha * ax[i][r] + (1.0 - alpha) * (meas[i][r] - s[i][r]);
      y_old[i] = y[i];
      s_old[i] = s[i];
    }
    // Y: row-wise group shrinkage of the consensus block
    const double tg = 1.0 / rho;
    for (Index k = 0; k < n; ++k) {
      for (Index i = 0; i < L; ++i) row[i] = xr[i][k] + u[i][k];
      const double nrm = group_norm(row);
      const double scale = nrm <= tg ? 0.0 : 1.0 - tg / nrm;
      for (Index i = 0; i < L; ++i) y[i][k] = scale * row[i];
    }
    for (Index i = 0; i < L; ++i) {
      for (Index r = 0; r < m; ++r)
        s[i][r] = residual_prox(meas[i][r] - axr[i][r] - v[i][r], term, weight, rho);
      for (Index k = 0; k < n; ++k) u[i][k] += xr[i][k] - y[i][k];
      for (Index r = 0; r < m; ++r) v[i][r] += axr[i][r] + s[i][r] - meas[i][r];

      double pr = 0.0;
      for (Index k = 0; k < n; ++k) pr += (x[i][k] - y[i][k]) * (x[i][k] - y[i][k]);
      for (Index r = 0; r < m; ++r) {
        const double e = ax[i][r] + s[i][r] - meas[i][r];
        pr += e * e;
      }
      col_primal[i] = pr;
      for (Index k = 0; k < n; ++k) dual_vec[k] = y_old[i][k] - y[i][k];
      for (Index r = 0; r < m; ++r) q[r] = s[i][r] - s_old[i][r];
      add_adjoint(ens.A[i], q, dual_vec);
      col_dual[i] = sum_squares(dual_vec);
    }
    primal = std::sqrt(order_invariant_sum(col_primal));
    dual = rho * std::sqrt(order_invariant_sum(col_dual));
    if (opts.record_history) rep.residual_history.push_back(std::max(primal, dual));

    if (primal <= opts.tol_primal && dual <= opts.tol_dual) {
      for (Index i = 0; i < L; ++i) {
        apply(ens.A[i], y[i], ay);
        double f = 0.0;
        for (Index r = 0; r < m; ++r) {
          const double e = meas[i][r] - ay[r] - s[i][r];
          f += e * e;
        }
        col_feas[i] = f;
      }
      feas = std::sqrt(order_invariant_sum(col_feas));
      if (feas <= opts.tol_primal) {
        rep.converged = true;
        break;
      }
    }

    if (opts.adaptive_rho && it % 10 == 0 && it <= opts.max_iters / 2) {
      double factor = 1.0;
      if (primal > opts.balance_ratio * dual) factor = opts.balance_factor;
      else if (dual > opts.balance_ratio * primal) factor = 1.0 / opts.balance_factor;
      if (factor != 1.0) {
        rho *= factor;
        for (Index i = 0; i < L; ++i) {
          for (auto& val : u[i]) val /= factor;
          for (auto& val : v[i]) val /= factor;
        }
      }
    }
  }
  rep.iterations = std::min(it, opts.max_iters);

  rep.Y_hat = RealMatrix(n, L);
  rep.S_hat = RealMatrix(m, L);
  for (Index i = 0; i < L; ++i) {
    rep.Y_hat.set_column(i, y[i]);
    rep.S_hat.set_column(i, s[i]);
  }
  if (!rep.converged) {
    for (Index i = 0; i < L; ++i) {
      apply(ens.A[i], y[i], ay);
      double f = 0.0;
      for (Index r = 0; r < m; ++r) {
        const double e = meas[i][r] - ay[r] - s[i][r];
        f += e * e;
      }
      col_feas[i] = f;
    }
    feas = std::sqrt(order_invariant_sum(col_feas));
  }
  rep.primal_residual = feas;
  rep.dual_residual = dual;
  rep.rho_final = rho;
  rep.objective = norm_l21(rep.Y_hat);
  if (term == ResidualTerm::l1) rep.objective += weight * norm_l1(rep.S_hat);
  if (term == ResidualTerm::quadratic) {
    const double f = norm_fro(rep.S_hat);
    rep.objective += weight * f * f;
  }
  return rep;
}

}  // namespace

void SolverOptions::validate() const {
  if (!(rho > 0.0)) throw ValidationError("SolverOptions: rho must be positive");
  if (max_iters < 1) throw ValidationError("SolverOptions: max_iters must be >= 1");
  if (!(tol_primal > 0.0) || !(tol_dual > 0.0)) {
    throw ValidationError("SolverOptions: tolerances must be positive");
  }
  if (!(over_relaxation >= 1.0 && over_relaxation <= 1.8)) {
    throw ValidationError("SolverOptions: over_relaxation must lie in [1, 1.8]");
  }
}

std::vector<double> prox_group_soft(std::span<const double> row, double t) {
  if (t < 0.0) throw ValidationError("prox_group_soft: t must be >= 0");
  std::vector<double> out(row.begin(), row.end());
  const double nrm = group_norm(row);
  if (nrm <= t) {
    std::fill(out.begin(), out.end(), 0.0);
    return out;
  }
  const double scale = 1.0 - t / nrm;
  for (auto& v : out) v *= scale;
  return out;
}

double prox_soft(double x, double t) {
  if (t < 0.0) throw ValidationError("prox_soft: t must be >= 0");
  if (x > t) return x - t;
  if (x < -t) return x + t;
  return 0.0;
}

SolverReport solve_rgl(const RealMatrix& M, const SensingEnsemble& ensemble, double lambda,
                       const SolverOptions& opts) {
  if (!(lambda > 0.0)) throw ValidationError("solve_rgl: lambda must be positive");
  return run_splitting(M, ensemble, ResidualTerm::l1, lambda, opts, "rgl");
}

SolverReport solve_l21_equality(const RealMatrix& M, const SensingEnsemble& ensemble,
                                const SolverOptions& opts) {
  return run_splitting(M, ensemble, ResidualTerm::zero, 0.0, opts, "l21_equality");
}

SolverReport solve_group_lasso(const RealMatrix& M, const SensingEnsemble& ensemble, double gamma,
                               const SolverOptions& opts) {
  if (!(gamma > 0.0)) throw ValidationError("solve_group_lasso: gamma must be positive");
  return run_splitting(M, ensemble, ResidualTerm::quadratic, gamma, opts, "group_lasso");
}

RecoveryCheck check_exact_recovery(const SolverReport& report, const RealMatrix& Y_true,
                                   const RealMatrix& S_true, double rel_tol, double zero_tol) {
  if (!(rel_tol > 0.0)) throw ValidationError("check_exact_recovery: rel_tol must be positive");
  require_same_shape(report.Y_hat, Y_true, "check_exact_recovery(Y)");
  require_same_shape(report.S_hat, S_true, "check_exact_recovery(S)");
  RecoveryCheck rc;
  const double ey = norm_fro(report.Y_hat - Y_true);
  const double es = norm_fro(report.S_hat - S_true);
  const double sy = std::max(1.0, norm_fro(Y_true));
  const double ss = std::max(1.0, norm_fro(S_true));
  rc.rel_err_Y = ey / sy;
  rc.rel_err_S = es / ss;
  rc.success = ey <= rel_tol * sy && es <= rel_tol * ss;
  rc.support_match = sign_matrix(report.Y_hat, zero_tol) == sign_matrix(Y_true, zero_tol) &&
                     sign_matrix(report.S_hat, zero_tol) == sign_matrix(S_true, zero_tol);
  return rc;
}

nlohmann::json report_to_json(const SolverReport& report) {
  auto mat = [](const RealMatrix& a) {
    return nlohmann::json{{"rows", a.rows()},
                          {"cols", a.cols()},
                          {"row_major", std::vector<double>(a.data().begin(), a.data().end())}};
  };
  return {
      {"program", report.program},
      {"iterations", report.iterations},
      {"converged", report.converged},
      {"primal_residual", report.primal_residual},
      {"dual_residual", report.dual_residual},
      {"objective", report.objective},
      {"rho_final", report.rho_final},
      {"Y_hat", mat(report.Y_hat)},
      {"S_hat", mat(report.S_hat)},
  };
}

}  // namespace rgl
