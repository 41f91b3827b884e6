#include "rgl/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace rgl {

double norm2(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}

double norm_l21(const RealMatrix& m) {
  double acc = 0.0;
  for (Index r = 0; r < m.rows(); ++r) acc += norm2(m.row(r));
  return acc;
}

double norm_l1(const RealMatrix& m) {
  double acc = 0.0;
  for (double v : m.data()) acc += std::abs(v);
  return acc;
}

double norm_l2inf(const RealMatrix& m) {
  double best = 0.0;
  for (Index r = 0; r < m.rows(); ++r) best = std::max(best, norm2(m.row(r)));
  return best;
}

double norm_linf(const RealMatrix& m) {
  double best = 0.0;
  for (double v : m.data()) best = std::max(best, std::abs(v));
  return best;
}

double norm_fro(const RealMatrix& m) { return norm2(m.data()); }

double order_invariant_sum(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  double acc = 0.0;
  for (double v : values) acc += v;
  return acc;
}

double induced_22(const RealMatrix& m, double tol, int max_iters) {
  if (!(tol > 0.0)) throw ValidationError("induced_22: tol must be positive");
  if (m.empty()) return 0.0;
  const Index n = m.cols();
  std::vector<double> v(n, 1.0 / std::sqrt(static_cast<double>(n)));
  double theta = 0.0;
  for (int it = 0; it < max_iters; ++it) {
    const auto mv = matvec(m, v);
    auto w = matvec_transposed(m, mv);
    const double next = std::inner_product(v.begin(), v.end(), w.begin(), 0.0);
    const double wn = norm2(w);
    if (wn == 0.0) return 0.0;
    for (double& x : w) x /= wn;
    v.swap(w);
    if (it > 0 && std::abs(next - theta) <= tol * std::abs(next)) {
      return std::sqrt(std::max(next, 0.0));
    }
    theta = next;
  }
  throw ConvergenceError("induced_22: power iteration did not converge in " +
                         std::to_string(max_iters) +
                         " iterations (matrix may be ill-conditioned)");
}

RealMatrix sign_matrix(const RealMatrix& m, double zero_tol) {
  if (zero_tol < 0.0) throw ValidationError("sign_matrix: zero_tol must be >= 0");
  RealMatrix out(m.rows(), m.cols());
  auto src = m.data();
  auto dst = out.data();
  for (Index k = 0; k < src.size(); ++k) {
    if (std::abs(src[k]) <= zero_tol) continue;
    dst[k] = src[k] > 0.0 ? 1.0 : -1.0;
  }
  return out;
}

Cholesky::Cholesky(const RealMatrix& spd) : lower_(spd.rows(), spd.cols()) {
  if (spd.rows() != spd.cols()) throw ValidationError("Cholesky: matrix not square");
  const Index n = spd.rows();
  for (Index j = 0; j < n; ++j) {
    double d = spd(j, j);
    for (Index k = 0; k < j; ++k) d -= lower_(j, k) * lower_(j, k);
    if (!(d > 0.0)) throw ValidationError("Cholesky: matrix is not positive definite");
    const double ljj = std::sqrt(d);
    lower_(j, j) = ljj;
    for (Index i = j + 1; i < n; ++i) {
      double s = spd(i, j);
      for (Index k = 0; k < j; ++k) s -= lower_(i, k) * lower_(j, k);
      lower_(i, j) = s / ljj;
    }
  }
}

void Cholesky::solve_in_place(std::span<double> b) const {
  const Index n = lower_.rows();
  if (b.size() != n) throw ValidationError("Cholesky::solve: length mismatch");
  for (Index i = 0; i < n; ++i) {
    double s = b[i];
    auto li = lower_.row(i);
    for (Index k = 0; k < i; ++k) s -= li[k] * b[k];
    b[i] = s / li[i];
  }
  for (Index ii = n; ii-- > 0;) {
    double s = b[ii];
    for (Index k = ii + 1; k < n; ++k) s -= lower_(k, ii) * b[k];
    b[ii] = s / lower_(ii, ii);
  }
}

std::vector<double> Cholesky::solve(std::span<const double> b) const {
  std::vector<double> x(b.begin(), b.end());
  solve_in_place(x);
  return x;
}

RealMatrix Cholesky::inverse() const {
  const Index n = dim();
  RealMatrix inv(n, n);
  std::vector<double> e(n);
  for (Index c = 0; c < n; ++c) {
    std::fill(e.begin(), e.end(), 0.0);
    e[c] = 1.0;
    solve_in_place(e);
    inv.set_column(c, e);
  }
  // symmetrize away rounding
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) {
      const double avg = 0.5 * (inv(i, j) + inv(j, i));
      inv(i, j) = avg;
      inv(j, i) = avg;
    }
  return inv;
}

SymmetricEigen symmetric_eigen(const RealMatrix& sym, double tol, int max_sweeps) {
  if (sym.rows() != sym.cols()) throw ValidationError("symmetric_eigen: not square");
  const Index n = sym.rows();
  RealMatrix a = sym;
  RealMatrix v = RealMatrix::identity(n);
  const double scale = std::max(norm_fro(sym), 1e-300);
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (Index p = 0; p < n; ++p)
      for (Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(off) <= tol * scale) break;
    for (Index p = 0; p < n; ++p) {
      for (Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (Index k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<Index> order(n);
  for (Index i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](Index x, Index y) { return a(x, x) < a(y, y); });
  SymmetricEigen out{std::vector<double>(n), RealMatrix(n, n)};
  for (Index k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    for (Index r = 0; r < n; ++r) out.vectors(r, k) = v(r, order[k]);
  }
  return out;
}

RealMatrix submatrix(const RealMatrix& m, std::span<const Index> rows,
                     std::span<const Index> cols) {
  RealMatrix out(rows.size(), cols.size());
  for (Index r = 0; r < rows.size(); ++r) {
    if (rows[r] >= m.rows()) throw ValidationError("submatrix: row index out of range");
    for (Index c = 0; c < cols.size(); ++c) {
      if (cols[c] >= m.cols()) throw ValidationError("submatrix: column index out of range");
      out(r, c) = m(rows[r], cols[c]);
    }
  }
  return out;
}

}  // namespace rgl
