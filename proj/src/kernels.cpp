#include "rgl/kernels.hpp"

#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace rgl {

namespace {

void check_forward(const MatrixList& a, const RealMatrix& y) {
  if (a.size() != y.cols()) {
    throw ValidationError("forward: need one sensing matrix per column (" +
                          std::to_string(a.size()) + " vs " + std::to_string(y.cols()) + ")");
  }
  for (const auto& ai : a)
    if (ai.cols() != y.rows() || ai.rows() != a.front().rows())
      throw ValidationError("forward: sensing matrix shape mismatch");
}

void check_adjoint(const MatrixList& a, const RealMatrix& w) {
  if (a.size() != w.cols()) throw ValidationError("adjoint: need one sensing matrix per column");
  for (const auto& ai : a)
    if (ai.rows() != w.rows() || ai.cols() != a.front().cols())
      throw ValidationError("adjoint: sensing matrix shape mismatch");
}

// out(:, i) = A_i y(:, i), rows accumulated left to right
inline void forward_column(const RealMatrix& ai, const RealMatrix& y, Index i,
                           RealMatrix& out) {
  for (Index r = 0; r < ai.rows(); ++r) {
    auto row = ai.row(r);
    double acc = 0.0;
    for (Index k = 0; k < row.size(); ++k) acc += row[k] * y(k, i);
    out(r, i) = acc;
  }
}

inline void adjoint_column(const RealMatrix& ai, const RealMatrix& w, Index i,
                           RealMatrix& out) {
  for (Index r = 0; r < ai.rows(); ++r) {
    const double wr = w(r, i);
    if (wr == 0.0) continue;
    auto row = ai.row(r);
    for (Index k = 0; k < row.size(); ++k) out(k, i) += row[k] * wr;
  }
}

inline void gram_row(const RealMatrix& a, Index p, RealMatrix& out) {
  for (Index q = 0; q < a.cols(); ++q) {
    double acc = 0.0;
    for (Index r = 0; r < a.rows(); ++r) acc += a(r, p) * a(r, q);
    out(p, q) = acc;
  }
}

}  // namespace

namespace serial {

RealMatrix forward(const MatrixList& a, const RealMatrix& y) {
  check_forward(a, y);
  RealMatrix out(a.front().rows(), y.cols());
  for (Index i = 0; i < y.cols(); ++i) forward_column(a[i], y, i, out);
  return out;
}

RealMatrix adjoint(const MatrixList& a, const RealMatrix& w) {
  check_adjoint(a, w);
  RealMatrix out(a.front().cols(), w.cols());
  for (Index i = 0; i < w.cols(); ++i) adjoint_column(a[i], w, i, out);
  return out;
}

RealMatrix gram(const RealMatrix& a) {
  RealMatrix out(a.cols(), a.cols());
  for (Index p = 0; p < a.cols(); ++p) gram_row(a, p, out);
  return out;
}

}  // namespace serial

namespace parallel {

RealMatrix forward(const MatrixList& a, const RealMatrix& y) {
  check_forward(a, y);
  RealMatrix out(a.front().rows(), y.cols());
  const auto cols = static_cast<long>(y.cols());
  const auto rows = static_cast<long>(a.front().rows());
  // Parallel over (column, row) pairs; each entry is one independent dot product.
#pragma omp parallel for collapse(2) schedule(static)
  for (long i = 0; i < cols; ++i) {
    for (long r = 0; r < rows; ++r) {
      auto row = a[i].row(r);
      double acc = 0.0;
      for (Index k = 0; k < row.size(); ++k) acc += row[k] * y(k, i);
      out(r, i) = acc;
    }
  }
  return out;
}

RealMatrix adjoint(const MatrixList& a, const RealMatrix& w) {
  check_adjoint(a, w);
  const Index n = a.front().cols();
  RealMatrix out(n, w.cols());
  const auto cols = static_cast<long>(w.cols());
  const auto nn = static_cast<long>(n);
  // Each output entry (k, i) sums over rows r in ascending order, matching
  // the serial accumulation order exactly.
#pragma omp parallel for collapse(2) schedule(static)
  for (long i = 0; i < cols; ++i) {
    for (long k = 0; k < nn; ++k) {
      const auto& ai = a[i];
      double acc = 0.0;
      for (Index r = 0; r < ai.rows(); ++r) {
        const double wr = w(r, i);
        if (wr == 0.0) continue;
        acc += ai(r, k) * wr;
      }
      out(k, i) = acc;
    }
  }
  return out;
}

RealMatrix gram(const RealMatrix& a) {
  RealMatrix out(a.cols(), a.cols());
  const auto n = static_cast<long>(a.cols());
#pragma omp parallel for schedule(dynamic)
  for (long p = 0; p < n; ++p) gram_row(a, p, out);
  return out;
}

}  // namespace parallel

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void set_threads(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

}  // namespace rgl
