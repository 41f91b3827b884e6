#pragma once

#include <vector>

#include "rgl/matrix.hpp"

// Column-blocked products that appear throughout the measurement model:
// every column i of an n x L (or m x L) matrix is paired with its own
// sensing matrix A_(i). Each kernel comes in two flavours: `serial::` is the
// reference implementation used by the tests, `parallel::` splits the work
// with OpenMP. Both produce bit-identical results because every output entry
// is accumulated in the same order.

namespace rgl {

using MatrixList = std::vector<RealMatrix>;

namespace serial {

/// [A_(1) y_1, ..., A_(L) y_L]
RealMatrix forward(const MatrixList& a, const RealMatrix& y);
/// [A_(1)' w_1, ..., A_(L)' w_L]
RealMatrix adjoint(const MatrixList& a, const RealMatrix& w);
/// A' A
RealMatrix gram(const RealMatrix& a);

}  // namespace serial

namespace parallel {

RealMatrix forward(const MatrixList& a, const RealMatrix& y);
RealMatrix adjoint(const MatrixList& a, const RealMatrix& w);
RealMatrix gram(const RealMatrix& a);

}  // namespace parallel

/// Threads OpenMP will use for `parallel::` kernels and trial pools.
int max_threads();
void set_threads(int n);

}  // namespace rgl
