#pragma once

#include <span>
#include <vector>

#include "rgl/matrix.hpp"

namespace rgl {

/// Threshold below which an entry counts as zero for sign/support extraction.
inline constexpr double kDefaultZeroTol = 1e-9;

/// Iteration cap and tolerance used by `induced_22` unless overridden.
inline constexpr int kPowerIterationCap = 10'000;
inline constexpr double kPowerIterationTol = 1e-10;

// Norms. Row-group norms treat each row as one group.
double norm_l21(const RealMatrix& m);
double norm_l1(const RealMatrix& m);
double norm_l2inf(const RealMatrix& m);
double norm_linf(const RealMatrix& m);
double norm_fro(const RealMatrix& m);

double norm2(std::span<const double> v);

/// Sum whose value does not depend on the order of `values`.
///
/// Terms are sorted before accumulation, so any permutation of the input
/// yields the bit-identical result.
double order_invariant_sum(std::vector<double> values);

/// Largest singular value by power iteration on M'M.
///
/// Starts from the normalized all-ones vector and stops once the Rayleigh
/// quotient changes by less than `tol` relative. Throws ConvergenceError when
/// `max_iters` is exhausted.
double induced_22(const RealMatrix& m, double tol = kPowerIterationTol,
                  int max_iters = kPowerIterationCap);

/// Entrywise sign with a dead zone: 0 iff |m_ij| <= zero_tol.
RealMatrix sign_matrix(const RealMatrix& m, double zero_tol = kDefaultZeroTol);

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
class Cholesky {
 public:
  /// Throws ValidationError if `spd` is not (numerically) positive definite.
  explicit Cholesky(const RealMatrix& spd);

  Index dim() const { return lower_.rows(); }
  const RealMatrix& lower() const { return lower_; }

  /// Solves (L L') x = b in place.
  void solve_in_place(std::span<double> b) const;
  std::vector<double> solve(std::span<const double> b) const;
  RealMatrix inverse() const;

 private:
  RealMatrix lower_;
};

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
struct SymmetricEigen {
  std::vector<double> values;  // ascending
  RealMatrix vectors;          // columns are eigenvectors
};

SymmetricEigen symmetric_eigen(const RealMatrix& sym, double tol = 1e-14,
                               int max_sweeps = 100);

/// Copies the listed rows and columns of `m` into a dense submatrix.
RealMatrix submatrix(const RealMatrix& m, std::span<const Index> rows,
                     std::span<const Index> cols);

}  // namespace rgl
