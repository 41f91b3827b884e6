#pragma once

#include <utility>
#include <vector>

#include "rgl/matrix.hpp"

namespace rgl {

using IndexSet = std::vector<Index>;
using EntrySet = std::vector<std::pair<Index, Index>>;  // (row, col)

/// Row support T of the signal, entry support Omega of the corruption and
/// the per-column maximal non-corrupted sets Omega_i*.
///
/// All sets are 0-based and sorted ascending. Omega_i* is the
/// lexicographically smallest (m - k_max)-subset of the complement of
/// Omega_i, so it is a pure function of the other fields.
struct SupportPattern {
  Index n = 0;
  Index m = 0;
  Index L = 0;
  IndexSet row_support;                 // T
  std::vector<IndexSet> column_support;  // Omega_i, one per column
  std::vector<IndexSet> omega_star;      // Omega_i*

  /// Validates, sorts and fills `omega_star`.
  static SupportPattern build(Index n, Index m, IndexSet row_support,
                              std::vector<IndexSet> column_support);

  Index k_T() const { return row_support.size(); }
  Index k_omega() const;
  Index k_max() const;

  EntrySet entry_support() const;
  IndexSet row_complement() const;
  IndexSet column_complement(Index col) const;

  /// Re-checks every structural invariant; throws ValidationError.
  void validate() const;
};

/// Zeroes every row not in `rows` (P_T).
RealMatrix project_rows(const RealMatrix& m, const IndexSet& rows);
/// Zeroes every row in `rows` (P_{T^c}).
RealMatrix project_rows_complement(const RealMatrix& m, const IndexSet& rows);
/// Zeroes every entry not in `entries` (P_Omega).
RealMatrix project_entries(const RealMatrix& m, const EntrySet& entries);
/// Column-wise P_Omega with Omega given as per-column row sets.
RealMatrix project_entries(const RealMatrix& m, const std::vector<IndexSet>& per_column);
/// Column-wise P_{Omega^c}.
RealMatrix project_entries_complement(const RealMatrix& m,
                                      const std::vector<IndexSet>& per_column);

/// Rows whose l2 norm exceeds zero_tol.
IndexSet nonzero_rows(const RealMatrix& m, double zero_tol);
/// Per column, the rows whose magnitude exceeds zero_tol.
std::vector<IndexSet> nonzero_entries_by_column(const RealMatrix& m, double zero_tol);

}  // namespace rgl
