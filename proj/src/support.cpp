#include "rgl/support.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rgl/linalg.hpp"

namespace rgl {

namespace {

void sort_unique_checked(IndexSet& set, Index bound, const char* what) {
  std::sort(set.begin(), set.end());
  if (std::adjacent_find(set.begin(), set.end()) != set.end()) {
    throw ValidationError(std::string(what) + ": duplicate index");
  }
  if (!set.empty() && set.back() >= bound) {
    throw ValidationError(std::string(what) + ": index out of range");
  }
}

IndexSet complement(const IndexSet& sorted, Index bound) {
  IndexSet out;
  out.reserve(bound - sorted.size());
  Index k = 0;
  for (Index i = 0; i < bound; ++i) {
    if (k < sorted.size() && sorted[k] == i) {
      ++k;
      continue;
    }
    out.push_back(i);
  }
  return out;
}

}  // namespace

SupportPattern SupportPattern::build(Index n, Index m, IndexSet row_support,
                                     std::vector<IndexSet> column_support) {
  if (n == 0 || m == 0 || column_support.empty()) {
    throw ValidationError("SupportPattern: n, m and L must be positive");
  }
  SupportPattern sp;
  sp.n = n;
  sp.m = m;
  sp.L = column_support.size();
  sort_unique_checked(row_support, n, "row support T");
  for (auto& col : column_support) sort_unique_checked(col, m, "corruption support");
  sp.row_support = std::move(row_support);
  sp.column_support = std::move(column_support);

  const Index kmax = sp.k_max();
  sp.omega_star.resize(sp.L);
  for (Index i = 0; i < sp.L; ++i) {
    IndexSet comp = complement(sp.column_support[i], m);
    comp.resize(m - kmax);  // lexicographically smallest m - k_max indices
    sp.omega_star[i] = std::move(comp);
  }
  return sp;
}

Index SupportPattern::k_omega() const {
  Index total = 0;
  for (const auto& c : column_support) total += c.size();
  return total;
}

Index SupportPattern::k_max() const {
  Index best = 0;
  for (const auto& c : column_support) best = std::max(best, c.size());
  return best;
}

EntrySet SupportPattern::entry_support() const {
  EntrySet out;
  out.reserve(k_omega());
  for (Index r = 0; r < m; ++r)
    for (Index i = 0; i < L; ++i)
      if (std::binary_search(column_support[i].begin(), column_support[i].end(), r))
        out.emplace_back(r, i);
  return out;
}

IndexSet SupportPattern::row_complement() const { return complement(row_support, n); }

IndexSet SupportPattern::column_complement(Index col) const {
  return complement(column_support.at(col), m);
}

void SupportPattern::validate() const {
  if (column_support.size() != L || omega_star.size() != L) {
    throw ValidationError("SupportPattern: per-column set count differs from L");
  }
  const Index kmax = k_max();
  for (Index i = 0; i < L; ++i) {
    const auto& star = omega_star[i];
    const auto& om = column_support[i];
    if (star.size() != m - kmax) {
      throw ValidationError("SupportPattern: |Omega_i*| != m - k_max");
    }
    for (Index r : star) {
      if (r >= m || std::binary_search(om.begin(), om.end(), r)) {
        throw ValidationError("SupportPattern: Omega_i* intersects Omega_i");
      }
    }
  }
  for (Index r : row_support)
    if (r >= n) throw ValidationError("SupportPattern: T index out of range");
}

RealMatrix project_rows(const RealMatrix& m, const IndexSet& rows) {
  RealMatrix out(m.rows(), m.cols());
  for (Index r : rows) {
    if (r >= m.rows()) throw ValidationError("project_rows: index out of range");
    auto src = m.row(r);
    std::copy(src.begin(), src.end(), out.row(r).begin());
  }
  return out;
}

RealMatrix project_rows_complement(const RealMatrix& m, const IndexSet& rows) {
  RealMatrix out = m;
  for (Index r : rows) {
    if (r >= m.rows()) throw ValidationError("project_rows_complement: index out of range");
    auto dst = out.row(r);
    std::fill(dst.begin(), dst.end(), 0.0);
  }
  return out;
}

RealMatrix project_entries(const RealMatrix& m, const EntrySet& entries) {
  RealMatrix out(m.rows(), m.cols());
  for (auto [r, c] : entries) {
    if (r >= m.rows() || c >= m.cols()) {
      throw ValidationError("project_entries: index out of range");
    }
    out(r, c) = m(r, c);
  }
  return out;
}

RealMatrix project_entries(const RealMatrix& m, const std::vector<IndexSet>& per_column) {
  if (per_column.size() != m.cols()) {
    throw ValidationError("project_entries: one row set per column required");
  }
  RealMatrix out(m.rows(), m.cols());
  for (Index c = 0; c < per_column.size(); ++c)
    for (Index r : per_column[c]) {
      if (r >= m.rows()) throw ValidationError("project_entries: index out of range");
      out(r, c) = m(r, c);
    }
  return out;
}

RealMatrix project_entries_complement(const RealMatrix& m,
                                      const std::vector<IndexSet>& per_column) {
  if (per_column.size() != m.cols()) {
    throw ValidationError("project_entries_complement: one row set per column required");
  }
  RealMatrix out = m;
  for (Index c = 0; c < per_column.size(); ++c)
    for (Index r : per_column[c]) {
      if (r >= m.rows()) throw ValidationError("project_entries_complement: index out of range");
      out(r, c) = 0.0;
    }
  return out;
}

IndexSet nonzero_rows(const RealMatrix& m, double zero_tol) {
  IndexSet out;
  for (Index r = 0; r < m.rows(); ++r)
    if (norm2(m.row(r)) > zero_tol) out.push_back(r);
  return out;
}

std::vector<IndexSet> nonzero_entries_by_column(const RealMatrix& m, double zero_tol) {
  std::vector<IndexSet> out(m.cols());
  for (Index r = 0; r < m.rows(); ++r)
    for (Index c = 0; c < m.cols(); ++c)
      if (std::abs(m(r, c)) > zero_tol) out[c].push_back(r);
  return out;
}

}  // namespace rgl
