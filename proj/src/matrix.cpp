#include "rgl/matrix.hpp"

#include <cmath>

namespace rgl {

RealMatrix::RealMatrix(Index rows, Index cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {
  if (rows == 0 || cols == 0) {
    throw ValidationError("RealMatrix: shape must be at least 1x1");
  }
}

RealMatrix::RealMatrix(Index rows, Index cols, std::vector<double> row_major)
    : rows_(rows), cols_(cols), data_(std::move(row_major)) {
  if (rows == 0 || cols == 0) {
    throw ValidationError("RealMatrix: shape must be at least 1x1");
  }
  if (data_.size() != rows * cols) {
    throw ValidationError("RealMatrix: entry count does not match shape");
  }
}

RealMatrix::RealMatrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  if (rows_ == 0 || cols_ == 0) {
    throw ValidationError("RealMatrix: shape must be at least 1x1");
  }
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw ValidationError("RealMatrix: ragged rows");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

RealMatrix RealMatrix::identity(Index k) {
  RealMatrix out(k, k);
  for (Index i = 0; i < k; ++i) out(i, i) = 1.0;
  return out;
}

RealMatrix RealMatrix::diagonal(std::span<const double> diag) {
  RealMatrix out(diag.size(), diag.size());
  for (Index i = 0; i < diag.size(); ++i) out(i, i) = diag[i];
  return out;
}

std::vector<double> RealMatrix::column(Index c) const {
  std::vector<double> out(rows_);
  for (Index r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

void RealMatrix::set_column(Index c, std::span<const double> values) {
  if (values.size() != rows_) {
    throw ValidationError("set_column: length does not match row count");
  }
  for (Index r = 0; r < rows_; ++r) (*this)(r, c) = values[r];
}

RealMatrix RealMatrix::transpose() const {
  RealMatrix out(cols_, rows_);
  for (Index r = 0; r < rows_; ++r)
    for (Index c = 0; c < cols_; ++c) out(c, r) = (*this)(r, c);
  return out;
}

RealMatrix& RealMatrix::operator+=(const RealMatrix& other) {
  require_same_shape(*this, other, "operator+=");
  for (Index k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
  return *this;
}

RealMatrix& RealMatrix::operator-=(const RealMatrix& other) {
  require_same_shape(*this, other, "operator-=");
  for (Index k = 0; k < data_.size(); ++k) data_[k] -= other.data_[k];
  return *this;
}

RealMatrix& RealMatrix::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

bool RealMatrix::all_finite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

RealMatrix operator+(RealMatrix a, const RealMatrix& b) { return a += b; }
RealMatrix operator-(RealMatrix a, const RealMatrix& b) { return a -= b; }
RealMatrix operator*(RealMatrix a, double s) { return a *= s; }
RealMatrix operator*(double s, RealMatrix a) { return a *= s; }

RealMatrix matmul(const RealMatrix& a, const RealMatrix& b) {
  if (a.cols() != b.rows()) throw ValidationError("matmul: inner dimension mismatch");
  RealMatrix out(a.rows(), b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    auto orow = out.row(i);
    for (Index k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      auto brow = b.row(k);
      for (Index j = 0; j < b.cols(); ++j) orow[j] += aik * brow[j];
    }
  }
  return out;
}

std::vector<double> matvec(const RealMatrix& a, std::span<const double> x) {
  if (x.size() != a.cols()) throw ValidationError("matvec: length mismatch");
  std::vector<double> y(a.rows(), 0.0);
  for (Index i = 0; i < a.rows(); ++i) {
    auto r = a.row(i);
    double acc = 0.0;
    for (Index j = 0; j < r.size(); ++j) acc += r[j] * x[j];
    y[i] = acc;
  }
  return y;
}

std::vector<double> matvec_transposed(const RealMatrix& a,
                                      std::span<const double> x) {
  if (x.size() != a.rows()) throw ValidationError("matvec_transposed: length mismatch");
  std::vector<double> y(a.cols(), 0.0);
  for (Index i = 0; i < a.rows(); ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    auto r = a.row(i);
    for (Index j = 0; j < r.size(); ++j) y[j] += r[j] * xi;
  }
  return y;
}

double inner(const RealMatrix& a, const RealMatrix& b) {
  require_same_shape(a, b, "inner");
  double acc = 0.0;
  auto da = a.data();
  auto db = b.data();
  for (Index k = 0; k < da.size(); ++k) acc += da[k] * db[k];
  return acc;
}

void require_same_shape(const RealMatrix& a, const RealMatrix& b,
                        const std::string& what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ValidationError(what + ": shape mismatch (" + std::to_string(a.rows()) +
                          "x" + std::to_string(a.cols()) + " vs " +
                          std::to_string(b.rows()) + "x" + std::to_string(b.cols()) +
                          ")");
  }
}

}  // namespace rgl
