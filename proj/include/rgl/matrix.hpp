#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rgl {

using Index = std::size_t;

/// Raised when caller-supplied data violates a documented precondition.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when an iterative routine exhausts its iteration cap.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dense row-major real matrix with value semantics.
///
/// Shapes are always at least 1x1 for matrices built through the public
/// constructors; `RealMatrix()` is an empty placeholder that only exists so
/// the type can live in default-constructed aggregates.
class RealMatrix {
 public:
  RealMatrix() = default;
  RealMatrix(Index rows, Index cols, double fill = 0.0);
  RealMatrix(Index rows, Index cols, std::vector<double> row_major);
  RealMatrix(std::initializer_list<std::initializer_list<double>> rows);

  static RealMatrix identity(Index k);
  static RealMatrix diagonal(std::span<const double> diag);

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  Index size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(Index r, Index c) { return data_[r * cols_ + c]; }
  double operator()(Index r, Index c) const { return data_[r * cols_ + c]; }

  std::span<double> row(Index r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(Index r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::vector<double> column(Index c) const;
  void set_column(Index c, std::span<const double> values);

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  RealMatrix transpose() const;

  RealMatrix& operator+=(const RealMatrix& other);
  RealMatrix& operator-=(const RealMatrix& other);
  RealMatrix& operator*=(double s);

  bool operator==(const RealMatrix& other) const = default;

  bool all_finite() const;

 private:
  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<double> data_;
};

RealMatrix operator+(RealMatrix a, const RealMatrix& b);
RealMatrix operator-(RealMatrix a, const RealMatrix& b);
RealMatrix operator*(RealMatrix a, double s);
RealMatrix operator*(double s, RealMatrix a);

/// Plain matrix product, serial.
RealMatrix matmul(const RealMatrix& a, const RealMatrix& b);

/// y = A x
std::vector<double> matvec(const RealMatrix& a, std::span<const double> x);
/// y = A' x
std::vector<double> matvec_transposed(const RealMatrix& a,
                                      std::span<const double> x);

/// Frobenius inner product <A, B>.
double inner(const RealMatrix& a, const RealMatrix& b);

void require_same_shape(const RealMatrix& a, const RealMatrix& b,
                        const std::string& what);

}  // namespace rgl
