#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace tiltbound {

using Vector = std::vector<double>;

/// Small dense row-major matrix. Everything in this library works on chains
/// with a handful of states, so there is no sparse path.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix from_rows(const std::vector<std::vector<double>>& rows);
  static Matrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool square() const noexcept { return rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }

  Matrix transposed() const;
  double max_entry() const;
  double min_entry() const;

  /// Principal submatrix on the given (ordered) index set.
  Matrix principal(std::span<const std::size_t> index) const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// M v
Vector multiply(const Matrix& m, std::span<const double> v);
/// wᵀ M
Vector left_multiply(std::span<const double> w, const Matrix& m);

double sup_norm(std::span<const double> v);
double sum(std::span<const double> v);
double dot(std::span<const double> a, std::span<const double> b);
double max_abs_difference(const Matrix& a, const Matrix& b);

/// Solves A x = b by Gaussian elimination with partial pivoting. Exactly
/// singular pivots are nudged to machine epsilon times the matrix scale, which
/// is what inverse iteration wants near an eigenvalue.
Vector solve_nudged(Matrix a, Vector b);

}  // namespace tiltbound
