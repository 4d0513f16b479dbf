#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace conevol {

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n);
  static Matrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  Matrix transposed() const;
  double frobenius_norm() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);

double dot(std::span<const double> a, std::span<const double> b);
double squared_norm(std::span<const double> a);
double norm(std::span<const double> a);

struct EigenDecomposition {
  std::vector<double> values;  // descending
  Matrix vectors;              // column j is the eigenvector for values[j]
  int sweeps = 0;
};

/// Cyclic Jacobi eigensolver for a symmetric matrix. Throws NonConvergence
/// when the 50-sweep cap is exceeded and DomainError when `w` is not square
/// or not symmetric to 1e-12 relative.
EigenDecomposition symmetric_eigen(const Matrix& w);

/// Singular values (descending) by one-sided Jacobi.
std::vector<double> singular_values(const Matrix& a);

struct NnlsResult {
  std::vector<double> coefficients;
  std::size_t iterations = 0;
  double kkt_residual = 0.0;
};

/// Lawson-Hanson active-set NNLS: minimises ||A^T tau - b|| over tau >= 0,
/// where the rows of A are the generators. Throws NonConvergence after 3*m
/// outer iterations (m = A.rows()).
NnlsResult nnls_solve(const Matrix& generators, std::span<const double> b);

}  // namespace conevol
