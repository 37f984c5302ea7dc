#pragma once

// Small dense matrix utilities for Markov jump processes. State counts in
// this project are single digits, so everything is dense and row-major.

#include <cstddef>
#include <initializer_list>
#include <random>
#include <span>
#include <vector>

namespace adbn::linalg {

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool square() const noexcept { return rows_ == cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> data() const noexcept { return data_; }

  // Maximum absolute row sum.
  double norm_inf() const;

  friend Matrix operator*(const Matrix& a, const Matrix& b);
  friend Matrix operator*(double s, const Matrix& m);
  friend Matrix operator+(const Matrix& a, const Matrix& b);
  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline constexpr double kIntensityRowTolerance = 1e-12;
inline constexpr double kStochasticRowTolerance = 1e-10;

// Rate matrix Q of a Markov jump process: off-diagonals q_ij >= 0, diagonal
// -q_i, rows summing to zero. Only obtainable through validate_intensity.
class IntensityMatrix {
 public:
  std::size_t size() const noexcept { return q_.rows(); }
  const Matrix& matrix() const noexcept { return q_; }
  double operator()(std::size_t i, std::size_t j) const { return q_(i, j); }
  // Total exit rate q_i of state i.
  double exit_rate(std::size_t i) const { return -q_(i, i); }
  double max_exit_rate() const;

  friend bool operator==(const IntensityMatrix&, const IntensityMatrix&) = default;

 private:
  explicit IntensityMatrix(Matrix q) : q_(std::move(q)) {}
  friend IntensityMatrix validate_intensity(Matrix m);
  Matrix q_;
};

class StochasticMatrix {
 public:
  std::size_t size() const noexcept { return p_.rows(); }
  const Matrix& matrix() const noexcept { return p_; }
  double operator()(std::size_t i, std::size_t j) const { return p_(i, j); }
  std::span<const double> row(std::size_t i) const { return p_.row(i); }

  // Clamps entries below zero (round-off) and renormalizes each row; throws
  // if a row cannot be made stochastic.
  static StochasticMatrix from_rounded(Matrix m);

  friend bool operator==(const StochasticMatrix&, const StochasticMatrix&) = default;

 private:
  explicit StochasticMatrix(Matrix p) : p_(std::move(p)) {}
  Matrix p_;
};

// Throws NotSquare, NegativeRate or RowSumNonzero. Never rescales.
IntensityMatrix validate_intensity(Matrix m);

// exp(Q * dt) by scaling and squaring with a fixed-order Taylor series on the
// scaled matrix. Throws NegativeDuration for dt < 0.
StochasticMatrix matrix_exp(const IntensityMatrix& q, double dt);

// Jump-chain probabilities q_ij / q_i with zero diagonal. Throws AbsorbingState
// if some state has no exit.
StochasticMatrix embedded_transitions(const IntensityMatrix& q);

// Exponential sojourn with density q_i exp(-q_i t). Throws NonpositiveRate.
double sample_sojourn(double rate, std::mt19937_64& rng);

}  // namespace adbn::linalg
