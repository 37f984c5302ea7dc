#include "adbn/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "adbn/error.hpp"

namespace adbn::linalg {

namespace {

// Scaled matrix has max exit rate <= 0.5 (so infinity norm <= 1); 18 terms
// leave a truncation error below 1/19! ~ 8e-18 per squaring level.
constexpr double kScaledRateBound = 0.5;
constexpr int kTaylorOrder = 18;

}  // namespace

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() == 0 ? 0 : rows.begin()->size()) {
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) {
      throw Error(Errc::DomainMismatch, "ragged matrix literal");
    }
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

double Matrix::norm_inf() const {
  double best = 0.0;
  for (std::size_t r = 0; r < rows_; ++r) {
    double s = 0.0;
    for (double v : row(r)) s += std::abs(v);
    best = std::max(best, s);
  }
  return best;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols_ != b.rows_) throw Error(Errc::DomainMismatch, "matrix product shape");
  Matrix c(a.rows_, b.cols_);
  for (std::size_t i = 0; i < a.rows_; ++i) {
    for (std::size_t k = 0; k < a.cols_; ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
    }
  }
  return c;
}

Matrix operator*(double s, const Matrix& m) {
  Matrix out = m;
  for (double& v : out.data_) v *= s;
  return out;
}

Matrix operator+(const Matrix& a, const Matrix& b) {
  if (a.rows_ != b.rows_ || a.cols_ != b.cols_) {
    throw Error(Errc::DomainMismatch, "matrix sum shape");
  }
  Matrix out = a;
  for (std::size_t i = 0; i < out.data_.size(); ++i) out.data_[i] += b.data_[i];
  return out;
}

double IntensityMatrix::max_exit_rate() const {
  double best = 0.0;
  for (std::size_t i = 0; i < size(); ++i) best = std::max(best, exit_rate(i));
  return best;
}

IntensityMatrix validate_intensity(Matrix m) {
  if (!m.square() || m.rows() == 0) {
    throw Error(Errc::NotSquare, "intensity matrix must be square and non-empty");
  }
  const std::size_t n = m.rows();
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double v = m(i, j);
      if (!std::isfinite(v)) {
        throw Error(Errc::NegativeRate, "non-finite rate");
      }
      if (i != j && v < 0.0) {
        std::ostringstream os;
        os << "rate (" << i << "," << j << ") = " << v;
        throw Error(Errc::NegativeRate, os.str());
      }
      sum += v;
    }
    if (std::abs(sum) > kIntensityRowTolerance) {
      std::ostringstream os;
      os << "row " << i << " sums to " << sum;
      throw Error(Errc::RowSumNonzero, os.str());
    }
  }
  return IntensityMatrix(std::move(m));
}

StochasticMatrix StochasticMatrix::from_rounded(Matrix m) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto r = m.row(i);
    double sum = 0.0;
    for (double& v : r) {
      if (v < 0.0) v = 0.0;
      sum += v;
    }
    if (!(sum > 0.0) || !std::isfinite(sum)) {
      throw Error(Errc::DomainMismatch, "row cannot be normalized");
    }
    for (double& v : r) v /= sum;
  }
  return StochasticMatrix(std::move(m));
}

StochasticMatrix matrix_exp(const IntensityMatrix& q, double dt) {
  if (dt < 0.0 || !std::isfinite(dt)) {
    throw Error(Errc::NegativeDuration, "matrix_exp needs dt >= 0");
  }
  const std::size_t n = q.size();
  const double rate = q.max_exit_rate() * dt;
  if (rate == 0.0) return StochasticMatrix::from_rounded(Matrix::identity(n));

  int squarings = 0;
  if (rate > kScaledRateBound) {
    squarings = static_cast<int>(std::ceil(std::log2(rate / kScaledRateBound)));
  }
  const Matrix a = std::ldexp(dt, -squarings) * q.matrix();

  // Horner form: I + A(I + A/2(I + A/3(...))).
  Matrix sum = Matrix::identity(n);
  for (int k = kTaylorOrder; k >= 1; --k) {
    sum = Matrix::identity(n) + (1.0 / k) * (a * sum);
  }
  for (int s = 0; s < squarings; ++s) sum = sum * sum;
  return StochasticMatrix::from_rounded(std::move(sum));
}

StochasticMatrix embedded_transitions(const IntensityMatrix& q) {
  const std::size_t n = q.size();
  Matrix p(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    double exit = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) exit += q(i, j);
    }
    if (!(exit > 0.0)) {
      throw Error(Errc::AbsorbingState, "state " + std::to_string(i) + " has no exit");
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) p(i, j) = q(i, j) / exit;
    }
  }
  return StochasticMatrix::from_rounded(std::move(p));
}

double sample_sojourn(double rate, std::mt19937_64& rng) {
  if (!(rate > 0.0) || !std::isfinite(rate)) {
    throw Error(Errc::NonpositiveRate, "sojourn rate must be positive");
  }
  std::exponential_distribution<double> dist(rate);
  return dist(rng);
}

}  // namespace adbn::linalg
