// SPDX-License-Identifier: MIT
//
// Shared numeric substrate: a small dense row-major matrix, numerically
// stable softmax / log-sum-exp, and a Moore-Penrose pseudoinverse.  All
// computation is IEEE double precision; inputs are validated to be finite.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "infergap/error.hpp"

namespace infergap {

using Vec = std::vector<double>;

// Relative cutoff below which singular values are treated as exact zeros
// when inverting.
inline constexpr double kSingularValueCutoff = 1e-10;
// A vector is accepted as a probability distribution when it is entrywise
// nonnegative and its mass is within this tolerance of one.
inline constexpr double kProbMassTolerance = 1e-9;

struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  Vec a;  // row-major, rows*cols entries

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), a(r * c, fill) {}

  static Matrix zeros(std::size_t r, std::size_t c) { return Matrix(r, c); }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
  }

  static Matrix from_rows(const std::vector<Vec>& rows_in) {
    if (rows_in.empty()) fail(errc::invalid_argument, "matrix needs at least one row");
    Matrix m(rows_in.size(), rows_in.front().size());
    for (std::size_t i = 0; i < m.rows; ++i) {
      if (rows_in[i].size() != m.cols)
        fail(errc::invalid_argument, "ragged rows in matrix literal");
      for (std::size_t j = 0; j < m.cols; ++j) m.at(i, j) = rows_in[i][j];
    }
    return m;
  }

  double& at(std::size_t i, std::size_t j) { return a[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return a[i * cols + j]; }

  Vec row(std::size_t i) const {
    return Vec(a.begin() + static_cast<std::ptrdiff_t>(i * cols),
               a.begin() + static_cast<std::ptrdiff_t>((i + 1) * cols));
  }

  void set_row(std::size_t i, const Vec& v) {
    if (v.size() != cols) fail(errc::invalid_argument, "row length mismatch");
    std::copy(v.begin(), v.end(), a.begin() + static_cast<std::ptrdiff_t>(i * cols));
  }

  bool finite() const {
    return std::all_of(a.begin(), a.end(), [](double x) { return std::isfinite(x); });
  }

  void require_finite(const std::string& what) const {
    if (!finite()) fail(errc::invalid_argument, what + ": non-finite entry");
  }
};

inline bool operator==(const Matrix& x, const Matrix& y) {
  return x.rows == y.rows && x.cols == y.cols && x.a == y.a;
}

inline Matrix matmul(const Matrix& x, const Matrix& y) {
  if (x.cols != y.rows) fail(errc::invalid_argument, "matmul: inner dimension mismatch");
  Matrix out(x.rows, y.cols);
  for (std::size_t i = 0; i < x.rows; ++i)
    for (std::size_t k = 0; k < x.cols; ++k) {
      const double xv = x.at(i, k);
      if (xv == 0.0) continue;
      for (std::size_t j = 0; j < y.cols; ++j) out.at(i, j) += xv * y.at(k, j);
    }
  return out;
}

inline Matrix transpose(const Matrix& x) {
  Matrix out(x.cols, x.rows);
  for (std::size_t i = 0; i < x.rows; ++i)
    for (std::size_t j = 0; j < x.cols; ++j) out.at(j, i) = x.at(i, j);
  return out;
}

inline Matrix add(const Matrix& x, const Matrix& y) {
  if (x.rows != y.rows || x.cols != y.cols)
    fail(errc::invalid_argument, "add: shape mismatch");
  Matrix out = x;
  for (std::size_t i = 0; i < out.a.size(); ++i) out.a[i] += y.a[i];
  return out;
}

// Row vector times matrix: v (1 x rows) * m (rows x cols).
inline Vec vec_mat(const Vec& v, const Matrix& m) {
  if (v.size() != m.rows) fail(errc::invalid_argument, "vec_mat: dimension mismatch");
  Vec out(m.cols, 0.0);
  for (std::size_t i = 0; i < m.rows; ++i) {
    const double vi = v[i];
    if (vi == 0.0) continue;
    for (std::size_t j = 0; j < m.cols; ++j) out[j] += vi * m.at(i, j);
  }
  return out;
}

inline double dot(const Vec& x, const Vec& y) {
  if (x.size() != y.size()) fail(errc::invalid_argument, "dot: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

inline double l2_norm(const Vec& v) { return std::sqrt(dot(v, v)); }

inline Vec vec_add(const Vec& x, const Vec& y) {
  if (x.size() != y.size()) fail(errc::invalid_argument, "vec_add: dimension mismatch");
  Vec out = x;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += y[i];
  return out;
}

inline Vec vec_sub(const Vec& x, const Vec& y) {
  if (x.size() != y.size()) fail(errc::invalid_argument, "vec_sub: dimension mismatch");
  Vec out = x;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= y[i];
  return out;
}

inline Vec vec_scale(const Vec& x, double s) {
  Vec out = x;
  for (double& v : out) v *= s;
  return out;
}

inline void require_finite(const Vec& v, const std::string& what) {
  for (double x : v)
    if (!std::isfinite(x)) fail(errc::invalid_argument, what + ": non-finite entry");
}

// Max-shifted softmax.  Rejects empty or non-finite input.
inline Vec softmax(const Vec& logits) {
  if (logits.empty()) fail(errc::invalid_argument, "softmax: empty input");
  require_finite(logits, "softmax");
  const double shift = *std::max_element(logits.begin(), logits.end());
  Vec out(logits.size());
  double denom = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - shift);
    denom += out[i];
  }
  for (double& x : out) x /= denom;
  return out;
}

// Max-shifted log(sum(exp)).  Rejects empty or non-finite input.
inline double log_sum_exp(const Vec& logits) {
  if (logits.empty()) fail(errc::invalid_argument, "log_sum_exp: empty input");
  require_finite(logits, "log_sum_exp");
  const double shift = *std::max_element(logits.begin(), logits.end());
  double acc = 0.0;
  for (double x : logits) acc += std::exp(x - shift);
  return shift + std::log(acc);
}

inline bool is_probability_vector(const Vec& v, double mass_tol = kProbMassTolerance) {
  if (v.empty()) return false;
  double mass = 0.0;
  for (double x : v) {
    if (!std::isfinite(x) || x < 0.0) return false;
    mass += x;
  }
  return std::abs(mass - 1.0) <= mass_tol;
}

inline void require_probability_vector(const Vec& v, const std::string& what) {
  if (!is_probability_vector(v))
    fail(errc::invalid_argument, what + ": not a probability vector");
}

// Moore-Penrose pseudoinverse via SVD.  Singular values below
// kSingularValueCutoff times the largest singular value are truncated to
// zero before inverting, so rank-deficient inputs are handled exactly.
inline Matrix pseudoinverse(const Matrix& m) {
  if (m.rows == 0 || m.cols == 0)
    fail(errc::invalid_argument, "pseudoinverse: empty matrix");
  m.require_finite("pseudoinverse");
  Eigen::MatrixXd em(static_cast<Eigen::Index>(m.rows), static_cast<Eigen::Index>(m.cols));
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t j = 0; j < m.cols; ++j)
      em(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m.at(i, j);

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(em, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double cutoff = sv.size() > 0 ? kSingularValueCutoff * sv.maxCoeff() : 0.0;
  Eigen::VectorXd inv = sv;
  for (Eigen::Index i = 0; i < inv.size(); ++i)
    inv(i) = sv(i) > cutoff && sv(i) > 0.0 ? 1.0 / sv(i) : 0.0;

  Eigen::MatrixXd pinv = svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
  Matrix out(m.cols, m.rows);
  for (std::size_t i = 0; i < out.rows; ++i)
    for (std::size_t j = 0; j < out.cols; ++j)
      out.at(i, j) = pinv(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  return out;
}

inline Vec mat_vec(const Matrix& m, const Vec& v) {
  if (v.size() != m.cols) fail(errc::invalid_argument, "mat_vec: dimension mismatch");
  Vec out(m.rows, 0.0);
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t j = 0; j < m.cols; ++j) out[i] += m.at(i, j) * v[j];
  return out;
}

}  // namespace infergap
