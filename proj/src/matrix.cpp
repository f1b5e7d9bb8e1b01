#include "lamlab/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lamlab/error.hpp"

namespace lamlab {

namespace {

void check_cols(int n) {
  if (n < 2 || n > kMaxCols)
    fail(ErrorCode::Shape, "column count " + std::to_string(n) + " outside [2, " +
                               std::to_string(kMaxCols) + "]");
}

void check_same(const Mat2xN& a, const Mat2xN& b) {
  if (a.cols() != b.cols())
    fail(ErrorCode::Shape, "mixed column counts " + std::to_string(a.cols()) + " and " +
                               std::to_string(b.cols()));
}

}  // namespace

Mat2xN::Mat2xN(int n) : n_(n) { check_cols(n); }

Mat2xN::Mat2xN(std::initializer_list<double> row0, std::initializer_list<double> row1)
    : n_(static_cast<int>(row0.size())) {
  check_cols(n_);
  if (row1.size() != row0.size()) fail(ErrorCode::Shape, "rows of unequal length");
  std::copy(row0.begin(), row0.end(), v_.begin());
  std::copy(row1.begin(), row1.end(), v_.begin() + kMaxCols);
}

Mat2xN Mat2xN::from_rows(std::span<const double> row0, std::span<const double> row1) {
  if (row0.size() != row1.size()) fail(ErrorCode::Shape, "rows of unequal length");
  Mat2xN m(static_cast<int>(row0.size()));
  for (int j = 0; j < m.n_; ++j) {
    m(0, j) = row0[j];
    m(1, j) = row1[j];
  }
  return m;
}

Mat2xN Mat2xN::identity2() { return Mat2xN({1.0, 0.0}, {0.0, 1.0}); }

Mat2xN Mat2xN::outer(std::span<const double> a, std::span<const double> b) {
  if (a.size() != 2) fail(ErrorCode::Shape, "left factor of a rank-one matrix must have 2 entries");
  Mat2xN m(static_cast<int>(b.size()));
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < m.n_; ++j) m(i, j) = a[i] * b[j];
  return m;
}

bool Mat2xN::all_finite() const noexcept {
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < n_; ++j)
      if (!std::isfinite((*this)(i, j))) return false;
  return true;
}

double Mat2xN::max_abs() const noexcept {
  double m = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < n_; ++j) m = std::max(m, std::abs((*this)(i, j)));
  return m;
}

double Mat2xN::frobenius2() const noexcept {
  double s = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < n_; ++j) s += (*this)(i, j) * (*this)(i, j);
  return s;
}

Mat2xN& Mat2xN::operator+=(const Mat2xN& o) {
  check_same(*this, o);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < n_; ++j) (*this)(i, j) += o(i, j);
  return *this;
}

Mat2xN& Mat2xN::operator-=(const Mat2xN& o) {
  check_same(*this, o);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < n_; ++j) (*this)(i, j) -= o(i, j);
  return *this;
}

Mat2xN& Mat2xN::operator*=(double s) noexcept {
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < n_; ++j) (*this)(i, j) *= s;
  return *this;
}

bool operator==(const Mat2xN& a, const Mat2xN& b) noexcept {
  if (a.n_ != b.n_) return false;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < a.n_; ++j)
      if (a(i, j) != b(i, j)) return false;
  return true;
}

double distance_inf(const Mat2xN& a, const Mat2xN& b) {
  check_same(a, b);
  double m = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < a.cols(); ++j) m = std::max(m, std::abs(a(i, j) - b(i, j)));
  return m;
}

std::string_view to_string(SubspaceTag tag) {
  switch (tag) {
    case SubspaceTag::Full: return "full";
    case SubspaceTag::Tri: return "tri";
    case SubspaceTag::Diag: return "diag";
  }
  return "full";
}

SubspaceTag subspace_from_string(std::string_view s) {
  if (s == "full" || s == "Full") return SubspaceTag::Full;
  if (s == "tri" || s == "Tri") return SubspaceTag::Tri;
  if (s == "diag" || s == "Diag") return SubspaceTag::Diag;
  fail(ErrorCode::InvalidArgument, "unknown subspace '" + std::string(s) + "'");
}

bool in_subspace(const Mat2xN& x, SubspaceTag tag, double tol) {
  if (tag == SubspaceTag::Full) return true;
  const int n = x.cols();
  for (int j = 0; j + 1 < n; ++j)
    if (std::abs(x(1, j)) > tol) return false;
  if (tag == SubspaceTag::Diag && std::abs(x(0, n - 1)) > tol) return false;
  return true;
}

double rank_one_residual(const Mat2xN& d) {
  const int n = d.cols();
  double worst = 0.0;
  for (int j = 0; j < n; ++j)
    for (int k = j + 1; k < n; ++k)
      worst = std::max(worst, std::abs(d(0, j) * d(1, k) - d(0, k) * d(1, j)));
  const double s = d.max_abs();
  return worst / std::max(1.0, s * s);
}

bool rank_le_one(const Mat2xN& d, double tol) {
  const int n = d.cols();
  const double s = d.max_abs();
  const double bound = tol * std::max(1.0, s * s);
  for (int j = 0; j < n; ++j)
    for (int k = j + 1; k < n; ++k)
      if (std::abs(d(0, j) * d(1, k) - d(0, k) * d(1, j)) > bound) return false;
  return true;
}

Mat2xN project_diag(const Mat2xN& x) {
  Mat2xN p = x;
  const int n = x.cols();
  p(0, n - 1) = 0.0;
  for (int j = 0; j + 1 < n; ++j) p(1, j) = 0.0;
  return p;
}

Mat2xN project_k(const Mat2xN& x, double k) {
  if (!(k >= 1.0)) fail(ErrorCode::InvalidArgument, "project_k requires k >= 1");
  Mat2xN p = x;
  const int n = x.cols();
  for (int j = 0; j < n; ++j) p(1, j) *= k;
  for (int i = 0; i < 2; ++i) p(i, n - 1) /= k;
  return p;
}

double det2(const Mat2xN& x) {
  if (x.cols() != 2) fail(ErrorCode::NotSquare, "det2 needs a 2x2 matrix, got 2x" + std::to_string(x.cols()));
  return x(0, 0) * x(1, 1) - x(0, 1) * x(1, 0);
}

SquareMatrix::SquareMatrix(int n) : n_(n), a_(static_cast<std::size_t>(n) * n, 0.0) {
  if (n < 1) fail(ErrorCode::Shape, "square matrix needs n >= 1");
}

SquareMatrix::SquareMatrix(int n, std::vector<double> row_major) : n_(n), a_(std::move(row_major)) {
  if (n < 1 || a_.size() != static_cast<std::size_t>(n) * n)
    fail(ErrorCode::Shape, "square matrix data does not match n = " + std::to_string(n));
}

SquareMatrix SquareMatrix::identity(int n) {
  SquareMatrix m(n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

SquareMatrix SquareMatrix::diagonal(std::span<const double> d) {
  SquareMatrix m(static_cast<int>(d.size()));
  for (int i = 0; i < m.n_; ++i) m(i, i) = d[i];
  return m;
}

double SquareMatrix::determinant() const {
  // Gaussian elimination with partial pivoting on a copy.
  std::vector<double> a = a_;
  double det = 1.0;
  for (int c = 0; c < n_; ++c) {
    int piv = c;
    for (int r = c + 1; r < n_; ++r)
      if (std::abs(a[r * n_ + c]) > std::abs(a[piv * n_ + c])) piv = r;
    if (a[piv * n_ + c] == 0.0) return 0.0;
    if (piv != c) {
      for (int k = 0; k < n_; ++k) std::swap(a[c * n_ + k], a[piv * n_ + k]);
      det = -det;
    }
    det *= a[c * n_ + c];
    for (int r = c + 1; r < n_; ++r) {
      const double f = a[r * n_ + c] / a[c * n_ + c];
      for (int k = c; k < n_; ++k) a[r * n_ + k] -= f * a[c * n_ + k];
    }
  }
  return det;
}

Mat2xN conjugate(const Mat2xN& x, const Mat2xN& a, const SquareMatrix& b, double singular_tol) {
  const int n = x.cols();
  if (a.cols() != 2) fail(ErrorCode::Shape, "left factor must be 2x2");
  if (b.size() != n) fail(ErrorCode::Shape, "right factor must be " + std::to_string(n) + "x" + std::to_string(n));
  if (std::abs(b.determinant()) <= singular_tol) fail(ErrorCode::SingularB, "right factor B is singular");
  Mat2xN ax(n);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < n; ++j) ax(i, j) = a(i, 0) * x(0, j) + a(i, 1) * x(1, j);
  Mat2xN out(n);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += ax(i, k) * b(k, j);
      out(i, j) = s;
    }
  return out;
}

}  // namespace lamlab
