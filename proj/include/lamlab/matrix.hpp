#pragma once

#include <array>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string_view>
#include <vector>

namespace lamlab {

// Largest supported column count. Matrices are stored inline so that atoms,
// tree leaves and per-cell integrands never allocate.
inline constexpr int kMaxCols = 8;

// Default relative tolerance of rank_le_one when called standalone.
inline constexpr double kDefaultRankTol = 1e-10;

// A real 2 x n matrix, n in [2, kMaxCols]. Indices are zero based:
// (row, col) with row in {0, 1} and col in [0, n).
class Mat2xN {
 public:
  Mat2xN() : Mat2xN(2) {}
  explicit Mat2xN(int n);

  // Rows given as two lists of equal length.
  Mat2xN(std::initializer_list<double> row0, std::initializer_list<double> row1);
  static Mat2xN from_rows(std::span<const double> row0, std::span<const double> row1);

  static Mat2xN zeros(int n) { return Mat2xN(n); }
  static Mat2xN identity2();
  // a (2-vector) outer b (n-vector).
  static Mat2xN outer(std::span<const double> a, std::span<const double> b);

  int cols() const noexcept { return n_; }
  double operator()(int row, int col) const noexcept { return v_[row * kMaxCols + col]; }
  double& operator()(int row, int col) noexcept { return v_[row * kMaxCols + col]; }

  bool all_finite() const noexcept;
  // Largest absolute entry.
  double max_abs() const noexcept;
  double frobenius2() const noexcept;

  Mat2xN& operator+=(const Mat2xN& o);
  Mat2xN& operator-=(const Mat2xN& o);
  Mat2xN& operator*=(double s) noexcept;

  friend Mat2xN operator+(Mat2xN a, const Mat2xN& b) { return a += b; }
  friend Mat2xN operator-(Mat2xN a, const Mat2xN& b) { return a -= b; }
  friend Mat2xN operator*(double s, Mat2xN a) { return a *= s; }
  friend Mat2xN operator*(Mat2xN a, double s) { return a *= s; }
  friend Mat2xN operator-(Mat2xN a) { return a *= -1.0; }

  // Exact entrywise equality (same n).
  friend bool operator==(const Mat2xN& a, const Mat2xN& b) noexcept;

 private:
  int n_;
  std::array<double, 2 * kMaxCols> v_{};
};

// Entrywise max-norm of a - b; throws Shape on mixed n.
double distance_inf(const Mat2xN& a, const Mat2xN& b);

enum class SubspaceTag { Full, Tri, Diag };

std::string_view to_string(SubspaceTag tag);
SubspaceTag subspace_from_string(std::string_view s);

// Tri: entries (2,1)..(2,n-1) vanish. Diag: Tri and entry (1,n) vanishes.
// Both use |x| <= tol, with tol = 0 meaning exact zeros.
bool in_subspace(const Mat2xN& x, SubspaceTag tag, double tol = 0.0);

// Every 2x2 minor of d is at most tol * max(1, |d|_inf^2) in magnitude.
bool rank_le_one(const Mat2xN& d, double tol = kDefaultRankTol);
// Largest |minor| / max(1, |d|_inf^2); zero exactly iff rank(d) <= 1.
double rank_one_residual(const Mat2xN& d);

Mat2xN project_diag(const Mat2xN& x);
// A_k X B_k with A_k = diag(1, k) and B_k = diag(1, ..., 1, 1/k).
Mat2xN project_k(const Mat2xN& x, double k);

double det2(const Mat2xN& x);

// Dense square matrix, used for the right factor of X -> A X B.
class SquareMatrix {
 public:
  explicit SquareMatrix(int n);
  SquareMatrix(int n, std::vector<double> row_major);
  static SquareMatrix identity(int n);
  static SquareMatrix diagonal(std::span<const double> d);

  int size() const noexcept { return n_; }
  double operator()(int r, int c) const noexcept { return a_[r * n_ + c]; }
  double& operator()(int r, int c) noexcept { return a_[r * n_ + c]; }
  double determinant() const;

 private:
  int n_;
  std::vector<double> a_;
};

// A X B for a 2x2 matrix A (passed as a 2x2 Mat2xN) and invertible n x n B.
// singular_tol is the tau_sub threshold on |det B|.
Mat2xN conjugate(const Mat2xN& x, const Mat2xN& a, const SquareMatrix& b, double singular_tol = 0.0);

}  // namespace lamlab
