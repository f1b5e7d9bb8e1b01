#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "lamlab/function.hpp"
#include "lamlab/random.hpp"

namespace lamlab {

// Piecewise-constant scalar field on the 2^level-per-axis dyadic grid of
// [0,1)^n, n in {1, 2, 3}. Cells are stored with the first axis slowest:
// index = sum_d i_d * side^(n-1-d).
class GridField {
 public:
  GridField(int n, int level);
  GridField(int n, int level, std::vector<double> values);

  int dim() const noexcept { return n_; }
  int level() const noexcept { return level_; }
  std::size_t side() const noexcept { return std::size_t{1} << level_; }
  std::size_t size() const noexcept { return values_.size(); }
  double cell_volume() const noexcept;

  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  double& operator[](std::size_t i) noexcept { return values_[i]; }

  double mean() const noexcept;
  double l2_norm() const noexcept;
  double max_abs() const noexcept;

 private:
  int n_;
  int level_;
  std::vector<double> values_;
};

double inner(const GridField& a, const GridField& b);
GridField operator-(const GridField& a, const GridField& b);
GridField operator+(const GridField& a, const GridField& b);
GridField operator*(double s, const GridField& a);

// Haar function h^(eps)_{j,k}. Bit d of eps is eps_{d+1}; eps != 0.
struct HaarIndex {
  int level = 0;
  std::array<int, 3> k{};
  unsigned eps = 1;
};

// Unnormalized product value in {-1, 0, +1}: eps_d = 1 factors are the
// rescaled chi_[0,1/2) - chi_[1/2,1), eps_d = 0 factors are the indicator
// of I_d. Zero outside the cube.
double haar_eval(const HaarIndex& idx, std::span<const double> x);

// Coefficients of a grid field at levels 0..L-1 in the L^2-normalized Haar
// system, plus the average over the unit cube.
class HaarCoefficients {
 public:
  HaarCoefficients(int n, int level);

  int dim() const noexcept { return n_; }
  int level() const noexcept { return level_; }
  unsigned eps_count() const noexcept { return (1u << n_) - 1; }
  std::size_t cubes(int j) const noexcept { return std::size_t{1} << (j * n_); }

  double mean = 0.0;
  double& at(int j, std::size_t cube, unsigned eps) { return detail_[j][cube * eps_count() + eps - 1]; }
  double at(int j, std::size_t cube, unsigned eps) const { return detail_[j][cube * eps_count() + eps - 1]; }
  double& at(const HaarIndex& idx);
  double at(const HaarIndex& idx) const;
  std::span<double> level_data(int j) { return detail_[j]; }
  std::span<const double> level_data(int j) const { return detail_[j]; }

  // Sum of squares of every coefficient including the mean.
  double energy() const;

  std::size_t cube_index(int j, std::span<const int> k) const;
  std::vector<int> cube_tuple(int j, std::size_t cube) const;

 private:
  int n_;
  int level_;
  std::vector<std::vector<double>> detail_;
};

HaarCoefficients analyze(const GridField& u);
GridField synthesize(const HaarCoefficients& c);

// Orthogonal projections onto spans of Haar functions; the cube average is
// never in any span and is dropped.
GridField project_eps(const GridField& u, unsigned eps);
GridField project_p1(const GridField& u);  // all eps with eps_n = 0
GridField project_p2(const GridField& u);  // eps = e_n

// Periodic Riesz transform on the field's own torus: Fourier multiplier
// -i xi_j / |xi| on integer frequencies. Nyquist components cannot carry an
// odd imaginary multiplier on a real grid and are left out of xi, so the 2^n
// all-Nyquist-or-zero modes (the constant among them) are annihilated.
GridField riesz(const GridField& u, int axis);

// Part of u in the kernel of every riesz(., j): the modes whose frequencies
// are 0 or Nyquist on each axis. For u orthogonal to these,
// sum_j riesz(riesz(u, j), j) = -u.
GridField riesz_kernel_part(const GridField& u);

// Spectral derivative d/dx_axis with the same frequency convention.
GridField spectral_derivative(const GridField& u, int axis);

// Dilated copy of u supported in [0, 1/factor)^n of a finer grid; factor is
// a power of two. Riesz transforms commute with dilations, so transforming
// the padded field approximates the transform on R^n without wrap-around.
GridField zero_pad(const GridField& u, int factor);

// |R_j (u - mean)|_2 for every axis j, computed on the zero-padded torus and
// expressed in the units of u.
std::vector<double> riesz_norms(const GridField& u, int padding = 2);

// |P^(eps) u|_2 / (|u|_2^(1/2) |R_j u|_2^(1/2)); +infinity if only the
// denominator vanishes. Throws ZeroField on u = 0, InvalidArgument unless
// eps_j = 1.
double interpolatory_ratio(const GridField& u, unsigned eps, int axis, int padding = 2);

// Mean-zero finite Haar expansion with coefficients at levels 0..max_level;
// each level gets a random scale so that coarse and fine content both occur.
GridField random_haar_field(Rng& rng, int n, int grid_level, int max_level);

// Gram matrix check of the normalized Haar system at grid level L via
// haar_eval quadrature: largest |<h_a, h_b> - delta_ab| over every pair with
// overlapping supports.
double haar_orthonormality_error(int n, int grid_level);

// Fields u_1..u_{n-1} (only eps_n = 0 coefficients) and v_n (only eps = e_n)
// defining the matrix field [[u_1 .. u_{n-1} 0], [0 .. 0 v_n]].
struct LemmaFields {
  std::vector<GridField> u;
  GridField v;
};

struct CoarsenResult {
  LemmaFields after_u;  // level-K details removed from the u row only
  LemmaFields after_v;  // and then from v_n
};

// Removes the level-K coefficients, first from the u row, then from v_n.
// Throws Shape on mixed grids, coefficients above level K, or coefficients
// outside the allowed eps sets.
CoarsenResult coarsen_step(const LemmaFields& fields, int K);

// Exact cell sum of f over the matrix field.
double lemma_integral(const TestFunction& f, const LemmaFields& fields);

LemmaFields random_lemma_fields(Rng& rng, int n, int grid_level, int max_level);

}  // namespace lamlab
