#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "lamlab/function.hpp"
#include "lamlab/matrix.hpp"
#include "lamlab/random.hpp"

namespace lamlab {

// Registry of built-in test functions:
//   linear            fixed linear form, any n                   linear
//   norm2             |X|^2                                       convex
//   x11sq             X11^2                                       convex
//   det               det X, n = 2                                quasiaffine
//   det_plus_linear   det X + linear, n = 2                       quasiaffine
//   neg_det_plus_linear  -det X + linear, n = 2                   quasiaffine
//   minor_sum         sum of all 2x2 minors, any n                quasiaffine
//   norm2_plus_minors |X|^2 + 4 * minor_sum, any n                polyconvex
//   alibert_dacorogna |X|^4 - 1.1 |X|^2 det X, n = 2              rank_one_convex
//   neg_norm2         -|X|^2                                      none
// Throws UnknownId for anything else.
TestFunction builtin(std::string_view id);
std::vector<std::string> builtin_ids();

// Builtins with a class implying rank-one convexity that accept n columns.
std::vector<TestFunction> rank_one_convex_builtins(int n);

// Polynomial of total degree <= 4 in the entries:
//   {"n": 2, "class": "none", "terms": [{"coef": c, "powers": [[..n..], [..n..]]}]}
TestFunction polynomial_from_json(std::string_view json_text, std::string id = "user");

// Resolves "builtin-id" or "user:<path to polynomial JSON>".
TestFunction resolve_function(std::string_view spec);

// g = f o T with T(X) = A X B; keeps the class of f.
TestFunction compose_linear(TestFunction f, const Mat2xN& a, const SquareMatrix& b);

inline constexpr double kFalsifyTol = 1e-9;

struct RankOneConvexityReport {
  // Most negative lambda f(X) + (1-lambda) f(Y) - f(lambda X + (1-lambda) Y)
  // seen over rank-one segments [X, Y].
  double worst_defect = 0.0;
  bool falsified = false;  // worst defect below -tol * max(1, value scale)
  std::size_t evaluations = 0;
  Mat2xN witness_x;
  Mat2xN witness_y;
  double witness_lambda = 0.0;
  bool interrupted = false;
};

struct RankOneSampling {
  std::size_t samples = 1000;
  std::uint64_t seed = 0;
  double box = 1.0;
  double tol = kFalsifyTol;
};

// One-sided Monte Carlo test: a falsified report proves f is not rank-one
// convex; a clean report is evidence only.
RankOneConvexityReport rank_one_convexity_defect(const TestFunction& f, int n,
                                                 const RankOneSampling& opts);

// Displacement phi: [0,1]^n -> R^2 built from separable sine modes
//   phi_c(x) = sum amplitude * prod_d sin(2 pi k_d x_d)
// with integer k_d >= 1. Every mode vanishes on the boundary of the cube and
// extends periodically, so midpoint quadrature of trigonometric integrands is
// exact up to roundoff once the grid exceeds the integrand's bandwidth.
struct SineMode {
  int component = 0;  // 0 or 1
  double amplitude = 0.0;
  std::vector<int> freq;  // one positive integer per axis
};

struct TestField {
  int n = 2;
  int grid = 64;  // quadrature points per axis
  std::vector<SineMode> modes;

  static TestField random(Rng& rng, int n, int modes_per_component, double amplitude, int grid,
                          int max_freq = 3);
  // Analytic gradient at a point of [0,1]^n.
  Mat2xN gradient(std::span<const double> x) const;
  // Cell midpoint gradients, cell index with the first axis slowest.
  std::vector<Mat2xN> gradient_samples() const;
};

// (1 / m(Omega)) int f(X0 + grad phi) - f(X0) over the unit cube by midpoint
// quadrature. Points outside f's domain throw Domain.
double quasiconvexity_defect(const TestFunction& f, const Mat2xN& x0, const TestField& field);

}  // namespace lamlab
