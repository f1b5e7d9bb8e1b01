#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "lamlab/function.hpp"
#include "lamlab/matrix.hpp"

namespace lamlab {

inline constexpr double kWeightTol = 1e-12;
inline constexpr double kDefaultMergeTol = 1e-12;

struct Atom {
  double weight;
  Mat2xN matrix;
};

struct MeasureOptions {
  // Atoms closer than this (entrywise max-norm) are merged.
  double merge_tol = kDefaultMergeTol;
  // Merge coincident atoms at construction. Off only for measures whose atom
  // order must be preserved one-for-one (dual measures).
  bool merge = true;
  // Rescale weights to sum to one instead of rejecting them.
  bool renormalize = false;
};

// A finitely supported probability measure sum_i w_i delta_{X_i} on 2 x n
// matrices. Weights are positive and sum to one within kWeightTol; the
// constructor validates and never silently renormalizes unless asked.
class DiscreteMeasure {
 public:
  DiscreteMeasure(std::vector<Atom> atoms, const MeasureOptions& opts = {});
  static DiscreteMeasure dirac(const Mat2xN& x) { return DiscreteMeasure({{1.0, x}}); }

  int cols() const noexcept { return n_; }
  std::size_t size() const noexcept { return atoms_.size(); }
  std::span<const Atom> atoms() const noexcept { return atoms_; }
  const Atom& operator[](std::size_t i) const { return atoms_.at(i); }

 private:
  int n_;
  std::vector<Atom> atoms_;
};

Mat2xN barycenter(const DiscreteMeasure& mu);

using MatrixMap = std::function<Mat2xN(const Mat2xN&)>;

// Image measure: atoms (w_i, map(X_i)), merged.
DiscreteMeasure pushforward(const DiscreteMeasure& mu, const MatrixMap& map,
                            double merge_tol = kDefaultMergeTol);

// sum w_i det X_i - det(barycenter); zero iff the measure is polyconvex.
double polyconvexity_defect(const DiscreteMeasure& mu);

// sum w_i f(X_i) - f(barycenter).
double jensen_defect(const TestFunction& f, const DiscreteMeasure& mu);

// Largest absolute difference over all monomials in the 2n entries of total
// degree 1..degree, between the moments of mu and nu.
double moment_distance(const DiscreteMeasure& mu, const DiscreteMeasure& nu, int degree);

// Atom-set equality up to tolerances, independent of atom order.
bool approx_equal(const DiscreteMeasure& a, const DiscreteMeasure& b, double matrix_tol,
                  double weight_tol);

}  // namespace lamlab
