#pragma once

#include <string>
#include <vector>

#include "lamlab/function.hpp"
#include "lamlab/matrix.hpp"
#include "lamlab/measure.hpp"

namespace lamlab {

inline constexpr double kDefaultDeltaPlus = 1e-8;

struct DualityOptions {
  // Admissible matrices have delta_plus <= X12 <= 1 / delta_plus.
  double delta_plus = kDefaultDeltaPlus;
  double merge_tol = kDefaultMergeTol;
};

// A 2x2 matrix with positive (1,2) entry inside the configured guard.
class PlusMatrix {
 public:
  // Throws Domain unless x is 2x2 with delta_plus <= x(0,1) <= 1/delta_plus.
  PlusMatrix(const Mat2xN& x, double delta_plus = kDefaultDeltaPlus);

  const Mat2xN& matrix() const noexcept { return m_; }
  operator const Mat2xN&() const noexcept { return m_; }

 private:
  Mat2xN m_;
};

bool is_admissible(const Mat2xN& x, double delta_plus = kDefaultDeltaPlus) noexcept;

// The partial Legendre transform
//   psi(X) = (1 / X12) [[-X11, 1], [-det X, X22]],
// an involution of the half space X12 > 0.
PlusMatrix psi(const PlusMatrix& x, double delta_plus = kDefaultDeltaPlus);
Mat2xN psi(const Mat2xN& x, double delta_plus = kDefaultDeltaPlus);

// Relative condition number of psi at x in the max-norm, from the analytic
// Jacobian. Unbounded as X12 -> 0 with the other entries fixed.
double psi_condition(const Mat2xN& x);

// X -> X12 * h(psi(X)) on the guarded half space.
TestFunction dual_function(TestFunction h, double delta_plus = kDefaultDeltaPlus);

// Atoms (w_i X_i,12 / mean_12, psi(X_i)) in input order, never merged. If
// two images collide within merge_tol a message is appended to *warnings.
DiscreteMeasure dual_measure(const DiscreteMeasure& mu, const DualityOptions& opts = {},
                             std::vector<std::string>* warnings = nullptr);

// (1 / mean_12) [[-mean_11, 1], [-int det, mean_22]].
Mat2xN dual_barycenter_closed_form(const DiscreteMeasure& mu, const DualityOptions& opts = {});

struct PolyconvexDualityReport {
  double defect;          // polyconvexity_defect(mu)
  double barycenter_gap;  // |psi(bary mu) - bary(dual mu)|_inf
};

PolyconvexDualityReport polyconvex_duality_check(const DiscreteMeasure& mu,
                                                 const DualityOptions& opts = {});

}  // namespace lamlab
