#include "lamlab/duality.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "lamlab/error.hpp"

namespace lamlab {

namespace {

void check_admissible(const Mat2xN& x, double delta_plus) {
  if (x.cols() != 2) fail(ErrorCode::NotSquare, "the partial Legendre transform acts on 2x2 matrices");
  const double x12 = x(0, 1);
  if (!(x12 >= delta_plus) || !(x12 <= 1.0 / delta_plus)) {
    std::ostringstream os;
    os << "X12 = " << x12 << " outside the admissible range [" << delta_plus << ", "
       << 1.0 / delta_plus << "]";
    fail(ErrorCode::Domain, os.str());
  }
}

}  // namespace

PlusMatrix::PlusMatrix(const Mat2xN& x, double delta_plus) : m_(x) { check_admissible(x, delta_plus); }

bool is_admissible(const Mat2xN& x, double delta_plus) noexcept {
  return x.cols() == 2 && x(0, 1) >= delta_plus && x(0, 1) <= 1.0 / delta_plus;
}

Mat2xN psi(const Mat2xN& x, double delta_plus) {
  check_admissible(x, delta_plus);
  const double inv = 1.0 / x(0, 1);
  const double det = x(0, 0) * x(1, 1) - x(0, 1) * x(1, 0);
  return Mat2xN({-x(0, 0) * inv, inv}, {-det * inv, x(1, 1) * inv});
}

PlusMatrix psi(const PlusMatrix& x, double delta_plus) {
  return PlusMatrix(psi(x.matrix(), delta_plus), delta_plus);
}

double psi_condition(const Mat2xN& x) {
  if (x.cols() != 2) fail(ErrorCode::NotSquare, "psi_condition needs a 2x2 matrix");
  const double a = x(0, 0), b = x(0, 1), d = x(1, 1);
  if (!(b > 0.0)) fail(ErrorCode::Domain, "psi_condition needs X12 > 0");
  // psi = [-a/b, 1/b; c - a d / b, d/b]; rows of the Jacobian w.r.t. (a, b, c, d).
  const std::array<std::array<double, 4>, 4> jac{{
      {-1.0 / b, a / (b * b), 0.0, 0.0},
      {0.0, -1.0 / (b * b), 0.0, 0.0},
      {-d / b, a * d / (b * b), 1.0, -a / b},
      {0.0, -d / (b * b), 0.0, 1.0 / b},
  }};
  double norm = 0.0;
  for (const auto& row : jac) {
    double s = 0.0;
    for (double v : row) s += std::abs(v);
    norm = std::max(norm, s);
  }
  const double c = x(1, 0);
  const double out = std::max({std::abs(a / b), 1.0 / b, std::abs(c - a * d / b), std::abs(d / b)});
  return norm * x.max_abs() / out;
}

TestFunction dual_function(TestFunction h, double delta_plus) {
  TestFunction out;
  out.id = "dual(" + h.id + ")";
  out.arity = 2;
  out.declared_class = h.declared_class;
  out.domain = FunctionDomain::Plus;
  out.eval = [h = std::move(h), delta_plus](const Mat2xN& x) {
    return x(0, 1) * h(psi(x, delta_plus));
  };
  return out;
}

DiscreteMeasure dual_measure(const DiscreteMeasure& mu, const DualityOptions& opts,
                             std::vector<std::string>* warnings) {
  const Mat2xN bar = barycenter(mu);
  for (const Atom& a : mu.atoms()) check_admissible(a.matrix, opts.delta_plus);
  std::vector<Atom> atoms;
  atoms.reserve(mu.size());
  for (const Atom& a : mu.atoms())
    atoms.push_back({a.weight * a.matrix(0, 1) / bar(0, 1), psi(a.matrix, opts.delta_plus)});
  if (warnings) {
    for (std::size_t i = 0; i < atoms.size(); ++i)
      for (std::size_t j = i + 1; j < atoms.size(); ++j)
        if (distance_inf(atoms[i].matrix, atoms[j].matrix) <= opts.merge_tol) {
          std::ostringstream os;
          os << "dual atoms " << i << " and " << j << " coincide within " << opts.merge_tol;
          warnings->push_back(os.str());
        }
  }
  MeasureOptions mo;
  mo.merge = false;
  return DiscreteMeasure(std::move(atoms), mo);
}

Mat2xN dual_barycenter_closed_form(const DiscreteMeasure& mu, const DualityOptions& opts) {
  for (const Atom& a : mu.atoms()) check_admissible(a.matrix, opts.delta_plus);
  const Mat2xN bar = barycenter(mu);
  double det_integral = 0.0;
  for (const Atom& a : mu.atoms()) det_integral += a.weight * det2(a.matrix);
  const double inv = 1.0 / bar(0, 1);
  return Mat2xN({-bar(0, 0) * inv, inv}, {-det_integral * inv, bar(1, 1) * inv});
}

PolyconvexDualityReport polyconvex_duality_check(const DiscreteMeasure& mu,
                                                 const DualityOptions& opts) {
  const DiscreteMeasure dual = dual_measure(mu, opts);
  const Mat2xN gap = psi(barycenter(mu), opts.delta_plus) - barycenter(dual);
  return {polyconvexity_defect(mu), gap.max_abs()};
}

}  // namespace lamlab
