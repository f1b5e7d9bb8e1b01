#pragma once

#include <functional>
#include <string>
#include <string_view>

#include "lamlab/matrix.hpp"

namespace lamlab {

// Declared convexity class of a test function. The list is ordered so that
// every class from Linear through RankOneConvex implies rank-one convexity.
enum class ConvexityClass { Linear, Quasiaffine, Convex, Polyconvex, RankOneConvex, None };

std::string_view to_string(ConvexityClass c);
ConvexityClass convexity_from_string(std::string_view s);

// True for every class that implies rank-one convexity.
bool implies_rank_one_convex(ConvexityClass c);

// Where eval is defined: all of M^{2xn}, or the half space X12 >= delta_plus.
enum class FunctionDomain { Full, Plus };

struct TestFunction {
  std::string id;
  int arity = 0;  // required column count; 0 accepts any n
  ConvexityClass declared_class = ConvexityClass::None;
  FunctionDomain domain = FunctionDomain::Full;
  std::function<double(const Mat2xN&)> eval;

  // Checks the arity, evaluates, and rejects non-finite values with Domain.
  double operator()(const Mat2xN& x) const;
  bool accepts(int n) const noexcept { return arity == 0 || arity == n; }
};

}  // namespace lamlab
