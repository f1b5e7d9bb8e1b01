#include <doctest.h>

#include <cmath>

#include "lamlab/convexity.hpp"
#include "lamlab/duality.hpp"
#include "lamlab/random.hpp"
#include "support.hpp"

using namespace lamlab;

namespace {

Mat2xN random_plus(Rng& rng) {
  return Mat2xN({uniform(rng, -2, 2), uniform(rng, 0.2, 3)}, {uniform(rng, -2, 2), uniform(rng, -2, 2)});
}

TestFunction constant_one() {
  return {"one", 2, ConvexityClass::Linear, FunctionDomain::Full, [](const Mat2xN&) { return 1.0; }};
}

TestFunction x12() {
  return {"x12", 2, ConvexityClass::Linear, FunctionDomain::Full, [](const Mat2xN& x) { return x(0, 1); }};
}

// psi written out from its entries, independent of the library formula.
Mat2xN psi_reference(const Mat2xN& x) {
  const double a = x(0, 0), b = x(0, 1), c = x(1, 0), d = x(1, 1);
  return Mat2xN({-a / b, 1 / b}, {-(a * d - b * c) / b, d / b});
}

}  // namespace

TEST_CASE("psi spec examples") {
  CHECK(psi(Mat2xN({0, 1}, {0, 0})) == Mat2xN({0, 1}, {0, 0}));
  CHECK(psi(Mat2xN({1, 2}, {3, 4})) == Mat2xN({-0.5, 0.5}, {1, 2}));
}

TEST_CASE("psi is an involution matching the entrywise formula") {
  Rng rng(12);
  for (int trial = 0; trial < 2000; ++trial) {
    const Mat2xN x = random_plus(rng);
    const Mat2xN y = psi(x);
    CHECK(distance_inf(y, psi_reference(x)) <= 1e-14 * (1 + y.max_abs()));
    CHECK(distance_inf(psi(y), x) <= 1e-12 * (1 + x.max_abs()) * psi_condition(x));
  }
}

TEST_CASE("psi domain errors") {
  CHECK_CODE(psi(Mat2xN({1, 0}, {0, 1})), ErrorCode::Domain);
  CHECK_CODE(psi(Mat2xN({1, -1}, {0, 1})), ErrorCode::Domain);
  CHECK_CODE(psi(Mat2xN({1, 1e-9}, {0, 1})), ErrorCode::Domain);
  CHECK_CODE(psi(Mat2xN({1, 2e8}, {0, 1})), ErrorCode::Domain);
  CHECK_CODE(psi(Mat2xN({1, 1e-9}, {0, 1}), 1e-10), std::nullopt);
  CHECK_CODE(psi(Mat2xN(3)), ErrorCode::NotSquare);
  CHECK_CODE(PlusMatrix(Mat2xN({1, 0}, {0, 1})), ErrorCode::Domain);
  CHECK(is_admissible(Mat2xN({0, 1}, {0, 0})));
  CHECK_FALSE(is_admissible(Mat2xN({0, 1, 0}, {0, 0, 0})));
}

TEST_CASE("psi maps the determinant-free plane into Tri") {
  Rng rng(13);
  for (int trial = 0; trial < 500; ++trial) {
    const double a = uniform(rng, -2, 2), b = uniform(rng, 0.2, 3), d = uniform(rng, -2, 2);
    const Mat2xN x({a, b}, {a * d / b, d});
    CHECK(std::abs(psi(x)(1, 0)) <= 1e-14 * (1 + std::abs(a * d)));
  }
}

TEST_CASE("psi maps rank-one segments in the plus half space to rank-one segments") {
  Rng rng(14);
  int checked = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    const Mat2xN x = random_plus(rng);
    const double a[] = {normal(rng), normal(rng)}, b[] = {normal(rng), normal(rng)};
    const Mat2xN y = x + 0.3 * Mat2xN::outer(a, b);
    if (!is_admissible(y) || y(0, 1) < 0.2) continue;
    ++checked;
    CHECK(rank_le_one(psi(x) - psi(y), 1e-9));
  }
  CHECK(checked > 500);
}

TEST_CASE("dual_function spec examples and double dual") {
  const TestFunction one_star = dual_function(constant_one());
  const TestFunction x12_star = dual_function(x12());
  Rng rng(15);
  const TestFunction h = builtin("alibert_dacorogna");
  const TestFunction h_star_star = dual_function(dual_function(h));
  for (int trial = 0; trial < 500; ++trial) {
    const Mat2xN x = random_plus(rng);
    CHECK(one_star(x) == doctest::Approx(x(0, 1)));
    CHECK(x12_star(x) == doctest::Approx(1.0));
    CHECK(h_star_star(x) == doctest::Approx(h(x)).epsilon(1e-10));
  }
  CHECK_CODE(one_star(Mat2xN({1, -1}, {0, 1})), ErrorCode::Domain);
  CHECK(one_star.domain == FunctionDomain::Plus);
}

TEST_CASE("dual_measure spec example and closed form") {
  const DiscreteMeasure mu({{0.5, Mat2xN({0, 1}, {0, 0})}, {0.5, Mat2xN({0, 2}, {0, 0})}});
  const DiscreteMeasure d = dual_measure(mu);
  REQUIRE(d.size() == 2);
  CHECK(d[0].weight == doctest::Approx(1.0 / 3));
  CHECK(d[1].weight == doctest::Approx(2.0 / 3));
  CHECK(d[0].matrix == Mat2xN({0, 1}, {0, 0}));
  CHECK(d[1].matrix == Mat2xN({0, 0.5}, {0, 0}));
  CHECK(distance_inf(dual_barycenter_closed_form(mu), Mat2xN({0, 2.0 / 3}, {0, 0})) <= 1e-15);
  CHECK(distance_inf(barycenter(d), dual_barycenter_closed_form(mu)) <= 1e-15);
  CHECK_CODE(dual_measure(DiscreteMeasure({{0.5, Mat2xN::identity2()}, {0.5, -Mat2xN::identity2()}})),
             ErrorCode::Domain);
}

TEST_CASE("dual barycenter equals the closed form for every measure") {
  Rng rng(16);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<Atom> atoms;
    const int k = uniform_int(rng, 1, 6);
    for (int i = 0; i < k; ++i) atoms.push_back({1.0, random_plus(rng)});
    MeasureOptions o;
    o.renormalize = true;
    const DiscreteMeasure mu(std::move(atoms), o);
    const Mat2xN closed = dual_barycenter_closed_form(mu);
    CHECK(distance_inf(barycenter(dual_measure(mu)), closed) <= 1e-12 * (1 + closed.max_abs()));
  }
}

TEST_CASE("dual barycenter is psi of the barycenter exactly for polyconvex measures") {
  Rng rng(17);
  for (int trial = 0; trial < 300; ++trial) {
    const Mat2xN x = random_plus(rng);
    const double a[] = {normal(rng), 0.3 * normal(rng)}, b[] = {normal(rng), 0.3 * normal(rng)};
    const Mat2xN y = x + 0.2 * Mat2xN::outer(a, b);
    if (y(0, 1) < 0.2) continue;
    const DiscreteMeasure pc({{0.4, x}, {0.6, y}});
    const PolyconvexDualityReport r = polyconvex_duality_check(pc);
    CHECK(std::abs(r.defect) <= 1e-12);
    CHECK(r.barycenter_gap <= 1e-10);

    const DiscreteMeasure npc({{0.5, Mat2xN({1, 1}, {0, 1})}, {0.5, Mat2xN({-1, 1}, {0, -1})}});
    const PolyconvexDualityReport s = polyconvex_duality_check(npc);
    CHECK(s.defect == doctest::Approx(1.0));
    CHECK(s.barycenter_gap == doctest::Approx(1.0));
  }
}

TEST_CASE("Jensen defects transform through the dual pair") {
  // For polyconvex mu: jensen(h*, mu) = mean_12 * jensen(h, dual mu).
  Rng rng(18);
  const TestFunction h = builtin("norm2");
  const TestFunction h_star = dual_function(h);
  for (int trial = 0; trial < 300; ++trial) {
    const Mat2xN x = random_plus(rng);
    const double a[] = {normal(rng), 0.3 * normal(rng)}, b[] = {normal(rng), 0.3 * normal(rng)};
    const Mat2xN y = x + 0.2 * Mat2xN::outer(a, b);
    if (y(0, 1) < 0.2) continue;
    const DiscreteMeasure mu({{0.3, x}, {0.7, y}});
    const double mean12 = barycenter(mu)(0, 1);
    const double lhs = jensen_defect(h_star, mu);
    const double rhs = mean12 * jensen_defect(h, dual_measure(mu));
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-8).scale(1.0));
  }
}

TEST_CASE("dual_measure keeps atom order and warns on collisions") {
  const DiscreteMeasure mu({{0.5, Mat2xN({0, 1e7}, {0, 0})}, {0.5, Mat2xN({0, 1e7 + 1}, {0, 0})}});
  std::vector<std::string> warnings;
  const DiscreteMeasure d = dual_measure(mu, {}, &warnings);
  CHECK(d.size() == 2);
  CHECK(warnings.size() == 1);
  std::vector<std::string> none;
  dual_measure(DiscreteMeasure({{0.5, Mat2xN({0, 1}, {0, 0})}, {0.5, Mat2xN({0, 2}, {0, 0})}}), {}, &none);
  CHECK(none.empty());
}

TEST_CASE("psi_condition grows near the boundary") {
  CHECK(psi_condition(Mat2xN({0, 1e-3}, {0, 0})) == doctest::Approx(1.0));
  CHECK(psi_condition(Mat2xN({1, 1e-3}, {0, 1})) > psi_condition(Mat2xN({1, 1}, {0, 1})) * 100);
  CHECK_CODE(psi_condition(Mat2xN({0, 0}, {0, 0})), ErrorCode::Domain);
}
