#include <doctest.h>

#include <cmath>

#include "lamlab/convexity.hpp"
#include "lamlab/error.hpp"
#include "lamlab/measure.hpp"
#include "lamlab/random.hpp"
#include "support.hpp"

using namespace lamlab;

namespace {

const Mat2xN kI = Mat2xN::identity2();

DiscreteMeasure random_measure(Rng& rng, int n, int atoms) {
  std::vector<Atom> a;
  double total = 0.0;
  for (int i = 0; i < atoms; ++i) {
    Mat2xN x(n);
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < n; ++c) x(r, c) = uniform(rng, -2, 2);
    const double w = uniform(rng, 0.1, 1.0);
    total += w;
    a.push_back({w, x});
  }
  for (Atom& at : a) at.weight /= total;
  return DiscreteMeasure(std::move(a));
}

}  // namespace

TEST_CASE("measure validation") {
  CHECK_THROWS_AS(DiscreteMeasure({}), Error);
  CHECK_CODE(DiscreteMeasure({{0.5, kI}, {0.4, -kI}}), ErrorCode::InvalidArgument);
  CHECK_THROWS_AS(DiscreteMeasure({{1.5, kI}, {-0.5, -kI}}), Error);
  CHECK_CODE(DiscreteMeasure({{0.5, kI}, {0.5, Mat2xN(3)}}), ErrorCode::Shape);
  MeasureOptions renorm;
  renorm.renormalize = true;
  const DiscreteMeasure mu({{1.0, kI}, {3.0, -kI}}, renorm);
  CHECK(mu[0].weight == doctest::Approx(0.25));
  CHECK(mu[1].weight == doctest::Approx(0.75));
}

TEST_CASE("merging keeps the weight-averaged matrix in first-occurrence order") {
  const Mat2xN a({1, 0}, {0, 0});
  const Mat2xN a2({1 + 5e-13, 0}, {0, 0});
  const DiscreteMeasure mu({{0.25, a}, {0.5, -a}, {0.25, a2}});
  REQUIRE(mu.size() == 2);
  CHECK(mu[0].weight == doctest::Approx(0.5));
  CHECK(mu[0].matrix(0, 0) == doctest::Approx(1 + 2.5e-13).epsilon(1e-15));
  CHECK(mu[1].matrix == -a);
  MeasureOptions keep;
  keep.merge = false;
  CHECK(DiscreteMeasure({{0.5, a}, {0.5, a}}, keep).size() == 2);
}

TEST_CASE("barycenter spec examples") {
  CHECK(barycenter(DiscreteMeasure::dirac(kI)) == kI);
  CHECK(barycenter(DiscreteMeasure({{0.5, kI}, {0.5, -kI}})) == Mat2xN(2));
  const DiscreteMeasure mu({{0.5, Mat2xN({0, 1}, {0, 0})}, {0.5, Mat2xN({0, 2}, {0, 0})}});
  CHECK(barycenter(mu) == Mat2xN({0, 1.5}, {0, 0}));
}

TEST_CASE("pushforward spec examples") {
  Rng rng(1);
  const DiscreteMeasure mu = random_measure(rng, 3, 5);
  const DiscreteMeasure id = pushforward(mu, [](const Mat2xN& x) { return x; });
  CHECK(approx_equal(id, mu, 0.0, 0.0));

  const DiscreteMeasure pm({{0.5, Mat2xN({0, 1}, {0, 0})}, {0.5, Mat2xN({0, -1}, {0, 0})}});
  const DiscreteMeasure p = pushforward(pm, project_diag);
  REQUIRE(p.size() == 1);
  CHECK(p[0].weight == 1.0);
  CHECK(p[0].matrix == Mat2xN(2));

  for (double k : {1.0, 3.0, 16.0}) {
    const DiscreteMeasure pk = pushforward(mu, [k](const Mat2xN& x) { return project_k(x, k); });
    CHECK(distance_inf(barycenter(pk), project_k(barycenter(mu), k)) <= 1e-12);
  }
}

TEST_CASE("pushforward is functorial and commutes with barycenters") {
  Rng rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const DiscreteMeasure mu = random_measure(rng, 2, 6);
    auto f = [](const Mat2xN& x) { return project_k(x, 4); };
    auto g = [](const Mat2xN& x) { return 2.0 * x + Mat2xN({1, 0}, {0, -1}); };
    const DiscreteMeasure once = pushforward(mu, [&](const Mat2xN& x) { return g(f(x)); });
    const DiscreteMeasure twice = pushforward(pushforward(mu, f), g);
    CHECK(approx_equal(once, twice, 1e-12, 1e-15));
    CHECK(distance_inf(barycenter(once), g(f(barycenter(mu)))) <= 1e-12 * (1 + barycenter(once).max_abs()));
  }
}

TEST_CASE("polyconvexity_defect spec examples") {
  CHECK(polyconvexity_defect(DiscreteMeasure::dirac(Mat2xN({1, 2}, {3, 4}))) == 0.0);
  CHECK(polyconvexity_defect(DiscreteMeasure({{0.5, kI}, {0.5, -kI}})) == 1.0);
  Rng rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    Mat2xN x({uniform(rng, -2, 2), uniform(rng, -2, 2)}, {uniform(rng, -2, 2), uniform(rng, -2, 2)});
    const double a[] = {normal(rng), normal(rng)}, b[] = {normal(rng), normal(rng)};
    const double w = uniform(rng, 0.1, 0.9);
    const DiscreteMeasure mu({{w, x}, {1 - w, x + Mat2xN::outer(a, b)}});
    CHECK(std::abs(polyconvexity_defect(mu)) <= 1e-12);
  }
  CHECK_THROWS_AS(polyconvexity_defect(DiscreteMeasure::dirac(Mat2xN(3))), Error);
}

TEST_CASE("polyconvexity_defect is invariant under relabeling and merging") {
  const Mat2xN a({1, 2}, {3, 4}), b({0, 1}, {-1, 2});
  const DiscreteMeasure m1({{0.2, a}, {0.3, b}, {0.5, a}});
  const DiscreteMeasure m2({{0.3, b}, {0.7, a}});
  CHECK(polyconvexity_defect(m1) == doctest::Approx(polyconvexity_defect(m2)));
}

TEST_CASE("jensen_defect spec examples") {
  Rng rng(6);
  const TestFunction lin = builtin("linear");
  for (int trial = 0; trial < 50; ++trial)
    CHECK(std::abs(jensen_defect(lin, random_measure(rng, 3, 4))) <= 1e-12);
  CHECK(jensen_defect(builtin("neg_norm2"), DiscreteMeasure({{0.5, kI}, {0.5, -kI}})) == -2.0);
  for (int trial = 0; trial < 50; ++trial)
    CHECK(jensen_defect(builtin("norm2"), random_measure(rng, 2, 5)) >= 0.0);
}

TEST_CASE("moment_distance spec examples") {
  Rng rng(7);
  const DiscreteMeasure mu = random_measure(rng, 3, 4);
  CHECK(moment_distance(mu, mu, 3) == 0.0);
  const DiscreteMeasure nu = random_measure(rng, 3, 3);
  CHECK(moment_distance(mu, nu, 1) >= distance_inf(barycenter(mu), barycenter(nu)) - 1e-15);
  CHECK(moment_distance(mu, nu, 1) == doctest::Approx(distance_inf(barycenter(mu), barycenter(nu))));
  CHECK_CODE(moment_distance(mu, nu, 4), ErrorCode::InvalidArgument);
  CHECK_THROWS_AS(moment_distance(mu, random_measure(rng, 2, 2), 1), Error);
}

TEST_CASE("moment_distance enumerates every mixed monomial") {
  // Two measures with equal first moments that differ only in E[x11 x22].
  const DiscreteMeasure a({{0.5, Mat2xN({1, 0}, {0, 1})}, {0.5, Mat2xN({-1, 0}, {0, -1})}});
  const DiscreteMeasure b({{0.5, Mat2xN({1, 0}, {0, -1})}, {0.5, Mat2xN({-1, 0}, {0, 1})}});
  CHECK(moment_distance(a, b, 1) == 0.0);
  CHECK(moment_distance(a, b, 2) == doctest::Approx(2.0));
  CHECK(moment_distance(a, b, 3) == doctest::Approx(2.0));
}

TEST_CASE("P^(k) pushforwards converge like 1/k in degree-2 moments") {
  const DiscreteMeasure mu({{0.5, Mat2xN({2, 1}, {0, 3})}, {0.5, Mat2xN({3, 0.5}, {0, -1})}});
  const DiscreteMeasure lim = pushforward(mu, project_diag);
  double prev = moment_distance(mu, lim, 2);
  for (int k = 2; k <= 64; k *= 2) {
    const double d = moment_distance(pushforward(mu, [k](const Mat2xN& x) { return project_k(x, k); }), lim, 2);
    CHECK(d / prev == doctest::Approx(0.5).epsilon(0.2));
    prev = d;
  }
}

TEST_CASE("approx_equal ignores order and respects tolerances") {
  const DiscreteMeasure a({{0.25, kI}, {0.75, -kI}});
  const DiscreteMeasure b({{0.75, -kI}, {0.25, kI}});
  CHECK(approx_equal(a, b, 0.0, 0.0));
  const DiscreteMeasure c({{0.25 + 1e-9, kI}, {0.75 - 1e-9, -kI}});
  CHECK_FALSE(approx_equal(a, c, 0.0, 1e-12));
  CHECK(approx_equal(a, c, 0.0, 1e-8));
  CHECK_FALSE(approx_equal(a, DiscreteMeasure::dirac(kI), 1.0, 1.0));
}
