#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "lamlab/convexity.hpp"
#include "lamlab/duality.hpp"
#include "lamlab/random.hpp"
#include "support.hpp"

using namespace lamlab;

namespace {

RankOneSampling sampling(std::size_t samples, std::uint64_t seed) {
  RankOneSampling s;
  s.samples = samples;
  s.seed = seed;
  return s;
}

Mat2xN random_mat(Rng& rng, int n) {
  Mat2xN x(n);
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < n; ++c) x(r, c) = uniform(rng, -1, 1);
  return x;
}

}  // namespace

TEST_CASE("builtin registry") {
  for (const std::string& id : builtin_ids()) {
    const TestFunction f = builtin(id);
    CHECK(f.id == id);
    CHECK(f.eval);
  }
  CHECK(builtin("det").declared_class == ConvexityClass::Quasiaffine);
  CHECK(builtin("neg_norm2").declared_class == ConvexityClass::None);
  CHECK(builtin("alibert_dacorogna").declared_class == ConvexityClass::RankOneConvex);
  CHECK_CODE(builtin("nope"), ErrorCode::UnknownId);
  CHECK_CODE(builtin("det")(Mat2xN(3)), ErrorCode::Shape);
  for (const TestFunction& f : rank_one_convex_builtins(3)) {
    CHECK(implies_rank_one_convex(f.declared_class));
    CHECK(f.accepts(3));
  }
  CHECK(convexity_from_string(to_string(ConvexityClass::Polyconvex)) == ConvexityClass::Polyconvex);
  CHECK_CODE(convexity_from_string("wobbly"), ErrorCode::InvalidArgument);
}

TEST_CASE("builtin values") {
  const Mat2xN x({1, 2}, {3, 4});
  CHECK(builtin("norm2")(x) == 30.0);
  CHECK(builtin("x11sq")(x) == 1.0);
  CHECK(builtin("det")(x) == -2.0);
  CHECK(builtin("neg_norm2")(x) == -30.0);
  CHECK(builtin("minor_sum")(x) == -2.0);
  CHECK(builtin("minor_sum")(Mat2xN({1, 2, 3}, {4, 5, 6})) == doctest::Approx(-3.0 - 6.0 - 3.0));
  CHECK(builtin("alibert_dacorogna")(x) == doctest::Approx(900.0 + 1.1 * 30.0 * 2.0));
}

TEST_CASE("rank-one convexity test on convex and quasiaffine functions") {
  for (const char* id : {"norm2", "x11sq", "linear", "norm2_plus_minors", "alibert_dacorogna"}) {
    const TestFunction f = builtin(id);
    const int n = f.accepts(3) ? 3 : 2;
    const RankOneConvexityReport r = rank_one_convexity_defect(f, n, sampling(2000, 1));
    CHECK_MESSAGE(!r.falsified, id);
    CHECK(r.evaluations > 0);
  }
  for (const char* id : {"det", "det_plus_linear", "neg_det_plus_linear", "minor_sum"}) {
    const RankOneConvexityReport r = rank_one_convexity_defect(builtin(id), 2, sampling(2000, 2));
    CHECK_MESSAGE(std::abs(r.worst_defect) <= 1e-10, id);
    CHECK_FALSE(r.falsified);
  }
}

TEST_CASE("neg_norm2 is falsified within 100 samples") {
  const RankOneConvexityReport r = rank_one_convexity_defect(builtin("neg_norm2"), 2, sampling(100, 3));
  REQUIRE(r.falsified);
  CHECK(r.worst_defect < 0);
  // Recompute the defect at the witness.
  const TestFunction f = builtin("neg_norm2");
  const double l = r.witness_lambda;
  const double d = l * f(r.witness_x) + (1 - l) * f(r.witness_y) - f(l * r.witness_x + (1 - l) * r.witness_y);
  CHECK(d == doctest::Approx(r.worst_defect));
  CHECK(rank_le_one(r.witness_x - r.witness_y));
}

TEST_CASE("rank-one sampling errors") {
  CHECK_CODE(rank_one_convexity_defect(builtin("det"), 3, sampling(10, 0)), ErrorCode::Shape);
  CHECK_CODE(rank_one_convexity_defect(builtin("norm2"), 2, sampling(0, 0)), ErrorCode::InvalidArgument);
}

TEST_CASE("TestField vanishes on the boundary and has the analytic gradient") {
  Rng rng(20);
  for (int n : {2, 3}) {
    const TestField field = TestField::random(rng, n, 3, 0.5, 16);
    // Finite differences of phi, assembled from the mode definition.
    auto phi = [&](std::span<const double> x, int comp) {
      double s = 0.0;
      for (const SineMode& m : field.modes) {
        if (m.component != comp) continue;
        double p = m.amplitude;
        for (int d = 0; d < n; ++d) p *= std::sin(2 * M_PI * m.freq[d] * x[d]);
        s += p;
      }
      return s;
    };
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<double> x(n);
      for (double& v : x) v = uniform(rng, 0.05, 0.95);
      std::vector<double> bnd = x;
      bnd[trial % n] = (trial % 2) ? 1.0 : 0.0;
      CHECK(std::abs(phi(bnd, 0)) + std::abs(phi(bnd, 1)) <= 1e-12);
      const Mat2xN g = field.gradient(x);
      const double h = 1e-6;
      for (int r = 0; r < 2; ++r)
        for (int d = 0; d < n; ++d) {
          std::vector<double> xp = x, xm = x;
          xp[d] += h;
          xm[d] -= h;
          CHECK(g(r, d) == doctest::Approx((phi(xp, r) - phi(xm, r)) / (2 * h)).epsilon(1e-6).scale(1.0));
        }
    }
  }
}

TEST_CASE("gradient samples of a field average to zero") {
  Rng rng(21);
  const TestField field = TestField::random(rng, 2, 3, 1.0, 32);
  const std::vector<Mat2xN> g = field.gradient_samples();
  REQUIRE(g.size() == 32u * 32u);
  Mat2xN mean(2);
  for (const Mat2xN& m : g) mean += m;
  CHECK((1.0 / g.size() * mean).max_abs() <= 1e-12);
}

TEST_CASE("quasiconvexity defects of affine and null Lagrangians vanish") {
  Rng rng(22);
  for (int trial = 0; trial < 10; ++trial) {
    const TestField f2 = TestField::random(rng, 2, 3, 0.5, 64);
    const Mat2xN x0 = random_mat(rng, 2);
    CHECK(std::abs(quasiconvexity_defect(builtin("linear"), x0, f2)) <= 1e-12);
    CHECK(std::abs(quasiconvexity_defect(builtin("det"), x0, f2)) <= 1e-10);
    CHECK(std::abs(quasiconvexity_defect(builtin("det_plus_linear"), x0, f2)) <= 1e-10);
    const TestField f3 = TestField::random(rng, 3, 2, 0.5, 24);
    CHECK(std::abs(quasiconvexity_defect(builtin("minor_sum"), random_mat(rng, 3), f3)) <= 1e-10);
  }
}

TEST_CASE("det defect at grid 256 for a smooth field") {
  Rng rng(23);
  const TestField field = TestField::random(rng, 2, 3, 0.5, 256);
  CHECK(std::abs(quasiconvexity_defect(builtin("det"), Mat2xN({1, 2}, {3, 4}), field)) <= 1e-6);
}

TEST_CASE("quasiconvexity defects of convex functions are nonnegative") {
  Rng rng(24);
  for (int trial = 0; trial < 20; ++trial) {
    const TestField field = TestField::random(rng, 2, 3, 0.7, 48);
    for (const char* id : {"norm2", "x11sq", "norm2_plus_minors", "alibert_dacorogna"})
      CHECK(quasiconvexity_defect(builtin(id), random_mat(rng, 2), field) >= -1e-8);
  }
}

TEST_CASE("midpoint quadrature converges for the squared norm") {
  // For |X0 + grad phi|^2 the defect is the exact mean of |grad phi|^2,
  // which for one mode is amplitude^2 pi^2 (k1^2 + k2^2).
  TestField field;
  field.n = 2;
  field.modes = {{0, 0.3, {1, 2}}};
  const double exact = 0.09 * M_PI * M_PI * 5.0;
  for (int grid : {8, 16, 64}) {
    field.grid = grid;
    CHECK(quasiconvexity_defect(builtin("norm2"), Mat2xN(2), field) == doctest::Approx(exact).epsilon(1e-12));
  }
  field.grid = 2;
  CHECK(std::abs(quasiconvexity_defect(builtin("norm2"), Mat2xN(2), field) - exact) > 1e-3);
}

TEST_CASE("quasiconvexity defect validation") {
  TestField field;
  field.modes = {{0, 0.3, {1, 2}}};
  CHECK_CODE(quasiconvexity_defect(builtin("norm2"), Mat2xN(3), field), ErrorCode::Shape);
  field.modes = {{2, 0.3, {1, 2}}};
  CHECK_CODE(quasiconvexity_defect(builtin("norm2"), Mat2xN(2), field), ErrorCode::Shape);
  field.modes = {{0, 0.3, {0, 2}}};
  CHECK_CODE(quasiconvexity_defect(builtin("norm2"), Mat2xN(2), field), ErrorCode::InvalidArgument);
  field.modes = {{0, 0.3, {1, 2}}};
  field.grid = 0;
  CHECK_CODE(quasiconvexity_defect(builtin("norm2"), Mat2xN(2), field), ErrorCode::InvalidArgument);
}

TEST_CASE("conjugation keeps rank-one convexity and null Lagrangians") {
  Rng rng(25);
  const Mat2xN a({2, 1}, {0, 1});
  const SquareMatrix b(2, {1, 1, 0, 3});
  const TestFunction g = compose_linear(builtin("alibert_dacorogna"), a, b);
  CHECK(g.declared_class == ConvexityClass::RankOneConvex);
  CHECK_FALSE(rank_one_convexity_defect(g, 2, sampling(2000, 5)).falsified);
  const TestFunction d = compose_linear(builtin("det"), a, b);
  for (int trial = 0; trial < 100; ++trial) {
    const Mat2xN x = random_mat(rng, 2);
    CHECK(d(x) == doctest::Approx(det2(x) * 2.0 * 3.0));
  }
  CHECK(std::abs(quasiconvexity_defect(d, random_mat(rng, 2), TestField::random(rng, 2, 3, 0.5, 64))) <= 1e-10);
  CHECK_CODE(compose_linear(builtin("det"), a, SquareMatrix(2, {1, 2, 2, 4})), ErrorCode::SingularB);
}

TEST_CASE("dual functions of convex functions pass the sampled tests on the plus half space") {
  const TestFunction h = dual_function(builtin("norm2"));
  Rng rng(26);
  for (int trial = 0; trial < 10; ++trial) {
    const TestField field = TestField::random(rng, 2, 2, 0.05, 48);
    const Mat2xN x0({uniform(rng, -1, 1), uniform(rng, 1, 2)}, {uniform(rng, -1, 1), uniform(rng, -1, 1)});
    CHECK(quasiconvexity_defect(h, x0, field) >= -1e-8);
  }
}

TEST_CASE("polynomial JSON") {
  const TestFunction f = polynomial_from_json(
      R"({"n": 2, "class": "polyconvex", "terms": [{"coef": 2, "powers": [[1, 0], [0, 1]]},)"
      R"( {"coef": -1, "powers": [[0, 1], [1, 0]]}, {"coef": 0.5, "powers": [[0, 0], [0, 0]]}]})");
  CHECK(f.declared_class == ConvexityClass::Polyconvex);
  CHECK(f.arity == 2);
  const Mat2xN x({1, 2}, {3, 4});
  CHECK(f(x) == doctest::Approx(2 * 4 - 6 + 0.5));
  CHECK_CODE(polynomial_from_json("{"), ErrorCode::Parse);
  CHECK_CODE(polynomial_from_json(R"({"n": 2, "class": "none", "terms": [{"coef": 1, "powers": [[5, 0], [0, 0]]}]})"),
             ErrorCode::InvalidArgument);
  CHECK_CODE(polynomial_from_json(R"({"n": 2, "class": "none", "terms": [{"coef": 1, "powers": [[1, 0, 0], [0, 0]]}]})"),
             ErrorCode::Shape);
  CHECK_CODE(resolve_function("user:/nonexistent/poly.json"), ErrorCode::Io);
  CHECK(resolve_function("det").id == "det");
}
