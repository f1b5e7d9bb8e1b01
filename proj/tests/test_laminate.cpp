#include <doctest.h>

#include <cmath>

#include "lamlab/laminate.hpp"
#include "lamlab/random.hpp"
#include "support.hpp"

using namespace lamlab;

namespace {

const Mat2xN kI = Mat2xN::identity2();

SplittingTree leaf(const Mat2xN& x) { return SplittingTree::leaf(x); }

Mat2xN diag2(double a, double b) { return Mat2xN({a, 0}, {0, b}); }

// Reference rank test: at most one nonzero singular value, without the
// relative scaling used by the library.
bool rank_one_exact(const Mat2xN& d) {
  for (int i = 0; i < d.cols(); ++i)
    for (int j = i + 1; j < d.cols(); ++j)
      if (d(0, i) * d(1, j) - d(0, j) * d(1, i) != 0.0) return false;
  return true;
}

}  // namespace

TEST_CASE("verify spec examples") {
  CHECK(verify(leaf(kI)));
  CHECK(verify(SplittingTree::node(leaf(Mat2xN({0, 1}, {0, 0})), leaf(Mat2xN({0, -1}, {0, 0})), 0.5)));
  CHECK_FALSE(verify(SplittingTree::node(leaf(kI), leaf(-kI), 0.5)));
}

TEST_CASE("node validation") {
  CHECK_CODE(SplittingTree::node(leaf(kI), leaf(-kI), 0.0), ErrorCode::InvalidArgument);
  CHECK_CODE(SplittingTree::node(leaf(kI), leaf(-kI), 1.0), ErrorCode::InvalidArgument);
  CHECK_CODE(SplittingTree::node(leaf(kI), leaf(Mat2xN(3)), 0.5), ErrorCode::Shape);
}

TEST_CASE("measure_of spec examples and cached barycenters") {
  const DiscreteMeasure mu = measure_of(leaf(kI));
  CHECK(mu.size() == 1);
  CHECK(mu[0].weight == 1.0);

  const SplittingTree inner = SplittingTree::node(leaf(diag2(1, 1)), leaf(diag2(1, -1)), 0.5);
  const SplittingTree t = SplittingTree::node(leaf(diag2(-1, 0)), inner, 0.5);
  CHECK(verify(t));
  const DiscreteMeasure m = measure_of(t);
  REQUIRE(m.size() == 3);
  CHECK(m[0].weight == 0.5);
  CHECK(m[1].weight == 0.25);
  CHECK(m[2].weight == 0.25);
  CHECK(barycenter(m) == t.barycenter());
  CHECK(t.barycenter() == Mat2xN(2));
  CHECK(t.leaf_count() == 3);
  CHECK(t.depth() == 2);
}

TEST_CASE("split_atom spec example and errors") {
  const DiscreteMeasure mu = DiscreteMeasure::dirac(Mat2xN(2));
  const double a[] = {1, 0}, b[] = {0, 1};
  const DiscreteMeasure s = split_atom(mu, 0, a, b, 0.5, 2.0);
  REQUIRE(s.size() == 2);
  CHECK(s[0].weight == 0.5);
  CHECK(s[0].matrix == Mat2xN({0, 1}, {0, 0}));
  CHECK(s[1].matrix == Mat2xN({0, -1}, {0, 0}));
  CHECK(barycenter(s) == barycenter(mu));
  CHECK_CODE(split_atom(mu, 1, a, b, 0.5, 1.0), ErrorCode::Index);
  CHECK_CODE(split_atom(mu, 0, a, b, 1.0, 1.0), ErrorCode::InvalidArgument);
  const double b3[] = {0, 1, 0};
  CHECK_CODE(split_atom(mu, 0, a, b3, 0.5, 1.0), ErrorCode::Shape);
}

TEST_CASE("splitting preserves barycenter and the polyconvexity defect") {
  Rng rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    Mat2xN x({normal(rng), normal(rng)}, {normal(rng), normal(rng)});
    const DiscreteMeasure mu({{0.4, x}, {0.6, -x}});
    const double a[] = {normal(rng), normal(rng)}, b[] = {normal(rng), normal(rng)};
    const DiscreteMeasure s = split_atom(mu, trial % 2, a, b, uniform(rng, 0.1, 0.9), uniform(rng, 0.1, 2));
    CHECK(distance_inf(barycenter(s), barycenter(mu)) <= 1e-12);
    CHECK(polyconvexity_defect(s) == doctest::Approx(polyconvexity_defect(mu)).epsilon(1e-10));
  }
}

TEST_CASE("split_leaf followed by measure_of matches split_atom") {
  Rng rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = uniform_int(rng, 2, 4);
    Mat2xN x(n);
    for (int c = 0; c < n; ++c) x(0, c) = normal(rng), x(1, c) = normal(rng);
    std::vector<double> a{normal(rng), normal(rng)}, b(n);
    for (double& v : b) v = normal(rng);
    const double s = uniform(rng, 0.1, 0.9), t = uniform(rng, 0.1, 2);
    const SplittingTree tree = split_leaf(x, a, b, s, t);
    CHECK(verify(tree));
    CHECK(approx_equal(measure_of(tree), split_atom(DiscreteMeasure::dirac(x), 0, a, b, s, t), 0.0, 0.0));
  }
}

TEST_CASE("certify spec example of order three") {
  const DiscreteMeasure mu({{0.25, Mat2xN({1, 0}, {0, 1})}, {0.25, Mat2xN({1, 0}, {0, -1})},
                            {0.5, Mat2xN({-1, 0}, {0, 0})}});
  const CertifyResult r = certify(mu, 3);
  REQUIRE(r.status == CertifyStatus::Certified);
  REQUIRE(r.tree);
  CHECK(verify(*r.tree));
  CHECK(approx_equal(measure_of(*r.tree), mu, 1e-12, 1e-12));
  CHECK(r.tree->barycenter() == Mat2xN(2));
}

TEST_CASE("certify rejects the plus/minus identity pair") {
  const CertifyResult r = certify(DiscreteMeasure({{0.5, kI}, {0.5, -kI}}), 2);
  CHECK(r.status == CertifyStatus::NotPrelaminate);
  CHECK_FALSE(r.tree);
}

TEST_CASE("certify order limits") {
  std::vector<Atom> atoms;
  for (int i = 0; i < 5; ++i) atoms.push_back({0.2, diag2(i, 0)});
  const DiscreteMeasure mu(std::move(atoms));
  CHECK(certify(mu, 4).status == CertifyStatus::Indeterminate);
  CHECK(certify(mu, 5).status == CertifyStatus::Certified);
  CHECK_CODE(certify(mu, kMaxCertifyOrder + 1), ErrorCode::InvalidArgument);
  CHECK_CODE(certify(mu, 0), ErrorCode::InvalidArgument);
  CHECK(certify(DiscreteMeasure::dirac(kI), 1).status == CertifyStatus::Certified);
}

TEST_CASE("certify agrees with verify on random prelaminates") {
  for (SubspaceTag c : {SubspaceTag::Full, SubspaceTag::Tri, SubspaceTag::Diag}) {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
      PrelaminateSpec spec;
      spec.seed = seed;
      spec.order = 2 + static_cast<int>(seed % 5);
      spec.constraint = c;
      spec.root = Mat2xN(3);
      const SplittingTree t = random_prelaminate(spec);
      REQUIRE(verify(t));
      CHECK(t.leaf_count() == static_cast<std::size_t>(spec.order));
      const DiscreteMeasure mu = measure_of(t);
      CHECK(distance_inf(barycenter(mu), spec.root) <= 1e-12);
      for (const Atom& a : mu.atoms()) CHECK(in_subspace(a.matrix, c, 1e-12));
      const CertifyResult r = certify(mu, kMaxCertifyOrder);
      CHECK(r.status == CertifyStatus::Certified);
      if (r.tree) CHECK(approx_equal(measure_of(*r.tree), mu, 1e-9, 1e-12));
    }
  }
}

TEST_CASE("Diag prelaminates of order eight recertify") {
  for (std::uint64_t seed = 100; seed < 110; ++seed) {
    PrelaminateSpec spec{seed, 8, SubspaceTag::Diag, diag2(1, -1), 1.0};
    const DiscreteMeasure mu = measure_of(random_prelaminate(spec));
    CHECK(certify(mu, 8).status == CertifyStatus::Certified);
  }
}

TEST_CASE("certificate node differences are rank one in an exact reference test") {
  // Diag splits with integer data keep every node difference exact.
  const DiscreteMeasure mu({{0.25, diag2(2, 2)}, {0.25, diag2(2, -2)}, {0.25, diag2(-2, 2)}, {0.25, diag2(-2, -2)}});
  const CertifyResult r = certify(mu, 4);
  REQUIRE(r.tree);
  std::vector<SplittingTree> stack{*r.tree};
  while (!stack.empty()) {
    const SplittingTree t = stack.back();
    stack.pop_back();
    if (t.is_leaf()) continue;
    CHECK(rank_one_exact(t.left().barycenter() - t.right().barycenter()));
    stack.push_back(t.left());
    stack.push_back(t.right());
  }
}

TEST_CASE("lift_tri spec example") {
  const DiscreteMeasure mu({{0.5, Mat2xN({1, 5}, {0, 2})}, {0.5, Mat2xN({1, 7}, {0, 0})}});
  const SplittingTree proj = SplittingTree::node(leaf(diag2(1, 2)), leaf(diag2(1, 0)), 0.5);
  const SplittingTree lifted = lift_tri(mu, proj);
  CHECK(verify(lifted));
  CHECK(approx_equal(measure_of(lifted), mu, 1e-12, 1e-12));
}

TEST_CASE("lift_tri with a single projected atom builds a chain") {
  const DiscreteMeasure mu({{0.5, Mat2xN({0, 1}, {0, 0})}, {0.5, Mat2xN({0, -1}, {0, 0})}});
  const SplittingTree lifted = lift_tri(mu, leaf(Mat2xN(2)));
  CHECK(verify(lifted));
  CHECK(approx_equal(measure_of(lifted), mu, 0.0, 0.0));
}

TEST_CASE("lift_tri errors") {
  const DiscreteMeasure full({{0.5, kI}, {0.5, Mat2xN({1, 0}, {1, 1})}});
  CHECK_CODE(lift_tri(full, leaf(kI)), ErrorCode::NotSupported);
  const DiscreteMeasure mu({{0.5, Mat2xN({1, 5}, {0, 2})}, {0.5, Mat2xN({1, 7}, {0, 0})}});
  CHECK_CODE(lift_tri(mu, leaf(diag2(1, 1))), ErrorCode::CertificateMismatch);
  const SplittingTree wrong = SplittingTree::node(leaf(diag2(1, 2)), leaf(diag2(3, 0)), 0.5);
  CHECK_CODE(lift_tri(mu, wrong), ErrorCode::CertificateMismatch);
  const SplittingTree wrong_weights = SplittingTree::node(leaf(diag2(1, 2)), leaf(diag2(1, 0)), 0.25);
  CHECK_CODE(lift_tri(mu, wrong_weights), ErrorCode::CertificateMismatch);
}

TEST_CASE("lift_tri round trip over random Tri prelaminates") {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    PrelaminateSpec spec{seed, 2 + static_cast<int>(seed % 6), SubspaceTag::Tri, Mat2xN(2 + seed % 3), 1.0};
    const DiscreteMeasure mu = measure_of(random_prelaminate(spec));
    const DiscreteMeasure proj = pushforward(mu, project_diag);
    const CertifyResult pc = certify(proj, kMaxCertifyOrder);
    REQUIRE(pc.status == CertifyStatus::Certified);
    const SplittingTree lifted = lift_tri(mu, *pc.tree);
    CHECK(verify(lifted));
    CHECK(approx_equal(measure_of(lifted), mu, 1e-9, 1e-12));
  }
}

TEST_CASE("random_prelaminate is deterministic in its seed") {
  PrelaminateSpec spec{42, 6, SubspaceTag::Full, Mat2xN(4), 2.0};
  CHECK(approx_equal(measure_of(random_prelaminate(spec)), measure_of(random_prelaminate(spec)), 0.0, 0.0));
  PrelaminateSpec other = spec;
  other.seed = 43;
  CHECK_FALSE(approx_equal(measure_of(random_prelaminate(spec)), measure_of(random_prelaminate(other)), 1e-6,
                           1e-6));
}
