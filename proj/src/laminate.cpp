#include "lamlab/laminate.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_set>

#include "lamlab/error.hpp"
#include "lamlab/random.hpp"

namespace lamlab {

SplittingTree SplittingTree::leaf(const Mat2xN& x) {
  if (!x.all_finite()) fail(ErrorCode::InvalidArgument, "leaf matrix must be finite");
  auto n = std::make_shared<Node>();
  n->bary = x;
  return SplittingTree(std::move(n));
}

SplittingTree SplittingTree::node(SplittingTree left, SplittingTree right, double lambda) {
  if (!(lambda > 0.0 && lambda < 1.0))
    fail(ErrorCode::InvalidArgument, "node weight must lie strictly between 0 and 1");
  if (left.cols() != right.cols()) fail(ErrorCode::Shape, "subtrees have different column counts");
  auto n = std::make_shared<Node>();
  n->bary = lambda * left.barycenter() + (1.0 - lambda) * right.barycenter();
  n->lambda = lambda;
  n->leaves = left.leaf_count() + right.leaf_count();
  n->depth = 1 + std::max(left.depth(), right.depth());
  n->left = std::move(left.node_);
  n->right = std::move(right.node_);
  return SplittingTree(std::move(n));
}

SplittingTree SplittingTree::left() const {
  if (is_leaf()) fail(ErrorCode::InvalidArgument, "leaf has no children");
  return SplittingTree(node_->left);
}

SplittingTree SplittingTree::right() const {
  if (is_leaf()) fail(ErrorCode::InvalidArgument, "leaf has no children");
  return SplittingTree(node_->right);
}

bool verify(const SplittingTree& tree, double tol) {
  if (tree.is_leaf()) return true;
  const SplittingTree l = tree.left();
  const SplittingTree r = tree.right();
  if (!rank_le_one(l.barycenter() - r.barycenter(), tol)) return false;
  return verify(l, tol) && verify(r, tol);
}

namespace {

void collect_leaves(const SplittingTree& t, double w, std::vector<Atom>& out) {
  if (t.is_leaf()) {
    out.push_back({w, t.barycenter()});
    return;
  }
  collect_leaves(t.left(), w * t.lambda(), out);
  collect_leaves(t.right(), w * (1.0 - t.lambda()), out);
}

void check_split(std::span<const double> a, std::span<const double> b, int n, double s, double t) {
  if (a.size() != 2 || static_cast<int>(b.size()) != n)
    fail(ErrorCode::Shape, "split direction must be a 2-vector times an n-vector");
  if (!(s > 0.0 && s < 1.0)) fail(ErrorCode::InvalidArgument, "split fraction s must lie in (0, 1)");
  if (!(t > 0.0)) fail(ErrorCode::InvalidArgument, "split length t must be positive");
  bool nonzero = false;
  for (double ai : a)
    for (double bj : b) nonzero = nonzero || ai * bj != 0.0;
  if (!nonzero) fail(ErrorCode::InvalidArgument, "split direction a (x) b must be nonzero");
}

}  // namespace

std::vector<Atom> weighted_leaves(const SplittingTree& tree) {
  std::vector<Atom> out;
  out.reserve(tree.leaf_count());
  collect_leaves(tree, 1.0, out);
  return out;
}

DiscreteMeasure measure_of(const SplittingTree& tree, double merge_tol) {
  MeasureOptions opts;
  opts.merge_tol = merge_tol;
  return DiscreteMeasure(weighted_leaves(tree), opts);
}

DiscreteMeasure split_atom(const DiscreteMeasure& mu, std::size_t atom, std::span<const double> a,
                           std::span<const double> b, double s, double t) {
  if (atom >= mu.size())
    fail(ErrorCode::Index, "atom index " + std::to_string(atom) + " out of range for " +
                               std::to_string(mu.size()) + " atoms");
  check_split(a, b, mu.cols(), s, t);
  const Mat2xN ab = Mat2xN::outer(a, b);
  std::vector<Atom> atoms;
  atoms.reserve(mu.size() + 1);
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const Atom& at = mu[i];
    if (i != atom) {
      atoms.push_back(at);
      continue;
    }
    atoms.push_back({at.weight * s, at.matrix + ((1.0 - s) * t) * ab});
    atoms.push_back({at.weight * (1.0 - s), at.matrix - (s * t) * ab});
  }
  return DiscreteMeasure(std::move(atoms));
}

SplittingTree split_leaf(const Mat2xN& x, std::span<const double> a, std::span<const double> b,
                         double s, double t) {
  check_split(a, b, x.cols(), s, t);
  const Mat2xN ab = Mat2xN::outer(a, b);
  return SplittingTree::node(SplittingTree::leaf(x + ((1.0 - s) * t) * ab),
                             SplittingTree::leaf(x - (s * t) * ab), s);
}

std::string_view to_string(CertifyStatus s) {
  switch (s) {
    case CertifyStatus::Certified: return "certified";
    case CertifyStatus::NotPrelaminate: return "not_prelaminate";
    case CertifyStatus::Indeterminate: return "indeterminate";
  }
  return "indeterminate";
}

namespace {

struct Group {
  std::uint32_t mask;
  double weight;
  Mat2xN matrix;
  SplittingTree tree;
};

struct KeyHash {
  std::size_t operator()(const std::vector<std::uint32_t>& k) const noexcept {
    std::uint64_t h = 0x84222325cbf29ce4ULL;
    for (std::uint32_t m : k) h = mix64(h ^ m);
    return static_cast<std::size_t>(h);
  }
};

class CertifySearch {
 public:
  CertifySearch(const DiscreteMeasure& mu, double tol) : mu_(mu), tol_(tol) {}

  std::optional<SplittingTree> run() {
    std::vector<Group> groups;
    for (std::size_t i = 0; i < mu_.size(); ++i)
      groups.push_back({1u << i, mu_[i].weight, mu_[i].matrix, SplittingTree::leaf(mu_[i].matrix)});
    return search(groups);
  }

  std::size_t explored() const noexcept { return explored_; }

 private:
  // Barycenter of a group recomputed from the original atoms, so that every
  // merge order reaching the same partition sees the same matrices.
  Mat2xN group_matrix(std::uint32_t mask, double weight) const {
    Mat2xN s(mu_.cols());
    for (std::size_t i = 0; i < mu_.size(); ++i)
      if (mask & (1u << i)) s += (mu_[i].weight / weight) * mu_[i].matrix;
    return s;
  }

  std::optional<SplittingTree> search(const std::vector<Group>& groups) {
    if (groups.size() == 1) return groups.front().tree;
    std::vector<std::uint32_t> key;
    key.reserve(groups.size());
    for (const Group& g : groups) key.push_back(g.mask);
    std::sort(key.begin(), key.end());
    if (failed_.contains(key)) return std::nullopt;
    ++explored_;

    struct Pair {
      double residual;
      std::size_t i, j;
    };
    std::vector<Pair> pairs;
    for (std::size_t i = 0; i < groups.size(); ++i)
      for (std::size_t j = i + 1; j < groups.size(); ++j) {
        const Mat2xN d = groups[i].matrix - groups[j].matrix;
        if (rank_le_one(d, tol_)) pairs.push_back({rank_one_residual(d), i, j});
      }
    std::stable_sort(pairs.begin(), pairs.end(),
                     [](const Pair& a, const Pair& b) { return a.residual < b.residual; });

    for (const Pair& p : pairs) {
      const Group& a = groups[p.i];
      const Group& b = groups[p.j];
      const double w = a.weight + b.weight;
      Group merged{a.mask | b.mask, w, group_matrix(a.mask | b.mask, w),
                   SplittingTree::node(a.tree, b.tree, a.weight / w)};
      std::vector<Group> next;
      next.reserve(groups.size() - 1);
      for (std::size_t k = 0; k < groups.size(); ++k)
        if (k != p.i && k != p.j) next.push_back(groups[k]);
      next.push_back(std::move(merged));
      if (auto found = search(next)) return found;
    }
    failed_.insert(std::move(key));
    return std::nullopt;
  }

  const DiscreteMeasure& mu_;
  double tol_;
  std::size_t explored_ = 0;
  std::unordered_set<std::vector<std::uint32_t>, KeyHash> failed_;
};

}  // namespace

CertifyResult certify(const DiscreteMeasure& mu, int max_order, const CertifyOptions& opts) {
  if (max_order < 1 || max_order > kMaxCertifyOrder)
    fail(ErrorCode::InvalidArgument,
         "max_order must lie in [1, " + std::to_string(kMaxCertifyOrder) + "]");
  if (static_cast<int>(mu.size()) > max_order) return {CertifyStatus::Indeterminate, std::nullopt, 0};
  CertifySearch search(mu, opts.rank_tol);
  auto tree = search.run();
  if (!tree) return {CertifyStatus::NotPrelaminate, std::nullopt, search.explored()};
  return {CertifyStatus::Certified, std::move(tree), search.explored()};
}

namespace {

struct ProjectionGroup {
  Mat2xN projection;
  double weight = 0.0;
  std::vector<std::size_t> members;
  std::optional<SplittingTree> tree;
};

// Atoms sharing a projection differ by multiples of e1 (x) e_n, so any chain
// of them is a valid splitting tree of their average.
SplittingTree chain_tree(const DiscreteMeasure& mu, const std::vector<std::size_t>& members) {
  SplittingTree t = SplittingTree::leaf(mu[members.back()].matrix);
  double rest = mu[members.back()].weight;
  for (std::size_t k = members.size() - 1; k-- > 0;) {
    const Atom& a = mu[members[k]];
    t = SplittingTree::node(SplittingTree::leaf(a.matrix), t, a.weight / (a.weight + rest));
    rest += a.weight;
  }
  return t;
}

SplittingTree mirror(const SplittingTree& cert, const std::vector<ProjectionGroup>& groups,
                     double match_tol) {
  if (cert.is_leaf()) {
    const Mat2xN& d = cert.barycenter();
    for (const ProjectionGroup& g : groups)
      if (distance_inf(g.projection, d) <= match_tol * (1.0 + d.max_abs())) return *g.tree;
    fail(ErrorCode::CertificateMismatch, "certificate leaf matches no projected atom");
  }
  return SplittingTree::node(mirror(cert.left(), groups, match_tol),
                             mirror(cert.right(), groups, match_tol), cert.lambda());
}

}  // namespace

SplittingTree lift_tri(const DiscreteMeasure& mu, const SplittingTree& proj_cert,
                       const LiftOptions& opts) {
  for (const Atom& a : mu.atoms())
    if (!in_subspace(a.matrix, SubspaceTag::Tri))
      fail(ErrorCode::NotSupported, "lift_tri needs a measure supported in the triangular subspace");
  if (proj_cert.cols() != mu.cols())
    fail(ErrorCode::CertificateMismatch, "certificate and measure have different column counts");
  if (!verify(proj_cert, opts.rank_tol))
    fail(ErrorCode::CertificateMismatch, "projection certificate does not verify");

  std::vector<ProjectionGroup> groups;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const Mat2xN p = project_diag(mu[i].matrix);
    auto it = std::find_if(groups.begin(), groups.end(), [&](const ProjectionGroup& g) {
      return distance_inf(g.projection, p) <= kDefaultMergeTol;
    });
    if (it == groups.end()) {
      groups.push_back({p, 0.0, {}, std::nullopt});
      it = groups.end() - 1;
    }
    it->weight += mu[i].weight;
    it->members.push_back(i);
  }

  std::vector<Atom> projected;
  for (const ProjectionGroup& g : groups) projected.push_back({g.weight, g.projection});
  const DiscreteMeasure expected(std::move(projected), MeasureOptions{.merge = false});
  std::vector<Atom> leaves = weighted_leaves(proj_cert);
  for (const Atom& l : leaves)
    if (!in_subspace(l.matrix, SubspaceTag::Diag, opts.match_tol * (1.0 + l.matrix.max_abs())))
      fail(ErrorCode::CertificateMismatch, "projection certificate has a leaf outside Diag");
  MeasureOptions merge_opts;
  merge_opts.merge_tol = opts.match_tol;
  if (!approx_equal(DiscreteMeasure(std::move(leaves), merge_opts), expected, opts.match_tol,
                    opts.match_tol))
    fail(ErrorCode::CertificateMismatch, "certificate measure differs from the projected measure");

  for (ProjectionGroup& g : groups) g.tree = chain_tree(mu, g.members);
  return mirror(proj_cert, groups, opts.match_tol);
}

namespace {

void random_direction(Rng& rng, SubspaceTag c, int n, std::vector<double>& a, std::vector<double>& b) {
  a.assign(2, 0.0);
  b.assign(n, 0.0);
  const bool first = uniform(rng, 0.0, 1.0) < 0.5;
  switch (c) {
    case SubspaceTag::Full:
      for (double& x : a) x = normal(rng);
      for (double& x : b) x = normal(rng);
      break;
    case SubspaceTag::Tri:
      if (first) {
        a[0] = 1.0;
        for (double& x : b) x = normal(rng);
      } else {
        for (double& x : a) x = normal(rng);
        b[n - 1] = 1.0;
      }
      break;
    case SubspaceTag::Diag:
      if (first) {
        a[0] = 1.0;
        for (int j = 0; j + 1 < n; ++j) b[j] = normal(rng);
      } else {
        a[1] = 1.0;
        b[n - 1] = normal(rng) < 0.0 ? -1.0 : 1.0;
      }
      break;
  }
  auto normalize = [](std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    s = std::sqrt(s);
    if (s > 0.0)
      for (double& x : v) x /= s;
  };
  normalize(a);
  normalize(b);
}

SplittingTree grow(Rng& rng, const Mat2xN& x, int order, const PrelaminateSpec& spec) {
  if (order == 1) return SplittingTree::leaf(x);
  std::vector<double> a, b;
  random_direction(rng, spec.constraint, x.cols(), a, b);
  const double s = uniform(rng, 0.25, 0.75);
  const double t = spec.scale * uniform(rng, 0.5, 1.5);
  const int left = uniform_int(rng, 1, order - 1);
  const Mat2xN ab = Mat2xN::outer(a, b);
  SplittingTree l = grow(rng, x + ((1.0 - s) * t) * ab, left, spec);
  SplittingTree r = grow(rng, x - (s * t) * ab, order - left, spec);
  return SplittingTree::node(std::move(l), std::move(r), s);
}

}  // namespace

SplittingTree random_prelaminate(const PrelaminateSpec& spec) {
  if (spec.order < 1) fail(ErrorCode::InvalidArgument, "prelaminate order must be at least 1");
  if (!(spec.scale > 0.0)) fail(ErrorCode::InvalidArgument, "prelaminate scale must be positive");
  if (!in_subspace(spec.root, spec.constraint))
    fail(ErrorCode::InvalidArgument, "root does not satisfy the requested constraint");
  Rng rng(spec.seed);
  return grow(rng, spec.root, spec.order, spec);
}

}  // namespace lamlab
