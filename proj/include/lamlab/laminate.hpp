#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "lamlab/matrix.hpp"
#include "lamlab/measure.hpp"

namespace lamlab {

// Relative tolerance of the rank-one test at tree nodes.
inline constexpr double kDefaultTreeRankTol = 1e-9;
inline constexpr int kMaxCertifyOrder = 12;

// A binary rank-one splitting tree. A leaf is a Dirac mass; a node with
// weight lambda stands for lambda * left + (1 - lambda) * right. Every node
// caches its barycenter. Trees are immutable and share subtrees.
class SplittingTree {
 public:
  static SplittingTree leaf(const Mat2xN& x);
  // Throws InvalidArgument unless 0 < lambda < 1, Shape on mixed n.
  static SplittingTree node(SplittingTree left, SplittingTree right, double lambda);

  bool is_leaf() const noexcept { return !node_->left; }
  const Mat2xN& barycenter() const noexcept { return node_->bary; }
  int cols() const noexcept { return node_->bary.cols(); }
  // Only valid on internal nodes.
  double lambda() const noexcept { return node_->lambda; }
  SplittingTree left() const;
  SplittingTree right() const;

  std::size_t leaf_count() const noexcept { return node_->leaves; }
  std::size_t depth() const noexcept { return node_->depth; }

 private:
  struct Node {
    Mat2xN bary;
    double lambda = 0.0;
    std::shared_ptr<const Node> left;
    std::shared_ptr<const Node> right;
    std::size_t leaves = 1;
    std::size_t depth = 0;
  };
  explicit SplittingTree(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

// Every internal node has rank(bary(left) - bary(right)) <= 1 within tol.
bool verify(const SplittingTree& tree, double tol = kDefaultTreeRankTol);

// Leaves weighted by the products of lambda / (1 - lambda) along their
// paths, merged into canonical form.
DiscreteMeasure measure_of(const SplittingTree& tree, double merge_tol = kDefaultMergeTol);

// Leaves in depth-first order with their path weights, unmerged.
std::vector<Atom> weighted_leaves(const SplittingTree& tree);

// Replaces atom (w, X) by (w s, X + (1-s) t a (x) b) and (w (1-s), X - s t a (x) b).
DiscreteMeasure split_atom(const DiscreteMeasure& mu, std::size_t atom, std::span<const double> a,
                           std::span<const double> b, double s, double t);

// Node built from one split, so that re-splitting after a collapse is exact.
SplittingTree split_leaf(const Mat2xN& x, std::span<const double> a, std::span<const double> b,
                         double s, double t);

enum class CertifyStatus { Certified, NotPrelaminate, Indeterminate };

std::string_view to_string(CertifyStatus s);

struct CertifyResult {
  CertifyStatus status;
  std::optional<SplittingTree> tree;  // set iff status == Certified
  std::size_t explored_states = 0;
};

struct CertifyOptions {
  double rank_tol = kDefaultTreeRankTol;
};

// Decides the H_N condition over the given atom representation. Searches
// pairwise rank-one merges depth first, cheapest residual first, memoizing
// failed partitions of the atoms. NotPrelaminate is a verdict about this
// representation only: re-splitting an atom into repeated copies is never
// tried. Indeterminate when the atom count exceeds max_order.
CertifyResult certify(const DiscreteMeasure& mu, int max_order, const CertifyOptions& opts = {});

struct LiftOptions {
  double rank_tol = kDefaultTreeRankTol;
  // Matching tolerance between certificate leaves and projected atoms.
  double match_tol = 1e-9;
};

// Lifts a certificate of P_# mu (diagonal projection) to a certificate of mu
// for mu supported in Tri: every certificate leaf is replaced by the chain of
// atoms of mu sharing that projection, which differ only along e1 (x) e_n.
// Throws NotSupported if mu leaves Tri, CertificateMismatch if proj_cert does
// not verify or does not reproduce P_# mu.
SplittingTree lift_tri(const DiscreteMeasure& mu, const SplittingTree& proj_cert,
                       const LiftOptions& opts = {});

struct PrelaminateSpec {
  std::uint64_t seed = 0;
  int order = 1;
  SubspaceTag constraint = SubspaceTag::Full;
  Mat2xN root;
  double scale = 1.0;
};

// Random tree with exactly `order` leaves obtained from Leaf(root) by rank-one
// splits whose directions stay inside the constraint subspace.
SplittingTree random_prelaminate(const PrelaminateSpec& spec);

}  // namespace lamlab
