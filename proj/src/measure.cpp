#include "lamlab/measure.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "lamlab/error.hpp"

namespace lamlab {

DiscreteMeasure::DiscreteMeasure(std::vector<Atom> atoms, const MeasureOptions& opts) {
  if (atoms.empty()) fail(ErrorCode::InvalidArgument, "a measure needs at least one atom");
  n_ = atoms.front().matrix.cols();
  double total = 0.0;
  for (const Atom& a : atoms) {
    if (a.matrix.cols() != n_) fail(ErrorCode::Shape, "atoms of a measure must share the column count");
    if (!(a.weight > 0.0) || !std::isfinite(a.weight))
      fail(ErrorCode::InvalidArgument, "atom weights must be positive and finite");
    if (!a.matrix.all_finite()) fail(ErrorCode::InvalidArgument, "atom matrices must be finite");
    total += a.weight;
  }
  if (opts.renormalize) {
    for (Atom& a : atoms) a.weight /= total;
  } else if (std::abs(total - 1.0) > kWeightTol) {
    fail(ErrorCode::InvalidArgument,
         "weights sum to " + std::to_string(total) + ", expected 1 (pass renormalize to rescale)");
  }

  if (!opts.merge) {
    atoms_ = std::move(atoms);
    return;
  }
  atoms_.reserve(atoms.size());
  for (const Atom& a : atoms) {
    bool merged = false;
    for (Atom& b : atoms_) {
      if (distance_inf(a.matrix, b.matrix) <= opts.merge_tol) {
        const double w = a.weight + b.weight;
        b.matrix = (b.weight / w) * b.matrix + (a.weight / w) * a.matrix;
        b.weight = w;
        merged = true;
        break;
      }
    }
    if (!merged) atoms_.push_back(a);
  }
}

Mat2xN barycenter(const DiscreteMeasure& mu) {
  Mat2xN s(mu.cols());
  for (const Atom& a : mu.atoms()) s += a.weight * a.matrix;
  return s;
}

DiscreteMeasure pushforward(const DiscreteMeasure& mu, const MatrixMap& map, double merge_tol) {
  std::vector<Atom> out;
  out.reserve(mu.size());
  for (const Atom& a : mu.atoms()) out.push_back({a.weight, map(a.matrix)});
  MeasureOptions opts;
  opts.merge_tol = merge_tol;
  return DiscreteMeasure(std::move(out), opts);
}

double polyconvexity_defect(const DiscreteMeasure& mu) {
  double integral = 0.0;
  for (const Atom& a : mu.atoms()) integral += a.weight * det2(a.matrix);
  return integral - det2(barycenter(mu));
}

double jensen_defect(const TestFunction& f, const DiscreteMeasure& mu) {
  double integral = 0.0;
  for (const Atom& a : mu.atoms()) integral += a.weight * f(a.matrix);
  return integral - f(barycenter(mu));
}

namespace {

// Visits every nondecreasing index tuple of length 1..degree over m entries.
template <class F>
void for_each_monomial(int m, int degree, F&& visit) {
  std::vector<int> idx;
  auto rec = [&](auto&& self, int start) -> void {
    if (!idx.empty()) visit(idx);
    if (static_cast<int>(idx.size()) == degree) return;
    for (int e = start; e < m; ++e) {
      idx.push_back(e);
      self(self, e);
      idx.pop_back();
    }
  };
  rec(rec, 0);
}

double moment(const DiscreteMeasure& mu, const std::vector<int>& idx) {
  const int n = mu.cols();
  double s = 0.0;
  for (const Atom& a : mu.atoms()) {
    double p = a.weight;
    for (int e : idx) p *= a.matrix(e / n, e % n);
    s += p;
  }
  return s;
}

}  // namespace

double moment_distance(const DiscreteMeasure& mu, const DiscreteMeasure& nu, int degree) {
  if (mu.cols() != nu.cols()) fail(ErrorCode::Shape, "moment_distance needs measures with equal n");
  if (degree < 1 || degree > 3) fail(ErrorCode::InvalidArgument, "moment degree must be 1, 2 or 3");
  double worst = 0.0;
  for_each_monomial(2 * mu.cols(), degree, [&](const std::vector<int>& idx) {
    worst = std::max(worst, std::abs(moment(mu, idx) - moment(nu, idx)));
  });
  return worst;
}

bool approx_equal(const DiscreteMeasure& a, const DiscreteMeasure& b, double matrix_tol,
                  double weight_tol) {
  if (a.cols() != b.cols() || a.size() != b.size()) return false;
  std::vector<bool> used(b.size(), false);
  for (const Atom& x : a.atoms()) {
    std::size_t best = b.size();
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (used[j]) continue;
      const double d = distance_inf(x.matrix, b[j].matrix);
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    if (best == b.size() || best_d > matrix_tol || std::abs(x.weight - b[best].weight) > weight_tol)
      return false;
    used[best] = true;
  }
  return true;
}

}  // namespace lamlab
