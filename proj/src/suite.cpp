#include "lamlab/suite.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

#include "lamlab/convexity.hpp"
#include "lamlab/duality.hpp"
#include "lamlab/error.hpp"
#include "lamlab/haar.hpp"
#include "lamlab/laminate.hpp"
#include "lamlab/random.hpp"

namespace lamlab {

namespace {

std::size_t scaled(std::size_t count, double scale) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(count * scale)));
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(3) << v;
  return os.str();
}

Mat2xN random_matrix(Rng& rng, int n, double lo, double hi) {
  Mat2xN x(n);
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < n; ++c) x(r, c) = uniform(rng, lo, hi);
  return x;
}

Mat2xN random_in(Rng& rng, int n, SubspaceTag tag, double lo, double hi) {
  Mat2xN x = random_matrix(rng, n, lo, hi);
  if (tag != SubspaceTag::Full)
    for (int c = 0; c + 1 < n; ++c) x(1, c) = 0.0;
  if (tag == SubspaceTag::Diag) x(0, n - 1) = 0.0;
  return x;
}

std::vector<double> dirichlet(Rng& rng, std::size_t k) {
  std::vector<double> w(k);
  double s = 0.0;
  for (double& v : w) {
    v = -std::log(1.0 - uniform(rng, 0.0, 1.0)) + 1e-3;
    s += v;
  }
  for (double& v : w) v /= s;
  return w;
}

// Admissible 2x2 matrix with X12 log-uniform in [10^-lg, 10^lg].
Mat2xN random_plus(Rng& rng, double lg, double box) {
  Mat2xN x = random_matrix(rng, 2, -box, box);
  x(0, 1) = std::pow(10.0, uniform(rng, -lg, lg));
  return x;
}

DiscreteMeasure random_plus_measure(Rng& rng) {
  const std::size_t k = static_cast<std::size_t>(uniform_int(rng, 1, 20));
  const std::vector<double> w = dirichlet(rng, k);
  std::vector<Atom> atoms;
  for (std::size_t i = 0; i < k; ++i) atoms.push_back({w[i], random_plus(rng, 1.0, 3.0)});
  return DiscreteMeasure(std::move(atoms));
}

// Prelaminates shared by the certification, lifting and Jensen criteria.
struct PrelaminateCase {
  SplittingTree tree;
  SubspaceTag constraint;
};

PrelaminateCase roundtrip_case(std::uint64_t seed, std::size_t i) {
  Rng rng = trial_rng(seed, 5, i);
  static constexpr SubspaceTag tags[] = {SubspaceTag::Full, SubspaceTag::Tri, SubspaceTag::Diag};
  const SubspaceTag tag = tags[i % 3];
  PrelaminateSpec spec;
  spec.seed = rng();
  spec.order = uniform_int(rng, 1, 8);
  spec.constraint = tag;
  spec.root = random_in(rng, uniform_int(rng, 2, 4), tag, -1.0, 1.0);
  spec.scale = 1.0;
  return {random_prelaminate(spec), tag};
}

struct LiftCase {
  DiscreteMeasure mu;
  SplittingTree proj_cert;
};

LiftCase lift_case(std::uint64_t seed, std::size_t i) {
  Rng rng = trial_rng(seed, 6, i);
  const int n = uniform_int(rng, 2, 4);
  PrelaminateSpec spec;
  spec.seed = rng();
  spec.order = uniform_int(rng, 1, 6);
  spec.constraint = SubspaceTag::Diag;
  spec.root = random_in(rng, n, SubspaceTag::Diag, -1.0, 1.0);
  SplittingTree gen = random_prelaminate(spec);
  const DiscreteMeasure diag = measure_of(gen);
  std::vector<Atom> atoms;
  for (const Atom& a : diag.atoms()) {
    const std::size_t copies = static_cast<std::size_t>(uniform_int(rng, 1, 3));
    const std::vector<double> w = dirichlet(rng, copies);
    for (std::size_t c = 0; c < copies; ++c) {
      Mat2xN x = a.matrix;
      x(0, n - 1) = uniform(rng, -2.0, 2.0);
      atoms.push_back({a.weight * w[c], x});
    }
  }
  return {DiscreteMeasure(std::move(atoms)), gen};
}

using Clock = std::chrono::steady_clock;

class Timer {
 public:
  Timer() : start_(Clock::now()) {}
  double seconds() const { return std::chrono::duration<double>(Clock::now() - start_).count(); }

 private:
  Clock::time_point start_;
};

CriterionResult make_result(int id, double limit) {
  CriterionResult r;
  r.id = id;
  r.name = criterion_name(id);
  r.time_limit = limit;
  r.details = Json::object();
  return r;
}

void finish(CriterionResult& r, const Timer& t, bool ok, std::string summary) {
  r.seconds = t.seconds();
  r.interrupted = interrupted();
  const bool in_time = r.time_limit <= 0.0 || r.seconds < r.time_limit;
  r.passed = ok && in_time && !r.interrupted;
  r.details["seconds"] = r.seconds;
  if (r.time_limit > 0.0) r.details["time_limit_s"] = r.time_limit;
  summary += "; " + fmt(r.seconds) + " s";
  if (r.time_limit > 0.0) summary += " (limit " + fmt(r.time_limit) + " s)";
  if (r.interrupted) summary += "; interrupted";
  r.summary = std::move(summary);
}

CriterionResult involution(const SuiteOptions& o) {
  CriterionResult r = make_result(1, 1.0);
  Timer t;
  const std::size_t trials = scaled(100000, o.trial_scale);
  Rng rng = trial_rng(o.seed, 1, 0);
  double worst = 0.0;
  std::size_t done = 0;
  for (; done < trials && !interrupted(); ++done) {
    const Mat2xN x = random_plus(rng, 2.0, 10.0);
    const double err = distance_inf(psi(psi(x)), x) / (1.0 + x.max_abs());
    worst = std::max(worst, err);
  }
  const double tol = 1e-9;
  r.details["trials"] = done;
  r.details["max_scaled_error"] = worst;
  r.details["tolerance"] = tol;
  finish(r, t, worst <= tol, "max |psi(psi X) - X| / (1 + |X|) = " + fmt(worst) + " (tol 1e-09)");
  return r;
}

CriterionResult dual_of_dual(const SuiteOptions& o) {
  CriterionResult r = make_result(2, 1.0);
  Timer t;
  const std::size_t trials = scaled(1000, o.trial_scale);
  double wmax = 0.0, mmax = 0.0;
  std::size_t done = 0;
  for (; done < trials && !interrupted(); ++done) {
    Rng rng = trial_rng(o.seed, 2, done);
    const DiscreteMeasure mu = random_plus_measure(rng);
    const DiscreteMeasure back = dual_measure(dual_measure(mu));
    for (std::size_t i = 0; i < mu.size(); ++i) {
      wmax = std::max(wmax, std::abs(back[i].weight - mu[i].weight));
      mmax = std::max(mmax, distance_inf(back[i].matrix, mu[i].matrix));
    }
  }
  const double tol = 1e-10;
  r.details["trials"] = done;
  r.details["max_weight_error"] = wmax;
  r.details["max_matrix_error"] = mmax;
  r.details["tolerance"] = tol;
  finish(r, t, wmax <= tol && mmax <= tol,
         "atom-wise weight error " + fmt(wmax) + ", matrix error " + fmt(mmax) + " (tol 1e-10)");
  return r;
}

CriterionResult barycenter_closed_form(const SuiteOptions& o) {
  CriterionResult r = make_result(3, 0.0);
  Timer t;
  const std::size_t trials = scaled(1000, o.trial_scale);
  double worst = 0.0;
  std::size_t done = 0;
  for (; done < trials && !interrupted(); ++done) {
    Rng rng = trial_rng(o.seed, 2, done);
    const DiscreteMeasure mu = random_plus_measure(rng);
    worst = std::max(worst, distance_inf(dual_barycenter_closed_form(mu), barycenter(dual_measure(mu))));
  }
  const double tol = 1e-12;
  r.details["trials"] = done;
  r.details["max_error"] = worst;
  r.details["tolerance"] = tol;
  finish(r, t, worst <= tol, "max |closed form - bary(dual)| = " + fmt(worst) + " (tol 1e-12)");
  return r;
}

CriterionResult polyconvex_duality(const SuiteOptions& o) {
  CriterionResult r = make_result(4, 0.0);
  Timer t;
  const std::size_t laminates = scaled(1000, o.trial_scale);
  const std::size_t others = scaled(100, o.trial_scale);
  double worst_gap = 0.0;
  std::size_t done = 0;
  for (; done < laminates && !interrupted(); ++done) {
    Rng rng = trial_rng(o.seed, 4, done);
    for (;;) {
      PrelaminateSpec spec;
      spec.seed = rng();
      spec.order = uniform_int(rng, 2, 8);
      spec.root = random_matrix(rng, 2, -1.0, 1.0);
      spec.root(0, 1) = uniform(rng, 2.0, 4.0);
      spec.scale = 0.5;
      const SplittingTree tree = random_prelaminate(spec);
      const DiscreteMeasure mu = measure_of(tree);
      const bool inside = std::all_of(mu.atoms().begin(), mu.atoms().end(),
                                      [](const Atom& a) { return a.matrix(0, 1) >= 0.05; });
      if (!inside) continue;
      worst_gap = std::max(worst_gap, polyconvex_duality_check(mu).barycenter_gap);
      break;
    }
  }
  double min_gap = std::numeric_limits<double>::infinity();
  double min_defect = std::numeric_limits<double>::infinity();
  std::size_t built = 0;
  for (; built < others && !interrupted(); ++built) {
    Rng rng = trial_rng(o.seed, 40, built);
    for (;;) {
      // Three atoms X0 + D_i with sum w_i D_i = 0 have defect sum w_i det D_i.
      Mat2xN x0 = random_matrix(rng, 2, -1.0, 1.0);
      x0(0, 1) = uniform(rng, 4.0, 6.0);
      const std::vector<double> w = dirichlet(rng, 3);
      const Mat2xN d0 = random_matrix(rng, 2, -1.5, 1.5);
      const Mat2xN d1 = random_matrix(rng, 2, -1.5, 1.5);
      const Mat2xN d2 = (-1.0 / w[2]) * (w[0] * d0 + w[1] * d1);
      const Mat2xN ds[3] = {d0, d1, d2};
      std::vector<Atom> atoms;
      for (int i = 0; i < 3; ++i) atoms.push_back({w[i], x0 + ds[i]});
      if (!std::all_of(atoms.begin(), atoms.end(), [](const Atom& a) { return a.matrix(0, 1) >= 0.05; }))
        continue;
      const DiscreteMeasure mu(std::move(atoms));
      const PolyconvexDualityReport rep = polyconvex_duality_check(mu);
      if (std::abs(rep.defect) < 0.1) continue;
      min_gap = std::min(min_gap, rep.barycenter_gap);
      min_defect = std::min(min_defect, std::abs(rep.defect));
      break;
    }
  }
  r.details["prelaminates"] = done;
  r.details["max_gap_prelaminates"] = worst_gap;
  r.details["non_polyconvex"] = built;
  r.details["min_abs_defect_non_polyconvex"] = min_defect;
  r.details["min_gap_non_polyconvex"] = min_gap;
  finish(r, t, worst_gap <= 1e-9 && min_gap >= 1e-3,
         "prelaminate gap " + fmt(worst_gap) + " (tol 1e-09); non-polyconvex min gap " + fmt(min_gap) +
             " (need >= 0.001)");
  return r;
}

CriterionResult certificate_roundtrip(const SuiteOptions& o) {
  CriterionResult r = make_result(5, 30.0);
  Timer t;
  const std::size_t trials = scaled(1000, o.trial_scale);
  std::size_t verified = 0, recertified = 0, done = 0, states = 0;
  for (; done < trials && !interrupted(); ++done) {
    const PrelaminateCase c = roundtrip_case(o.seed, done);
    if (verify(c.tree)) ++verified;
    const DiscreteMeasure mu = measure_of(c.tree);
    const CertifyResult cert = certify(mu, 8);
    states += cert.explored_states;
    if (cert.status == CertifyStatus::Certified && verify(*cert.tree) &&
        approx_equal(measure_of(*cert.tree), mu, 1e-9, 1e-12))
      ++recertified;
  }
  const std::size_t pairs = scaled(1000, o.trial_scale);
  std::size_t rejected = 0, pdone = 0;
  for (; pdone < pairs && !interrupted(); ++pdone) {
    Rng rng = trial_rng(o.seed, 50, pdone);
    const int n = uniform_int(rng, 2, 4);
    Mat2xN x = random_matrix(rng, n, -1.0, 1.0), y(n);
    do {
      y = random_matrix(rng, n, -1.0, 1.0);
    } while (rank_one_residual(x - y) < 1e-3);
    const double w = uniform(rng, 0.1, 0.9);
    const CertifyResult cert = certify(DiscreteMeasure({{w, x}, {1.0 - w, y}}), 8);
    if (cert.status == CertifyStatus::NotPrelaminate) ++rejected;
  }
  r.details["prelaminates"] = done;
  r.details["verified"] = verified;
  r.details["recertified"] = recertified;
  r.details["explored_states"] = states;
  r.details["non_rank_one_pairs"] = pdone;
  r.details["not_prelaminate"] = rejected;
  finish(r, t, verified == done && recertified == done && rejected == pdone,
         std::to_string(verified) + "/" + std::to_string(done) + " verified, " + std::to_string(recertified) +
             " re-certified, " + std::to_string(rejected) + "/" + std::to_string(pdone) + " pairs NotPrelaminate");
  return r;
}

CriterionResult lifting(const SuiteOptions& o) {
  CriterionResult r = make_result(6, 10.0);
  Timer t;
  const std::size_t trials = scaled(1000, o.trial_scale);
  std::size_t ok = 0, done = 0;
  std::string first_error;
  for (; done < trials && !interrupted(); ++done) {
    const LiftCase c = lift_case(o.seed, done);
    try {
      const SplittingTree lifted = lift_tri(c.mu, c.proj_cert);
      if (verify(lifted) && approx_equal(measure_of(lifted), c.mu, 1e-9, 1e-12)) ++ok;
    } catch (const Error& e) {
      if (first_error.empty()) first_error = e.what();
    }
  }
  r.details["trials"] = done;
  r.details["lifted"] = ok;
  if (!first_error.empty()) r.details["first_error"] = first_error;
  finish(r, t, ok == done, std::to_string(ok) + "/" + std::to_string(done) + " lifted certificates verify and match");
  return r;
}

CriterionResult jensen_on_laminates(const SuiteOptions& o) {
  CriterionResult r = make_result(7, 0.0);
  Timer t;
  double worst = std::numeric_limits<double>::infinity();
  double det_worst = 0.0;
  std::string worst_fn;
  std::size_t certificates = 0, checks = 0;
  std::map<int, std::vector<TestFunction>> battery;
  auto check = [&](const SplittingTree& tree) {
    const DiscreteMeasure mu = measure_of(tree);
    const int n = mu.cols();
    auto& fs = battery[n];
    if (fs.empty()) fs = rank_one_convex_builtins(n);
    ++certificates;
    for (const TestFunction& f : fs) {
      const double d = jensen_defect(f, mu);
      ++checks;
      if (d < worst) {
        worst = d;
        worst_fn = f.id;
      }
    }
    if (n == 2) {
      const double d = jensen_defect(builtin("det"), mu);
      det_worst = std::max(det_worst, std::abs(d));
    }
  };
  const std::size_t trials = scaled(1000, o.trial_scale);
  for (std::size_t i = 0; i < trials && !interrupted(); ++i) {
    const PrelaminateCase c = roundtrip_case(o.seed, i);
    check(c.tree);
    const CertifyResult cert = certify(measure_of(c.tree), 8);
    if (cert.tree) check(*cert.tree);
  }
  for (std::size_t i = 0; i < trials && !interrupted(); ++i) {
    const LiftCase c = lift_case(o.seed, i);
    check(lift_tri(c.mu, c.proj_cert));
  }
  r.details["certificates"] = certificates;
  r.details["evaluations"] = checks;
  r.details["min_defect"] = worst;
  r.details["min_defect_function"] = worst_fn;
  r.details["max_abs_det_defect"] = det_worst;
  finish(r, t, worst >= -1e-8 && det_worst <= 1e-9,
         "min Jensen defect " + fmt(worst) + " (" + worst_fn + ", need >= -1e-08); max |det defect| " +
             fmt(det_worst) + " (tol 1e-09)");
  return r;
}

CriterionResult rank_preservation(const SuiteOptions& o) {
  CriterionResult r = make_result(8, 0.0);
  Timer t;
  const std::size_t trials = scaled(100000, o.trial_scale);
  Rng rng = trial_rng(o.seed, 8, 0);
  std::size_t agree = 0, rank_one = 0, done = 0;
  for (; done < trials && !interrupted(); ++done) {
    const int n = uniform_int(rng, 2, 4);
    Mat2xN x(n);
    switch (uniform_int(rng, 0, 2)) {
      case 0:  // a = e1: a single nonzero first row
        for (int c = 0; c < n; ++c) x(0, c) = uniform_int(rng, -3, 3);
        break;
      case 1:  // b = e_n: only the last column
        x(0, n - 1) = uniform_int(rng, -3, 3);
        x(1, n - 1) = uniform_int(rng, -3, 3);
        break;
      default:
        for (int c = 0; c < n; ++c) x(0, c) = uniform_int(rng, -2, 2);
        x(1, n - 1) = uniform_int(rng, -2, 2);
        break;
    }
    const bool a = rank_le_one(x, 0.0);
    if (a) ++rank_one;
    if (a == rank_le_one(project_diag(x), 0.0)) ++agree;
  }
  r.details["trials"] = done;
  r.details["rank_le_one"] = rank_one;
  r.details["agreements"] = agree;
  finish(r, t, agree == done,
         std::to_string(agree) + "/" + std::to_string(done) + " agree (" + std::to_string(rank_one) + " rank <= 1)");
  return r;
}

CriterionResult pk_convergence(const SuiteOptions& o) {
  CriterionResult r = make_result(9, 0.0);
  Timer t;
  const std::size_t trials = scaled(100, o.trial_scale);
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  std::size_t done = 0;
  for (; done < trials && !interrupted(); ++done) {
    Rng rng = trial_rng(o.seed, 9, done);
    const int n = uniform_int(rng, 2, 4);
    const std::size_t k = static_cast<std::size_t>(uniform_int(rng, 2, 6));
    const std::vector<double> w = dirichlet(rng, k);
    std::vector<Atom> atoms;
    for (std::size_t i = 0; i < k; ++i) {
      Mat2xN x = random_in(rng, n, SubspaceTag::Tri, -1.0, 1.0);
      x(0, 0) = uniform(rng, 2.0, 3.0);
      x(0, n - 1) = uniform(rng, 0.5, 1.0);
      atoms.push_back({w[i], x});
    }
    const DiscreteMeasure mu(std::move(atoms));
    const DiscreteMeasure limit = pushforward(mu, project_diag);
    double prev = 0.0;
    for (int kk = 1; kk <= 64; kk *= 2) {
      const DiscreteMeasure pk = pushforward(mu, [kk](const Mat2xN& x) { return project_k(x, kk); });
      const double d = moment_distance(pk, limit, 2);
      if (kk > 1) {
        const double ratio = d / prev;
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
      }
      prev = d;
    }
  }
  r.details["measures"] = done;
  r.details["min_ratio"] = lo;
  r.details["max_ratio"] = hi;
  finish(r, t, lo >= 0.4 && hi <= 0.6,
         "d(2k)/d(k) in [" + fmt(lo) + ", " + fmt(hi) + "] (need within [0.4, 0.6])");
  return r;
}

CriterionResult null_lagrangian(const SuiteOptions& o) {
  CriterionResult r = make_result(10, 0.0);
  Timer t;
  const std::size_t trials = scaled(100, o.trial_scale);
  const TestFunction det = builtin("det");
  double worst = 0.0;
  std::size_t done = 0;
  for (; done < trials && !interrupted(); ++done) {
    Rng rng = trial_rng(o.seed, 10, done);
    const Mat2xN x0 = random_matrix(rng, 2, -2.0, 2.0);
    const TestField field = TestField::random(rng, 2, 3, 0.5, 256);
    worst = std::max(worst, std::abs(quasiconvexity_defect(det, x0, field)));
  }
  r.details["trials"] = done;
  r.details["grid"] = 256;
  r.details["max_abs_defect"] = worst;
  finish(r, t, worst <= 1e-6, "max |det defect| at grid 256^2 = " + fmt(worst) + " (tol 1e-06)");
  return r;
}

CriterionResult rank_one_pairs(const SuiteOptions& o) {
  CriterionResult r = make_result(11, 0.0);
  Timer t;
  const std::size_t trials = scaled(10000, o.trial_scale);
  Rng rng = trial_rng(o.seed, 11, 0);
  std::size_t ok = 0, done = 0;
  double worst = 0.0;
  while (done < trials && !interrupted()) {
    // Dyadic entries keep X - Y exactly rank one.
    Mat2xN x(2);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) x(i, j) = uniform_int(rng, -16, 16) / 8.0;
    x(0, 1) = uniform_int(rng, 1, 32) / 8.0;
    const double a[2] = {uniform_int(rng, -4, 4) / 4.0, uniform_int(rng, -4, 4) / 4.0};
    const double b[2] = {uniform_int(rng, -4, 4) / 4.0, uniform_int(rng, -4, 4) / 4.0};
    const Mat2xN y = x + Mat2xN::outer(a, b);
    if (!is_admissible(y) || y(0, 1) < 1.0 / 16.0 || !rank_le_one(x - y, 0.0)) continue;
    ++done;
    const Mat2xN diff = psi(x) - psi(y);
    worst = std::max(worst, rank_one_residual(diff));
    if (rank_le_one(diff, 1e-8)) ++ok;
  }
  r.details["pairs"] = done;
  r.details["preserved"] = ok;
  r.details["max_residual"] = worst;
  finish(r, t, ok == done,
         std::to_string(ok) + "/" + std::to_string(done) + " pairs stay rank one (max residual " + fmt(worst) +
             ", tol 1e-08)");
  return r;
}

CriterionResult haar_battery(const SuiteOptions& o) {
  CriterionResult r = make_result(12, 0.0);
  Timer t;
  double ortho = 0.0;
  for (int n : {2, 3}) ortho = std::max(ortho, haar_orthonormality_error(n, 6));
  const std::size_t trials = scaled(20, o.trial_scale);
  double parseval = 0.0, roundtrip = 0.0, riesz_err = 0.0, riesz_nyq_free = 0.0, kernel_share = 0.0;
  std::size_t done = 0;
  for (; done < trials && !interrupted(); ++done) {
    Rng rng = trial_rng(o.seed, 12, done);
    const int n = 2 + static_cast<int>(done % 2);
    const GridField u = random_haar_field(rng, n, 6, 5);
    const HaarCoefficients c = analyze(u);
    const double norm2 = u.l2_norm() * u.l2_norm();
    parseval = std::max(parseval, std::abs(c.energy() - norm2) / std::max(1.0, norm2));
    roundtrip = std::max(roundtrip, (synthesize(c) - u).max_abs() / std::max(1.0, u.max_abs()));

    // sum_j R_j R_j u = -(u - K u), K the projection onto the common kernel.
    GridField sum(n, 6);
    for (int j = 0; j < n; ++j) sum = sum + riesz(riesz(u, j), j);
    const GridField kernel = riesz_kernel_part(u);
    riesz_err = std::max(riesz_err, (sum + (u - kernel)).max_abs() / std::max(1.0, u.max_abs()));
    kernel_share = std::max(kernel_share, kernel.l2_norm() / std::max(1e-300, u.l2_norm()));

    // Fields orthogonal to the kernel satisfy the identity with -Id.
    const GridField w = u - kernel;
    GridField sw(n, 6);
    for (int j = 0; j < n; ++j) sw = sw + riesz(riesz(w, j), j);
    riesz_nyq_free = std::max(riesz_nyq_free, (sw + w).max_abs() / std::max(1.0, w.max_abs()));
  }
  r.details["orthonormality_error"] = ortho;
  r.details["fields"] = done;
  r.details["parseval_error"] = parseval;
  r.details["roundtrip_error"] = roundtrip;
  r.details["riesz_identity_error"] = riesz_err;
  r.details["riesz_identity_error_kernel_free"] = riesz_nyq_free;
  r.details["max_kernel_share"] = kernel_share;
  const bool ok = ortho <= 1e-12 && parseval <= 1e-12 && roundtrip <= 1e-14 && riesz_err <= 1e-10 &&
                  riesz_nyq_free <= 1e-10;
  finish(r, t, ok,
         "orthonormality " + fmt(ortho) + ", Parseval " + fmt(parseval) + " (tol 1e-12); roundtrip " +
             fmt(roundtrip) + " (tol 1e-14); Riesz identity " + fmt(std::max(riesz_err, riesz_nyq_free)) +
             " (tol 1e-10)");
  return r;
}

CriterionResult interpolatory(const SuiteOptions& o) {
  CriterionResult r = make_result(13, 0.0);
  Timer t;
  struct Combo {
    unsigned eps;
    int axis;
  };
  const Combo combos[] = {{1, 0}, {2, 1}, {3, 0}, {3, 1}};
  const int levels[] = {5, 6, 7};
  const std::size_t trials = scaled(1000, o.trial_scale);
  double sup[4][3] = {};
  bool finite = true;
  for (int li = 0; li < 3 && !interrupted(); ++li) {
    const int level = levels[li];
    for (std::size_t i = 0; i < trials && !interrupted(); ++i) {
      Rng rng = trial_rng(o.seed, 130 + level, i);
      const GridField u = random_haar_field(rng, 2, level, level - 1);
      const double norm_u = u.l2_norm();
      if (norm_u == 0.0) continue;
      const HaarCoefficients c = analyze(u);
      const std::vector<double> rn = riesz_norms(u, 2);
      for (int ci = 0; ci < 4; ++ci) {
        double num2 = 0.0;
        for (int j = 0; j < c.level(); ++j)
          for (std::size_t q = 0; q < c.cubes(j); ++q) num2 += c.at(j, q, combos[ci].eps) * c.at(j, q, combos[ci].eps);
        if (num2 == 0.0) continue;
        const double den = std::sqrt(norm_u * rn[combos[ci].axis]);
        const double ratio = den > 0.0 ? std::sqrt(num2) / den : std::numeric_limits<double>::infinity();
        if (!std::isfinite(ratio)) finite = false;
        sup[ci][li] = std::max(sup[ci][li], ratio);
      }
    }
  }
  double worst_spread = 0.0;
  Json constants = Json::array();
  for (int ci = 0; ci < 4; ++ci) {
    const double mx = *std::max_element(sup[ci], sup[ci] + 3);
    const double mn = *std::min_element(sup[ci], sup[ci] + 3);
    const double spread = mn > 0.0 ? mx / mn : std::numeric_limits<double>::infinity();
    worst_spread = std::max(worst_spread, spread);
    Json per_level = Json::object();
    for (int li = 0; li < 3; ++li) per_level[std::to_string(levels[li])] = sup[ci][li];
    constants.push_back(Json{{"eps", combos[ci].eps}, {"axis", combos[ci].axis + 1}, {"sup_ratio", per_level},
                             {"spread", spread}});
  }
  r.details["n"] = 2;
  r.details["fields_per_level"] = trials;
  r.details["constants"] = constants;
  r.details["max_spread"] = worst_spread;
  std::string s = "sup ratio per level:";
  for (int ci = 0; ci < 4; ++ci)
    s += " eps=" + std::to_string(combos[ci].eps) + "/j=" + std::to_string(combos[ci].axis + 1) + " " +
         fmt(sup[ci][0]) + "," + fmt(sup[ci][1]) + "," + fmt(sup[ci][2]) + ";";
  s += " max spread " + fmt(worst_spread) + " (need < 2)";
  finish(r, t, finite && worst_spread < 2.0, s);
  return r;
}

CriterionResult lemma_monotonicity(const SuiteOptions& o) {
  CriterionResult r = make_result(14, 0.0);
  Timer t;
  std::vector<TestFunction> fs;
  for (TestFunction& f : rank_one_convex_builtins(2))
    if (f(Mat2xN(2)) == 0.0) fs.push_back(std::move(f));
  const std::size_t trials = scaled(100, o.trial_scale);
  double worst_step = -std::numeric_limits<double>::infinity();
  double min_initial = std::numeric_limits<double>::infinity();
  double max_final = 0.0;
  std::size_t done = 0, phases = 0;
  for (; done < trials && !interrupted(); ++done) {
    Rng rng = trial_rng(o.seed, 14, done);
    const LemmaFields start = random_lemma_fields(rng, 2, 6, 5);
    std::vector<LemmaFields> chain{start};
    for (int k = 5; k >= 0; --k) {
      CoarsenResult step = coarsen_step(chain.back(), k);
      chain.push_back(std::move(step.after_u));
      chain.push_back(std::move(step.after_v));
    }
    for (const TestFunction& f : fs) {
      double prev = lemma_integral(f, chain[0]);
      min_initial = std::min(min_initial, prev);
      for (std::size_t p = 1; p < chain.size(); ++p) {
        const double cur = lemma_integral(f, chain[p]);
        worst_step = std::max(worst_step, (cur - prev) / std::max(1.0, std::abs(prev)));
        prev = cur;
        ++phases;
      }
      max_final = std::max(max_final, std::abs(prev));
    }
  }
  Json ids = Json::array();
  for (const TestFunction& f : fs) ids.push_back(f.id);
  r.details["expansions"] = done;
  r.details["functions"] = ids;
  r.details["phases_checked"] = phases;
  r.details["max_relative_increase"] = worst_step;
  r.details["min_initial_integral"] = min_initial;
  r.details["max_abs_final_integral"] = max_final;
  finish(r, t, worst_step <= 1e-10 && min_initial >= -1e-9,
         "max relative phase increase " + fmt(worst_step) + " (tol 1e-10); min initial integral " +
             fmt(min_initial) + " (need >= -1e-09)");
  return r;
}

using CriterionFn = CriterionResult (*)(const SuiteOptions&);

struct Entry {
  const char* name;
  CriterionFn fn;
};

const Entry kCriteria[] = {
    {"psi involution", involution},
    {"dual of dual measure", dual_of_dual},
    {"dual barycenter closed form", barycenter_closed_form},
    {"polyconvex duality", polyconvex_duality},
    {"certificate roundtrip", certificate_roundtrip},
    {"diagonal to triangular lifting", lifting},
    {"Jensen on laminates", jensen_on_laminates},
    {"rank preservation of P on Tri", rank_preservation},
    {"P^(k) moment convergence", pk_convergence},
    {"determinant null Lagrangian", null_lagrangian},
    {"duality preserves rank-one pairs", rank_one_pairs},
    {"Haar battery", haar_battery},
    {"interpolatory inequality constant", interpolatory},
    {"coarsening monotonicity", lemma_monotonicity},
};

constexpr int kCriterionCount = static_cast<int>(std::size(kCriteria));

}  // namespace

std::vector<int> suite_criteria() {
  std::vector<int> ids(kCriterionCount);
  for (int i = 0; i < kCriterionCount; ++i) ids[i] = i + 1;
  return ids;
}

std::string criterion_name(int id) {
  if (id < 1 || id > kCriterionCount) fail(ErrorCode::InvalidArgument, "unknown criterion " + std::to_string(id));
  return kCriteria[id - 1].name;
}

CriterionResult run_criterion(int id, const SuiteOptions& opts) {
  criterion_name(id);
  if (!(opts.trial_scale > 0.0)) fail(ErrorCode::InvalidArgument, "trial scale must be positive");
  return kCriteria[id - 1].fn(opts);
}

std::vector<CriterionResult> run_suite(const SuiteOptions& opts) {
  std::vector<CriterionResult> out;
  for (int id : opts.only.empty() ? suite_criteria() : opts.only) {
    if (interrupted()) break;
    out.push_back(run_criterion(id, opts));
  }
  return out;
}

Json to_json(const CriterionResult& r) {
  return Json{{"id", r.id},          {"name", r.name},       {"passed", r.passed},
              {"summary", r.summary}, {"seconds", r.seconds}, {"interrupted", r.interrupted},
              {"details", r.details}};
}

}  // namespace lamlab
