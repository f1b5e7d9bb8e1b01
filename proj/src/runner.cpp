#include "lamlab/runner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "lamlab/convexity.hpp"
#include "lamlab/duality.hpp"
#include "lamlab/error.hpp"
#include "lamlab/haar.hpp"
#include "lamlab/laminate.hpp"
#include "lamlab/random.hpp"
#include "lamlab/suite.hpp"

namespace lamlab {

namespace {

// Stream ids for derive_seed, one per consumer.
enum Stream : std::uint64_t { kQcStream = 0x71, kHaarStream = 0x48, kSearchStream = 0x5e, kRcStream = 0x52 };

std::string normalize_key(std::string k) {
  std::replace(k.begin(), k.end(), '-', '_');
  return k;
}

template <class T>
T get_as(const Json& v, const std::string& key) {
  try {
    return v.get<T>();
  } catch (const nlohmann::json::exception&) {
    fail(ErrorCode::InvalidArgument, "config key '" + key + "' has the wrong type");
  }
}

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) fail(ErrorCode::InvalidArgument, std::string(name) + " must be positive");
}

std::string number_text(const Json& v) { return v.dump(); }

}  // namespace

RunConfig config_from_json(const Json& j) {
  if (!j.is_object()) fail(ErrorCode::InvalidArgument, "config must be a JSON object");
  RunConfig c;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string key = normalize_key(it.key());
    const Json& v = it.value();
    if (key == "seed") {
      if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0))
        fail(ErrorCode::InvalidArgument, "seed must be a non-negative integer");
      c.seed = v.get<std::uint64_t>();
    } else if (key == "tol_rank") c.tol_rank = get_as<double>(v, key);
    else if (key == "tol_merge") c.tol_merge = get_as<double>(v, key);
    else if (key == "delta_plus") c.delta_plus = get_as<double>(v, key);
    else if (key == "grid") c.grid = get_as<int>(v, key);
    else if (key == "max_order") c.max_order = get_as<int>(v, key);
    else if (key == "trials") c.trials = get_as<std::size_t>(v, key);
    else if (key == "samples") c.samples = get_as<std::size_t>(v, key);
    else if (key == "modes") c.modes = get_as<int>(v, key);
    else if (key == "amplitude") c.amplitude = get_as<double>(v, key);
    else if (key == "box") c.box = get_as<double>(v, key);
    else if (key == "n") c.n = get_as<int>(v, key);
    else if (key == "level") c.level = get_as<int>(v, key);
    else if (key == "padding") c.padding = get_as<int>(v, key);
    else if (key == "trial_scale") c.trial_scale = get_as<double>(v, key);
    else if (key == "check_polyconvex") c.check_polyconvex = get_as<bool>(v, key);
    else if (key == "fn") c.fn = get_as<std::string>(v, key);
    else if (key == "in") c.in = get_as<std::string>(v, key);
    else if (key == "measure") c.measure = get_as<std::string>(v, key);
    else if (key == "cert") c.cert = get_as<std::string>(v, key);
    else if (key == "x0") c.x0 = get_as<std::string>(v, key);
    else if (key == "out") c.out = get_as<std::string>(v, key);
    else if (key == "report") c.report = get_as<std::string>(v, key);
    else if (key == "format") {
      const std::string f = get_as<std::string>(v, key);
      if (f == "json") c.format = ReportFormat::Json;
      else if (f == "csv") c.format = ReportFormat::Csv;
      else fail(ErrorCode::InvalidArgument, "format must be json or csv, got '" + f + "'");
    } else {
      fail(ErrorCode::InvalidArgument, "unknown config key '" + it.key() + "'");
    }
  }
  require_positive(c.tol_rank, "tol-rank");
  require_positive(c.tol_merge, "tol-merge");
  require_positive(c.delta_plus, "delta-plus");
  require_positive(c.amplitude, "amplitude");
  require_positive(c.box, "box");
  require_positive(c.trial_scale, "trial-scale");
  if (c.delta_plus >= 1.0) fail(ErrorCode::InvalidArgument, "delta-plus must be below 1");
  if (c.grid < 1) fail(ErrorCode::InvalidArgument, "grid must be at least 1");
  if (c.max_order < 1 || c.max_order > kMaxCertifyOrder)
    fail(ErrorCode::InvalidArgument, "max-order must lie in [1, " + std::to_string(kMaxCertifyOrder) + "]");
  if (c.trials < 1) fail(ErrorCode::InvalidArgument, "trials must be at least 1");
  if (c.samples < 1) fail(ErrorCode::InvalidArgument, "samples must be at least 1");
  if (c.modes < 0) fail(ErrorCode::InvalidArgument, "modes must be non-negative");
  if (c.n < 2 || c.n > kMaxCols) fail(ErrorCode::InvalidArgument, "n must lie in [2, " + std::to_string(kMaxCols) + "]");
  if (c.level < 1) fail(ErrorCode::InvalidArgument, "level must be at least 1");
  if (c.padding < 1) fail(ErrorCode::InvalidArgument, "padding must be at least 1");
  return c;
}

Json to_json(const RunConfig& c) {
  return Json{{"seed", c.seed},
              {"tol_rank", c.tol_rank},
              {"tol_merge", c.tol_merge},
              {"delta_plus", c.delta_plus},
              {"grid", c.grid},
              {"max_order", c.max_order},
              {"trials", c.trials},
              {"samples", c.samples},
              {"modes", c.modes},
              {"amplitude", c.amplitude},
              {"box", c.box},
              {"n", c.n},
              {"level", c.level},
              {"padding", c.padding},
              {"trial_scale", c.trial_scale},
              {"check_polyconvex", c.check_polyconvex},
              {"fn", c.fn},
              {"in", c.in},
              {"measure", c.measure},
              {"cert", c.cert},
              {"x0", c.x0},
              {"out", c.out},
              {"report", c.report},
              {"format", c.format == ReportFormat::Json ? "json" : "csv"}};
}

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"certify",   "lift",        "dualize",       "jensen", "rc-check",
                                              "qc-defect", "haar-verify", "random-search", "suite"};
  return names;
}

namespace {

struct Context {
  const RunConfig& c;
  Json result = Json::object();
  Json records = Json::array();
  Json warnings = Json::array();
  std::string artifact;
  int exit_status = kExitOk;

  void falsified() { exit_status = kExitFalsified; }
};

std::string input_or_stdin(const std::string& p) { return p.empty() ? std::string("-") : p; }

MeasureOptions measure_options(const RunConfig& c) {
  MeasureOptions m;
  m.merge_tol = c.tol_merge;
  return m;
}

struct LoadedMeasure {
  DiscreteMeasure mu;
  std::optional<SplittingTree> tree;
};

LoadedMeasure load_measure_or_tree(const RunConfig& c, const std::string& arg, const char* what) {
  const Json j = load_json_argument(input_or_stdin(arg), what);
  if (looks_like_tree(j)) {
    SplittingTree t = tree_from_json(j);
    return {measure_of(t, c.tol_merge), t};
  }
  return {measure_from_json(j, measure_options(c)), std::nullopt};
}

TestFunction require_function(const RunConfig& c) {
  if (c.fn.empty()) fail(ErrorCode::InvalidArgument, "--fn is required (a builtin id or user:<path>)");
  return resolve_function(c.fn);
}

int function_cols(const TestFunction& f, const RunConfig& c) { return f.arity ? f.arity : c.n; }

double value_scale(std::initializer_list<double> vs) {
  double s = 1.0;
  for (double v : vs) s = std::max(s, std::abs(v));
  return s;
}

void cmd_certify(Context& ctx) {
  const RunConfig& c = ctx.c;
  const DiscreteMeasure mu = measure_from_json(load_json_argument(input_or_stdin(c.in), "measure"), measure_options(c));
  CertifyOptions opts;
  opts.rank_tol = c.tol_rank;
  const CertifyResult res = certify(mu, c.max_order, opts);
  ctx.result["atoms"] = mu.size();
  ctx.result["status"] = to_string(res.status);
  ctx.result["explored_states"] = res.explored_states;
  Json rec{{"status", to_string(res.status)}, {"atoms", mu.size()}, {"explored_states", res.explored_states}};
  if (res.tree) {
    const Json cert = to_json(*res.tree);
    ctx.result["verified"] = verify(*res.tree, c.tol_rank);
    ctx.result["certificate"] = cert;
    ctx.artifact = dump(cert);
  }
  if (res.status == CertifyStatus::NotPrelaminate) {
    ctx.result["witness"] = to_json(mu);
    ctx.falsified();
  }
  if (res.status == CertifyStatus::Indeterminate)
    ctx.warnings.push_back("atom count exceeds max-order; no verdict");
  ctx.records.push_back(std::move(rec));
}

void cmd_lift(Context& ctx) {
  const RunConfig& c = ctx.c;
  if (c.measure.empty() || c.cert.empty()) fail(ErrorCode::InvalidArgument, "lift needs --measure and --cert");
  const DiscreteMeasure mu = measure_from_json(load_json_argument(c.measure, "measure"), measure_options(c));
  const SplittingTree proj = tree_from_json(load_json_argument(c.cert, "certificate"));
  LiftOptions opts;
  opts.rank_tol = c.tol_rank;
  const SplittingTree lifted = lift_tri(mu, proj, opts);
  const bool ok = verify(lifted, c.tol_rank);
  const bool matches = approx_equal(measure_of(lifted, c.tol_merge), mu, 1e-9, 1e-12);
  const Json cert = to_json(lifted);
  ctx.result["atoms"] = mu.size();
  ctx.result["leaves"] = lifted.leaf_count();
  ctx.result["verified"] = ok;
  ctx.result["measure_matches"] = matches;
  ctx.result["certificate"] = cert;
  ctx.artifact = dump(cert);
  ctx.records.push_back(Json{{"atoms", mu.size()}, {"leaves", lifted.leaf_count()}, {"verified", ok},
                             {"measure_matches", matches}});
  if (!ok || !matches) ctx.falsified();
}

void cmd_dualize(Context& ctx) {
  const RunConfig& c = ctx.c;
  const DiscreteMeasure mu = measure_from_json(load_json_argument(input_or_stdin(c.in), "measure"), measure_options(c));
  DualityOptions opts{c.delta_plus, c.tol_merge};
  std::vector<std::string> warnings;
  const DiscreteMeasure dual = dual_measure(mu, opts, &warnings);
  for (const std::string& w : warnings) ctx.warnings.push_back(w);
  double cond = 0.0;
  for (const Atom& a : mu.atoms()) cond = std::max(cond, psi_condition(a.matrix));
  const Json dj = to_json(dual);
  ctx.artifact = dump(dj);
  ctx.result["atoms"] = mu.size();
  ctx.result["dual"] = dj;
  ctx.result["barycenter_dual"] = to_json(barycenter(dual));
  ctx.result["barycenter_closed_form"] = to_json(dual_barycenter_closed_form(mu, opts));
  ctx.result["max_psi_condition"] = cond;
  if (!c.check_polyconvex) return;
  const PolyconvexDualityReport rep = polyconvex_duality_check(mu, opts);
  const Mat2xN bar = barycenter(mu);
  double scale = 1.0;
  for (const Atom& a : mu.atoms()) scale = std::max(scale, a.matrix.max_abs() * a.matrix.max_abs());
  const double defect_tol = 1e-9 * scale;
  const double gap_tol = defect_tol / bar(0, 1);
  const bool polyconvex = std::abs(rep.defect) <= defect_tol;
  const bool gap_vanishes = rep.barycenter_gap <= gap_tol;
  Json rec{{"defect", rep.defect},          {"barycenter_gap", rep.barycenter_gap},
           {"defect_tol", defect_tol},      {"gap_tol", gap_tol},
           {"polyconvex", polyconvex},      {"gap_vanishes", gap_vanishes},
           {"consistent", polyconvex == gap_vanishes}};
  ctx.result["polyconvex_check"] = rec;
  ctx.records.push_back(std::move(rec));
  if (polyconvex != gap_vanishes) {
    ctx.result["witness"] = to_json(mu);
    ctx.falsified();
  }
}

void cmd_jensen(Context& ctx) {
  const RunConfig& c = ctx.c;
  const TestFunction f = require_function(c);
  const LoadedMeasure in = load_measure_or_tree(c, c.in, "measure or certificate");
  std::string laminate;
  if (in.tree) {
    laminate = verify(*in.tree, c.tol_rank) ? "certificate verified" : "certificate fails verification";
  } else {
    CertifyOptions opts;
    opts.rank_tol = c.tol_rank;
    laminate = std::string(to_string(certify(in.mu, std::min(c.max_order, kMaxCertifyOrder), opts).status));
  }
  const double defect = jensen_defect(f, in.mu);
  double scale = std::abs(f(barycenter(in.mu)));
  for (const Atom& a : in.mu.atoms()) scale = std::max(scale, std::abs(f(a.matrix)));
  scale = std::max(1.0, scale);
  const bool negative = defect < -kFalsifyTol * scale;
  Json rec{{"fn", f.id},
           {"declared_class", to_string(f.declared_class)},
           {"defect", defect},
           {"tolerance", kFalsifyTol * scale},
           {"verdict", negative ? "falsified" : "not falsified"},
           {"laminate_status", laminate}};
  ctx.result = rec;
  if (negative) {
    ctx.result["witness"] = to_json(in.mu);
    ctx.falsified();
  }
  ctx.records.push_back(std::move(rec));
}

Json witness_json(const RankOneConvexityReport& rep) {
  return Json{{"x", to_json(rep.witness_x)}, {"y", to_json(rep.witness_y)}, {"lambda", rep.witness_lambda}};
}

void cmd_rc_check(Context& ctx) {
  const RunConfig& c = ctx.c;
  const TestFunction f = require_function(c);
  RankOneSampling s;
  s.samples = c.samples;
  s.seed = c.seed;
  s.box = c.box;
  const RankOneConvexityReport rep = rank_one_convexity_defect(f, function_cols(f, c), s);
  Json rec{{"fn", f.id},
           {"declared_class", to_string(f.declared_class)},
           {"verdict", rep.falsified ? "falsified" : "not falsified"},
           {"worst_defect", rep.worst_defect},
           {"evaluations", rep.evaluations},
           {"contradicts_declared_class", rep.falsified && implies_rank_one_convex(f.declared_class)},
           {"witness", witness_json(rep)}};
  ctx.result = rec;
  ctx.records.push_back(std::move(rec));
  if (rep.falsified) ctx.falsified();
}

void cmd_qc_defect(Context& ctx) {
  const RunConfig& c = ctx.c;
  const TestFunction f = require_function(c);
  Mat2xN x0 = c.x0.empty() ? Mat2xN(function_cols(f, c)) : matrix_from_json(load_json_argument(c.x0, "x0"));
  std::vector<TestField> fields;
  if (!c.in.empty()) {
    fields.push_back(test_field_from_json(load_json_argument(c.in, "test field")));
  } else {
    for (std::size_t i = 0; i < c.trials; ++i) {
      Rng rng = trial_rng(c.seed, kQcStream, i);
      fields.push_back(TestField::random(rng, x0.cols(), c.modes, c.amplitude, c.grid));
    }
  }
  std::vector<double> defects(fields.size(), std::numeric_limits<double>::quiet_NaN());
  parallel_for(fields.size(), [&](std::size_t i) {
    if (!interrupted()) defects[i] = quasiconvexity_defect(f, x0, fields[i]);
  });
  const double tol = std::max(1e-8, kFalsifyTol * value_scale({f(x0)}));
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  std::size_t negatives = 0, done = 0;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (std::isnan(defects[i])) continue;
    ++done;
    const bool neg = defects[i] < -tol;
    lo = std::min(lo, defects[i]);
    hi = std::max(hi, defects[i]);
    Json rec{{"trial", i}, {"defect", defects[i]}, {"verdict", neg ? "falsified" : "not falsified"}};
    if (neg) {
      ++negatives;
      rec["witness"] = Json{{"x0", to_json(x0)}, {"field", to_json(fields[i])}};
    }
    ctx.records.push_back(std::move(rec));
  }
  ctx.result = Json{{"fn", f.id},         {"declared_class", to_string(f.declared_class)},
                    {"x0", to_json(x0)},  {"fields", done},
                    {"grid", fields.empty() ? 0 : fields[0].grid},
                    {"min_defect", lo},   {"max_defect", hi},
                    {"tolerance", tol},   {"negative_count", negatives},
                    {"verdict", negatives ? "falsified" : "not falsified"}};
  if (negatives) ctx.falsified();
}

void add_check(Context& ctx, const std::string& name, double value, double tol, bool upper = true) {
  const bool ok = upper ? value <= tol : value >= tol;
  ctx.records.push_back(Json{{"check", name}, {"value", value}, {"tolerance", tol}, {"passed", ok}});
  ctx.result["checks"][name] = Json{{"value", value}, {"tolerance", tol}, {"passed", ok}};
  if (!ok) ctx.falsified();
}

void cmd_haar_verify(Context& ctx) {
  const RunConfig& c = ctx.c;
  const int n = c.n, L = c.level;
  if (n < 2 || n > 3) fail(ErrorCode::InvalidArgument, "haar-verify supports n = 2 or 3");
  if (L * n > 21) fail(ErrorCode::InvalidArgument, "level too large for n");
  const int ortho_level = std::min(L, 18 / n);
  if (ortho_level < L) ctx.warnings.push_back("orthonormality checked at level " + std::to_string(ortho_level));
  ctx.result["checks"] = Json::object();
  add_check(ctx, "orthonormality", haar_orthonormality_error(n, ortho_level), 1e-12);

  const unsigned eps_count = (1u << n) - 1;
  std::vector<std::pair<unsigned, int>> combos;
  for (unsigned e = 1; e <= eps_count; ++e)
    for (int j = 0; j < n; ++j)
      if (e & (1u << j)) combos.emplace_back(e, j);

  struct Trial {
    double parseval = 0, roundtrip = 0, riesz = 0, contraction = 0, orth = 0, idem = 0;
    std::vector<double> ratios;
    bool done = false;
  };
  std::vector<Trial> trials(c.trials);
  parallel_for(c.trials, [&](std::size_t i) {
    if (interrupted()) return;
    Trial& t = trials[i];
    Rng rng = trial_rng(c.seed, kHaarStream, i);
    const GridField u = random_haar_field(rng, n, L, L - 1);
    const HaarCoefficients co = analyze(u);
    const double nu = u.l2_norm();
    const double scale = std::max(1.0, u.max_abs());
    t.parseval = std::abs(co.energy() - nu * nu) / std::max(1.0, nu * nu);
    t.roundtrip = (synthesize(co) - u).max_abs() / scale;
    GridField sum(n, L);
    for (int j = 0; j < n; ++j) {
      const GridField r = riesz(u, j);
      t.contraction = std::max(t.contraction, r.l2_norm() - nu);
      sum = sum + riesz(r, j);
    }
    t.riesz = (sum + (u - riesz_kernel_part(u))).max_abs() / scale;
    const GridField p1 = project_p1(u), p2 = project_p2(u);
    t.orth = std::abs(inner(p1, p2)) / std::max(1.0, nu * nu);
    t.idem = (project_p1(p1) - p1).max_abs() / scale;
    const std::vector<double> rn = riesz_norms(u, c.padding);
    for (auto [e, j] : combos) {
      double num2 = 0.0;
      for (int lv = 0; lv < co.level(); ++lv)
        for (std::size_t q = 0; q < co.cubes(lv); ++q) num2 += co.at(lv, q, e) * co.at(lv, q, e);
      const double den = std::sqrt(nu * rn[j]);
      t.ratios.push_back(num2 == 0.0 ? 0.0
                         : den > 0.0 ? std::sqrt(num2) / den
                                     : std::numeric_limits<double>::infinity());
    }
    t.done = true;
  });
  Trial worst;
  worst.ratios.assign(combos.size(), 0.0);
  std::size_t done = 0;
  for (const Trial& t : trials) {
    if (!t.done) continue;
    ++done;
    worst.parseval = std::max(worst.parseval, t.parseval);
    worst.roundtrip = std::max(worst.roundtrip, t.roundtrip);
    worst.riesz = std::max(worst.riesz, t.riesz);
    worst.contraction = std::max(worst.contraction, t.contraction);
    worst.orth = std::max(worst.orth, t.orth);
    worst.idem = std::max(worst.idem, t.idem);
    for (std::size_t k = 0; k < combos.size(); ++k) worst.ratios[k] = std::max(worst.ratios[k], t.ratios[k]);
  }
  ctx.result["fields"] = done;
  add_check(ctx, "parseval", worst.parseval, 1e-12);
  add_check(ctx, "roundtrip", worst.roundtrip, 1e-14);
  add_check(ctx, "riesz_identity", worst.riesz, 1e-10);
  add_check(ctx, "riesz_contraction", worst.contraction, 1e-12);
  add_check(ctx, "p1_p2_orthogonality", worst.orth, 1e-12);
  add_check(ctx, "p1_idempotence", worst.idem, 1e-14);
  Json constants = Json::array();
  for (std::size_t k = 0; k < combos.size(); ++k) {
    Json rec{{"check", "interpolatory_sup"}, {"eps", combos[k].first}, {"axis", combos[k].second + 1},
             {"value", worst.ratios[k]},     {"finite", std::isfinite(worst.ratios[k])}};
    constants.push_back(rec);
    ctx.records.push_back(rec);
    if (!std::isfinite(worst.ratios[k])) ctx.falsified();
  }
  ctx.result["interpolatory_constants"] = constants;

  // Coarsening chain on random admissible expansions.
  std::vector<TestFunction> fs;
  for (TestFunction& f : rank_one_convex_builtins(n))
    if (f(Mat2xN(n)) == 0.0) fs.push_back(std::move(f));
  double worst_step = -std::numeric_limits<double>::infinity();
  double min_initial = std::numeric_limits<double>::infinity();
  const std::size_t lemma_trials = std::min<std::size_t>(c.trials, 100);
  for (std::size_t i = 0; i < lemma_trials && !interrupted(); ++i) {
    Rng rng = trial_rng(c.seed, kHaarStream + 1, i);
    std::vector<LemmaFields> chain{random_lemma_fields(rng, n, L, L - 1)};
    for (int k = L - 1; k >= 0; --k) {
      CoarsenResult s = coarsen_step(chain.back(), k);
      chain.push_back(std::move(s.after_u));
      chain.push_back(std::move(s.after_v));
    }
    for (const TestFunction& f : fs) {
      double prev = lemma_integral(f, chain[0]);
      min_initial = std::min(min_initial, prev);
      for (std::size_t p = 1; p < chain.size(); ++p) {
        const double cur = lemma_integral(f, chain[p]);
        worst_step = std::max(worst_step, (cur - prev) / std::max(1.0, std::abs(prev)));
        prev = cur;
      }
    }
  }
  if (!fs.empty() && lemma_trials > 0) {
    add_check(ctx, "coarsening_monotonicity", worst_step, 1e-10);
    add_check(ctx, "coarsening_initial_integral", min_initial, -1e-9, false);
  }
}

std::vector<TestFunction> search_battery(const RunConfig& c) {
  if (c.fn.empty()) return rank_one_convex_builtins(c.n);
  std::vector<TestFunction> out;
  std::stringstream ss(c.fn);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    if (item == "builtins") {
      for (TestFunction& f : rank_one_convex_builtins(c.n)) out.push_back(std::move(f));
      continue;
    }
    TestFunction f = resolve_function(item);
    if (!f.accepts(c.n)) fail(ErrorCode::Shape, "function '" + f.id + "' does not accept n = " + std::to_string(c.n));
    out.push_back(std::move(f));
  }
  if (out.empty()) fail(ErrorCode::InvalidArgument, "empty function battery");
  return out;
}

void cmd_random_search(Context& ctx) {
  const RunConfig& c = ctx.c;
  const int n = c.n;
  const std::vector<TestFunction> battery = search_battery(c);
  std::vector<RankOneConvexityReport> rc(battery.size());
  for (std::size_t k = 0; k < battery.size(); ++k) {
    RankOneSampling s;
    s.samples = c.samples;
    s.seed = derive_seed(c.seed, kRcStream, k);
    s.box = c.box;
    rc[k] = rank_one_convexity_defect(battery[k], n, s);
  }
  const bool with_qc = n <= 3;
  if (!with_qc) ctx.warnings.push_back("quasiconvexity fields need n <= 3; only Jensen defects sampled");
  std::vector<Json> hits(c.trials);
  std::vector<char> ran(c.trials, 0);
  parallel_for(c.trials, [&](std::size_t t) {
    if (interrupted()) return;
    Rng rng = trial_rng(c.seed, kSearchStream, t);
    PrelaminateSpec spec;
    spec.seed = rng();
    spec.order = uniform_int(rng, 2, std::min(c.max_order, 8));
    spec.constraint = SubspaceTag::Full;
    spec.root = Mat2xN(n);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < n; ++j) spec.root(i, j) = uniform(rng, -c.box, c.box);
    spec.scale = c.box;
    const DiscreteMeasure mu = measure_of(random_prelaminate(spec), c.tol_merge);
    std::optional<TestField> field;
    if (with_qc) field = TestField::random(rng, n, c.modes, c.amplitude, c.grid);
    Json found = Json::array();
    for (std::size_t k = 0; k < battery.size(); ++k) {
      const TestFunction& f = battery[k];
      const std::string status = rc[k].falsified ? "explained" : "review";
      double scale = std::abs(f(barycenter(mu)));
      for (const Atom& a : mu.atoms()) scale = std::max(scale, std::abs(f(a.matrix)));
      scale = std::max(1.0, scale);
      const double jd = jensen_defect(f, mu);
      if (jd < -kFalsifyTol * scale)
        found.push_back(Json{{"trial", t}, {"fn", f.id}, {"kind", "jensen"}, {"defect", jd},
                             {"rc_falsified", rc[k].falsified}, {"status", status},
                             {"witness", Json{{"measure", to_json(mu)}}}});
      if (field) {
        const double qd = quasiconvexity_defect(f, spec.root, *field);
        const double tol = std::max(1e-8, kFalsifyTol * value_scale({f(spec.root)}));
        if (qd < -tol)
          found.push_back(Json{{"trial", t}, {"fn", f.id}, {"kind", "quasiconvexity"}, {"defect", qd},
                               {"rc_falsified", rc[k].falsified}, {"status", status},
                               {"witness", Json{{"x0", to_json(spec.root)}, {"field", to_json(*field)}}}});
      }
    }
    hits[t] = std::move(found);
    ran[t] = 1;
  });
  std::size_t done = 0, review = 0, total = 0;
  for (std::size_t t = 0; t < c.trials; ++t) {
    if (!ran[t]) continue;
    ++done;
    for (Json& h : hits[t]) {
      ++total;
      if (h["status"] == "review") ++review;
      ctx.records.push_back(std::move(h));
    }
  }
  Json fns = Json::array();
  for (std::size_t k = 0; k < battery.size(); ++k)
    fns.push_back(Json{{"fn", battery[k].id},
                       {"declared_class", to_string(battery[k].declared_class)},
                       {"rc_falsified", rc[k].falsified},
                       {"rc_worst_defect", rc[k].worst_defect}});
  ctx.result = Json{{"trials_run", done}, {"hits", total}, {"review_hits", review}, {"functions", fns}};
  if (total) ctx.falsified();
}

void cmd_suite(Context& ctx) {
  const RunConfig& c = ctx.c;
  SuiteOptions opts;
  opts.seed = c.seed;
  opts.trial_scale = c.trial_scale;
  std::size_t passed = 0, total = 0;
  for (const CriterionResult& r : run_suite(opts)) {
    ++total;
    if (r.passed) ++passed;
    ctx.records.push_back(to_json(r));
  }
  ctx.result = Json{{"criteria", total}, {"passed", passed}};
  if (passed != total || total != suite_criteria().size()) ctx.falsified();
}

using Command = void (*)(Context&);

Command find_command(std::string_view name) {
  static const std::pair<const char*, Command> table[] = {
      {"certify", cmd_certify},         {"lift", cmd_lift},
      {"dualize", cmd_dualize},         {"jensen", cmd_jensen},
      {"rc-check", cmd_rc_check},       {"qc-defect", cmd_qc_defect},
      {"haar-verify", cmd_haar_verify}, {"random-search", cmd_random_search},
      {"suite", cmd_suite}};
  for (const auto& [n, f] : table)
    if (name == n) return f;
  return nullptr;
}

Json base_report(std::string_view sub, const RunConfig& c) {
  return Json{{"tool", "lamlab"},
              {"version", LAMLAB_VERSION},
              {"subcommand", sub},
              {"config", to_json(c)},
              {"tolerances",
               Json{{"rank", c.tol_rank},
                    {"merge", c.tol_merge},
                    {"delta_plus", c.delta_plus},
                    {"weight", kWeightTol},
                    {"falsify", kFalsifyTol}}}};
}

const char* status_name(int exit_status) {
  switch (exit_status) {
    case kExitOk: return "ok";
    case kExitFalsified: return "falsified";
    default: return "error";
  }
}

std::string format_report(const Json& report, ReportFormat f) {
  if (f == ReportFormat::Json) return dump(report);
  const Json& recs = report["records"];
  if (!recs.empty()) return records_to_csv(recs);
  Json row = report.contains("error") ? report["error"] : report["result"];
  row["status"] = report["status"];
  return records_to_csv(Json::array({row}));
}

}  // namespace

RunOutcome run(std::string_view subcommand, const RunConfig& config) {
  Json report = base_report(subcommand, config);
  Context ctx{config, Json::object(), Json::array(), Json::array(), {}, kExitOk};
  std::string error_code, error_message;
  try {
    Command cmd = find_command(subcommand);
    if (!cmd) {
      std::string known;
      for (const std::string& s : subcommands()) known += (known.empty() ? "" : ", ") + s;
      fail(ErrorCode::InvalidArgument, "unknown subcommand '" + std::string(subcommand) + "' (expected one of " + known + ")");
    }
    cmd(ctx);
    if (!config.out.empty() && !ctx.artifact.empty()) write_text(config.out, ctx.artifact);
  } catch (const Error& e) {
    error_code = to_string(e.code());
    error_message = e.what();
  } catch (const std::exception& e) {
    error_code = "Internal";
    error_message = e.what();
  }
  int exit_status = ctx.exit_status;
  const bool was_interrupted = interrupted();
  if (!error_code.empty() || was_interrupted) exit_status = kExitError;
  report["status"] = was_interrupted && error_code.empty() ? "interrupted" : status_name(exit_status);
  report["exit_status"] = exit_status;
  report["interrupted"] = was_interrupted;
  report["result"] = ctx.result;
  report["records"] = ctx.records;
  report["warnings"] = ctx.warnings;
  if (!error_code.empty()) report["error"] = Json{{"code", error_code}, {"message", error_message}};

  RunOutcome out{exit_status, format_report(report, config.format)};
  if (!config.report.empty()) {
    try {
      write_text(config.report, out.report);
    } catch (const Error& e) {
      report["status"] = "error";
      report["exit_status"] = kExitError;
      report["error"] = Json{{"code", to_string(e.code())}, {"message", e.what()}};
      out = {kExitError, format_report(report, config.format)};
    }
  }
  return out;
}

namespace {

bool is_matrix(const Json& j) {
  return j.is_object() && j.size() == 2 && j.contains("n") && j.contains("rows") && j["rows"].is_array();
}

void flatten(const std::string& prefix, const Json& j, std::vector<std::pair<std::string, std::string>>& out) {
  auto key = [&](const std::string& k) { return prefix.empty() ? k : prefix + "." + k; };
  if (is_matrix(j)) {
    const Json& rows = j["rows"];
    const std::size_t n = rows[0].size();
    for (std::size_t col = 0; col < n; ++col)
      for (std::size_t row = 0; row < 2; ++row)
        out.emplace_back(key(std::to_string(row + 1) + std::to_string(col + 1)), number_text(rows[row][col]));
  } else if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) flatten(key(it.key()), it.value(), out);
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) flatten(key(std::to_string(i)), j[i], out);
  } else if (j.is_string()) {
    out.emplace_back(prefix, j.get<std::string>());
  } else if (j.is_null()) {
    out.emplace_back(prefix, "");
  } else {
    out.emplace_back(prefix, j.dump());
  }
}

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch;
  }
  return q + "\"";
}

}  // namespace

std::string records_to_csv(const Json& records) {
  std::vector<std::vector<std::pair<std::string, std::string>>> rows;
  std::vector<std::string> header;
  for (const Json& r : records) {
    rows.emplace_back();
    flatten("", r, rows.back());
    for (const auto& [k, v] : rows.back())
      if (std::find(header.begin(), header.end(), k) == header.end()) header.push_back(k);
  }
  std::string out;
  for (std::size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + csv_cell(header[i]);
  out += "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (i) out += ",";
      for (const auto& [k, v] : row)
        if (k == header[i]) {
          out += csv_cell(v);
          break;
        }
    }
    out += "\n";
  }
  return out;
}

}  // namespace lamlab
