#include "lamlab/convexity.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "json.hpp"
#include "lamlab/error.hpp"

namespace lamlab {

std::string_view to_string(ConvexityClass c) {
  switch (c) {
    case ConvexityClass::Linear: return "linear";
    case ConvexityClass::Quasiaffine: return "quasiaffine";
    case ConvexityClass::Convex: return "convex";
    case ConvexityClass::Polyconvex: return "polyconvex";
    case ConvexityClass::RankOneConvex: return "rank_one_convex";
    case ConvexityClass::None: return "none";
  }
  return "none";
}

ConvexityClass convexity_from_string(std::string_view s) {
  for (ConvexityClass c : {ConvexityClass::Linear, ConvexityClass::Quasiaffine, ConvexityClass::Convex,
                           ConvexityClass::Polyconvex, ConvexityClass::RankOneConvex, ConvexityClass::None})
    if (s == to_string(c)) return c;
  fail(ErrorCode::InvalidArgument, "unknown convexity class '" + std::string(s) + "'");
}

bool implies_rank_one_convex(ConvexityClass c) { return c != ConvexityClass::None; }

double TestFunction::operator()(const Mat2xN& x) const {
  if (!accepts(x.cols()))
    fail(ErrorCode::Shape, "function '" + id + "' expects n = " + std::to_string(arity) + ", got " +
                               std::to_string(x.cols()));
  const double v = eval(x);
  if (!std::isfinite(v)) fail(ErrorCode::Domain, "function '" + id + "' is not finite here");
  return v;
}

namespace {

double linear_form(const Mat2xN& x) {
  double s = 0.0;
  for (int j = 0; j < x.cols(); ++j) s += (1.0 + 0.25 * j) * x(0, j) + (-0.5 + 0.125 * j) * x(1, j);
  return s;
}

double minor_sum(const Mat2xN& x) {
  double s = 0.0;
  for (int j = 0; j < x.cols(); ++j)
    for (int k = j + 1; k < x.cols(); ++k) s += x(0, j) * x(1, k) - x(0, k) * x(1, j);
  return s;
}

TestFunction make(std::string id, int arity, ConvexityClass c, std::function<double(const Mat2xN&)> f) {
  return TestFunction{std::move(id), arity, c, FunctionDomain::Full, std::move(f)};
}

TestFunction alibert_dacorogna(double gamma) {
  // |X|^4 - gamma |X|^2 det X on 2x2 matrices: convex iff |gamma| <= 2 sqrt(2)/3,
  // polyconvex iff |gamma| <= 1, rank-one convex iff |gamma| <= 2/sqrt(3).
  const double g = std::abs(gamma);
  ConvexityClass c = ConvexityClass::None;
  if (g <= 2.0 * std::numbers::sqrt2 / 3.0)
    c = ConvexityClass::Convex;
  else if (g <= 1.0)
    c = ConvexityClass::Polyconvex;
  else if (g <= 2.0 / std::numbers::sqrt3)
    c = ConvexityClass::RankOneConvex;
  return make("alibert_dacorogna", 2, c, [gamma](const Mat2xN& x) {
    const double n2 = x.frobenius2();
    return n2 * n2 - gamma * n2 * det2(x);
  });
}

}  // namespace

TestFunction builtin(std::string_view id) {
  using C = ConvexityClass;
  if (id == "linear") return make("linear", 0, C::Linear, linear_form);
  if (id == "norm2") return make("norm2", 0, C::Convex, [](const Mat2xN& x) { return x.frobenius2(); });
  if (id == "x11sq") return make("x11sq", 0, C::Convex, [](const Mat2xN& x) { return x(0, 0) * x(0, 0); });
  if (id == "det") return make("det", 2, C::Quasiaffine, [](const Mat2xN& x) { return det2(x); });
  if (id == "det_plus_linear")
    return make("det_plus_linear", 2, C::Quasiaffine,
                [](const Mat2xN& x) { return det2(x) + linear_form(x); });
  if (id == "neg_det_plus_linear")
    return make("neg_det_plus_linear", 2, C::Quasiaffine,
                [](const Mat2xN& x) { return -det2(x) + linear_form(x); });
  if (id == "minor_sum") return make("minor_sum", 0, C::Quasiaffine, minor_sum);
  if (id == "norm2_plus_minors")
    return make("norm2_plus_minors", 0, C::Polyconvex,
                [](const Mat2xN& x) { return x.frobenius2() + 4.0 * minor_sum(x); });
  if (id == "alibert_dacorogna") return alibert_dacorogna(1.1);
  if (id == "neg_norm2") return make("neg_norm2", 0, C::None, [](const Mat2xN& x) { return -x.frobenius2(); });
  if (id.starts_with("alibert_dacorogna:")) {
    const std::string g(id.substr(std::string_view("alibert_dacorogna:").size()));
    char* end = nullptr;
    const double gamma = std::strtod(g.c_str(), &end);
    if (end == g.c_str() || *end != '\0') fail(ErrorCode::UnknownId, "bad gamma in '" + std::string(id) + "'");
    TestFunction f = alibert_dacorogna(gamma);
    f.id = std::string(id);
    return f;
  }
  fail(ErrorCode::UnknownId, "unknown test function '" + std::string(id) + "'");
}

std::vector<std::string> builtin_ids() {
  return {"linear",    "norm2",          "x11sq",     "det",
          "det_plus_linear", "neg_det_plus_linear", "minor_sum", "norm2_plus_minors",
          "alibert_dacorogna", "neg_norm2"};
}

std::vector<TestFunction> rank_one_convex_builtins(int n) {
  std::vector<TestFunction> out;
  for (const std::string& id : builtin_ids()) {
    TestFunction f = builtin(id);
    if (implies_rank_one_convex(f.declared_class) && f.accepts(n)) out.push_back(std::move(f));
  }
  return out;
}

TestFunction polynomial_from_json(std::string_view json_text, std::string id) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, std::string("polynomial JSON: ") + e.what());
  }
  struct Term {
    double coef;
    std::vector<int> powers;  // 2n exponents, row-major
  };
  std::vector<Term> terms;
  int n = 0;
  ConvexityClass cls = ConvexityClass::None;
  try {
    n = j.at("n").get<int>();
    if (n < 2 || n > kMaxCols) fail(ErrorCode::Shape, "polynomial n out of range");
    if (j.contains("class")) cls = convexity_from_string(j.at("class").get<std::string>());
    for (const auto& t : j.at("terms")) {
      Term term{t.at("coef").get<double>(), {}};
      const auto& p = t.at("powers");
      if (p.size() != 2) fail(ErrorCode::Shape, "powers must have two rows");
      int degree = 0;
      for (const auto& row : p) {
        if (static_cast<int>(row.size()) != n) fail(ErrorCode::Shape, "powers row length must equal n");
        for (const auto& e : row) {
          const int k = e.get<int>();
          if (k < 0) fail(ErrorCode::InvalidArgument, "negative exponent");
          term.powers.push_back(k);
          degree += k;
        }
      }
      if (degree > 4) fail(ErrorCode::InvalidArgument, "user polynomials are limited to degree 4");
      terms.push_back(std::move(term));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, std::string("polynomial JSON: ") + e.what());
  }
  auto eval = [terms, n](const Mat2xN& x) {
    double s = 0.0;
    for (const Term& t : terms) {
      double p = t.coef;
      for (int e = 0; e < 2 * n; ++e)
        for (int k = 0; k < t.powers[e]; ++k) p *= x(e / n, e % n);
      s += p;
    }
    return s;
  };
  return TestFunction{std::move(id), n, cls, FunctionDomain::Full, std::move(eval)};
}

TestFunction resolve_function(std::string_view spec) {
  if (spec.starts_with("user:")) {
    const std::string path(spec.substr(5));
    std::ifstream in(path);
    if (!in) fail(ErrorCode::Io, "cannot open polynomial file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return polynomial_from_json(ss.str(), std::string(spec));
  }
  return builtin(spec);
}

TestFunction compose_linear(TestFunction f, const Mat2xN& a, const SquareMatrix& b) {
  if (std::abs(b.determinant()) == 0.0) fail(ErrorCode::SingularB, "right factor B is singular");
  TestFunction g;
  g.id = f.id + " o T";
  g.arity = b.size();
  g.declared_class = f.declared_class;
  g.domain = f.domain;
  g.eval = [f = std::move(f), a, b](const Mat2xN& x) { return f(conjugate(x, a, b)); };
  return g;
}

RankOneConvexityReport rank_one_convexity_defect(const TestFunction& f, int n,
                                                 const RankOneSampling& opts) {
  if (opts.samples < 1) fail(ErrorCode::InvalidArgument, "need at least one sample");
  if (!f.accepts(n)) fail(ErrorCode::Shape, "function '" + f.id + "' does not accept n = " + std::to_string(n));
  RankOneConvexityReport rep;
  rep.witness_x = Mat2xN(n);
  rep.witness_y = Mat2xN(n);
  Rng rng(derive_seed(opts.seed, 0x7263, 0));
  std::vector<double> a(2), b(n);
  bool have = false;
  for (std::size_t s = 0; s < opts.samples; ++s) {
    if ((s & 1023) == 0 && interrupted()) {
      rep.interrupted = true;
      break;
    }
    Mat2xN x(n);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < n; ++j) x(i, j) = uniform(rng, -opts.box, opts.box);
    for (double& v : a) v = normal(rng);
    for (double& v : b) v = normal(rng);
    const Mat2xN y = x + opts.box * Mat2xN::outer(a, b);
    const double fx = f(x), fy = f(y);
    for (int k = 1; k <= 9; ++k) {
      const double lam = 0.1 * k;
      const double fz = f(lam * x + (1.0 - lam) * y);
      const double d = lam * fx + (1.0 - lam) * fy - fz;
      ++rep.evaluations;
      const double scale = std::max({1.0, std::abs(lam * fx), std::abs((1.0 - lam) * fy), std::abs(fz)});
      if (d < -opts.tol * scale) rep.falsified = true;
      if (!have || d < rep.worst_defect) {
        have = true;
        rep.worst_defect = d;
        rep.witness_x = x;
        rep.witness_y = y;
        rep.witness_lambda = lam;
      }
    }
  }
  return rep;
}

TestField TestField::random(Rng& rng, int n, int modes_per_component, double amplitude, int grid,
                            int max_freq) {
  if (n < 1 || n > 3) fail(ErrorCode::Shape, "test fields live on cubes of dimension 1 to 3");
  TestField field;
  field.n = n;
  field.grid = grid;
  for (int c = 0; c < 2; ++c)
    for (int m = 0; m < modes_per_component; ++m) {
      SineMode mode;
      mode.component = c;
      mode.amplitude = uniform(rng, -amplitude, amplitude);
      for (int d = 0; d < n; ++d) mode.freq.push_back(uniform_int(rng, 1, max_freq));
      field.modes.push_back(std::move(mode));
    }
  return field;
}

Mat2xN TestField::gradient(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != n) fail(ErrorCode::Shape, "point dimension mismatch");
  if (n < 2) fail(ErrorCode::Shape, "gradients of 2 x n type need n >= 2");
  constexpr double two_pi = 2.0 * std::numbers::pi;
  Mat2xN g(n);
  for (const SineMode& m : modes) {
    for (int d = 0; d < n; ++d) {
      double v = m.amplitude * two_pi * m.freq[d] * std::cos(two_pi * m.freq[d] * x[d]);
      for (int e = 0; e < n; ++e)
        if (e != d) v *= std::sin(two_pi * m.freq[e] * x[e]);
      g(m.component, d) += v;
    }
  }
  return g;
}

namespace {

void check_field(const TestField& field) {
  if (field.n < 2 || field.n > 3) fail(ErrorCode::Shape, "test field dimension must be 2 or 3");
  if (field.grid < 1) fail(ErrorCode::InvalidArgument, "quadrature grid must be positive");
  for (const SineMode& m : field.modes) {
    if (m.component < 0 || m.component > 1) fail(ErrorCode::Shape, "mode component must be 0 or 1");
    if (static_cast<int>(m.freq.size()) != field.n) fail(ErrorCode::Shape, "mode frequency count must equal n");
    for (int k : m.freq)
      if (k < 1) fail(ErrorCode::InvalidArgument, "mode frequencies must be positive");
  }
}

// Calls visit(gradient) at every cell midpoint using per-axis sin/cos tables.
template <class F>
void for_each_midpoint_gradient(const TestField& field, F&& visit) {
  check_field(field);
  constexpr double two_pi = 2.0 * std::numbers::pi;
  const int n = field.n, g = field.grid;
  const std::size_t nm = field.modes.size();
  std::vector<double> sn(nm * n * g), cs(nm * n * g);
  for (std::size_t m = 0; m < nm; ++m)
    for (int d = 0; d < n; ++d)
      for (int i = 0; i < g; ++i) {
        const double x = (i + 0.5) / g;
        const double k = field.modes[m].freq[d];
        sn[(m * n + d) * g + i] = std::sin(two_pi * k * x);
        cs[(m * n + d) * g + i] = two_pi * k * std::cos(two_pi * k * x);
      }
  std::size_t cells = 1;
  for (int d = 0; d < n; ++d) cells *= g;
  std::vector<int> idx(n, 0);
  for (std::size_t c = 0; c < cells; ++c) {
    std::size_t r = c;
    for (int d = n - 1; d >= 0; --d) {
      idx[d] = static_cast<int>(r % g);
      r /= g;
    }
    Mat2xN grad(n);
    for (std::size_t m = 0; m < nm; ++m) {
      const SineMode& mode = field.modes[m];
      for (int d = 0; d < n; ++d) {
        double v = mode.amplitude * cs[(m * n + d) * g + idx[d]];
        for (int e = 0; e < n; ++e)
          if (e != d) v *= sn[(m * n + e) * g + idx[e]];
        grad(mode.component, d) += v;
      }
    }
    visit(grad);
  }
}

}  // namespace

std::vector<Mat2xN> TestField::gradient_samples() const {
  std::vector<Mat2xN> out;
  for_each_midpoint_gradient(*this, [&](const Mat2xN& g) { out.push_back(g); });
  return out;
}

double quasiconvexity_defect(const TestFunction& f, const Mat2xN& x0, const TestField& field) {
  if (x0.cols() != field.n) fail(ErrorCode::Shape, "X0 column count must equal the field dimension");
  double sum = 0.0;
  std::size_t count = 0;
  for_each_midpoint_gradient(field, [&](const Mat2xN& g) {
    sum += f(x0 + g);
    ++count;
  });
  return sum / static_cast<double>(count) - f(x0);
}

}  // namespace lamlab
