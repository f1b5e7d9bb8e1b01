#include "lamlab/haar.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <string>

#include "lamlab/error.hpp"

namespace lamlab {

namespace {

constexpr int kMaxGridCellsLog2 = 24;

void check_grid(int n, int level) {
  if (n < 1 || n > 3) fail(ErrorCode::Shape, "grid fields have dimension 1, 2 or 3");
  if (level < 0 || level * n > kMaxGridCellsLog2)
    fail(ErrorCode::Shape, "grid level " + std::to_string(level) + " too large for n = " + std::to_string(n));
}

void check_same_grid(const GridField& a, const GridField& b) {
  if (a.dim() != b.dim() || a.level() != b.level()) fail(ErrorCode::Shape, "fields live on different grids");
}

std::size_t ipow(std::size_t b, int e) {
  std::size_t r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

// Linear index <-> tuple, first axis slowest.
void to_tuple(std::size_t lin, std::size_t side, int n, int* out) {
  for (int d = n - 1; d >= 0; --d) {
    out[d] = static_cast<int>(lin % side);
    lin /= side;
  }
}

std::size_t to_linear(const int* t, std::size_t side, int n) {
  std::size_t lin = 0;
  for (int d = 0; d < n; ++d) lin = lin * side + static_cast<std::size_t>(t[d]);
  return lin;
}

// Sign of the eps-Haar function on child `child` (bit d = upper half on axis d).
inline double child_sign(unsigned eps, unsigned child) {
  return (std::popcount(eps & child) & 1u) ? -1.0 : 1.0;
}

// Normalization 2^(j n / 2) of an L^2-normalized Haar function at level j.
double haar_norm(int j, int n) { return std::pow(2.0, 0.5 * j * n); }

}  // namespace

GridField::GridField(int n, int level) : n_(n), level_(level) {
  check_grid(n, level);
  values_.assign(ipow(side(), n), 0.0);
}

GridField::GridField(int n, int level, std::vector<double> values)
    : n_(n), level_(level), values_(std::move(values)) {
  check_grid(n, level);
  if (values_.size() != ipow(side(), n))
    fail(ErrorCode::Shape, "expected " + std::to_string(ipow(side(), n)) + " values, got " +
                               std::to_string(values_.size()));
}

double GridField::cell_volume() const noexcept { return std::ldexp(1.0, -level_ * n_); }

double GridField::mean() const noexcept {
  double s = 0.0;
  for (double v : values_) s += v;
  return s / static_cast<double>(values_.size());
}

double GridField::l2_norm() const noexcept {
  double s = 0.0;
  for (double v : values_) s += v * v;
  return std::sqrt(s * cell_volume());
}

double GridField::max_abs() const noexcept {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double inner(const GridField& a, const GridField& b) {
  check_same_grid(a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s * a.cell_volume();
}

GridField operator-(const GridField& a, const GridField& b) {
  check_same_grid(a, b);
  GridField out = a;
  for (std::size_t i = 0; i < a.size(); ++i) out[i] -= b[i];
  return out;
}

GridField operator+(const GridField& a, const GridField& b) {
  check_same_grid(a, b);
  GridField out = a;
  for (std::size_t i = 0; i < a.size(); ++i) out[i] += b[i];
  return out;
}

GridField operator*(double s, const GridField& a) {
  GridField out = a;
  for (double& v : out.values()) v *= s;
  return out;
}

double haar_eval(const HaarIndex& idx, std::span<const double> x) {
  const int n = static_cast<int>(x.size());
  if (n < 1 || n > 3) fail(ErrorCode::Shape, "Haar functions are defined for n = 1, 2, 3");
  if (idx.eps == 0 || idx.eps >= (1u << n)) fail(ErrorCode::InvalidArgument, "eps must be a nonzero n-bit pattern");
  const double scale = std::ldexp(1.0, idx.level);
  double v = 1.0;
  for (int d = 0; d < n; ++d) {
    const double t = x[d] * scale - idx.k[d];
    if (t < 0.0 || t >= 1.0) return 0.0;
    if (idx.eps & (1u << d)) v *= (t < 0.5) ? 1.0 : -1.0;
  }
  return v;
}

HaarCoefficients::HaarCoefficients(int n, int level) : n_(n), level_(level) {
  check_grid(n, level);
  detail_.resize(level);
  for (int j = 0; j < level; ++j) detail_[j].assign(cubes(j) * eps_count(), 0.0);
}

double& HaarCoefficients::at(const HaarIndex& idx) {
  if (idx.level < 0 || idx.level >= level_) fail(ErrorCode::Index, "Haar level out of range");
  if (idx.eps == 0 || idx.eps > eps_count()) fail(ErrorCode::Index, "eps out of range");
  return at(idx.level, cube_index(idx.level, std::span<const int>(idx.k.data(), n_)), idx.eps);
}

double HaarCoefficients::at(const HaarIndex& idx) const {
  return const_cast<HaarCoefficients*>(this)->at(idx);
}

double HaarCoefficients::energy() const {
  double s = mean * mean;
  for (const auto& lvl : detail_)
    for (double c : lvl) s += c * c;
  return s;
}

std::size_t HaarCoefficients::cube_index(int j, std::span<const int> k) const {
  const int side = 1 << j;
  for (int v : k)
    if (v < 0 || v >= side) fail(ErrorCode::Index, "cube position outside the unit cube");
  return to_linear(k.data(), static_cast<std::size_t>(side), n_);
}

std::vector<int> HaarCoefficients::cube_tuple(int j, std::size_t cube) const {
  std::vector<int> t(n_);
  to_tuple(cube, std::size_t{1} << j, n_, t.data());
  return t;
}

HaarCoefficients analyze(const GridField& u) {
  const int n = u.dim(), L = u.level();
  HaarCoefficients c(n, L);
  const unsigned children = 1u << n;
  std::vector<double> avg(u.values().begin(), u.values().end());
  int k[3], ch[3];
  for (int j = L - 1; j >= 0; --j) {
    const std::size_t side = std::size_t{1} << j;
    const std::size_t cubes = ipow(side, n);
    std::vector<double> next(cubes);
    const double norm = 1.0 / (children * haar_norm(j, n));
    for (std::size_t q = 0; q < cubes; ++q) {
      to_tuple(q, side, n, k);
      double total = 0.0;
      double sums[8] = {};
      for (unsigned cb = 0; cb < children; ++cb) {
        for (int d = 0; d < n; ++d) ch[d] = 2 * k[d] + static_cast<int>((cb >> d) & 1u);
        const double a = avg[to_linear(ch, 2 * side, n)];
        total += a;
        for (unsigned e = 1; e < children; ++e) sums[e] += child_sign(e, cb) * a;
      }
      next[q] = total / children;
      for (unsigned e = 1; e < children; ++e) c.at(j, q, e) = sums[e] * norm;
    }
    avg.swap(next);
  }
  c.mean = avg[0];
  return c;
}

GridField synthesize(const HaarCoefficients& c) {
  const int n = c.dim(), L = c.level();
  const unsigned children = 1u << n;
  std::vector<double> avg{c.mean};
  int k[3], ch[3];
  for (int j = 0; j < L; ++j) {
    const std::size_t side = std::size_t{1} << j;
    const std::size_t cubes = ipow(side, n);
    std::vector<double> next(ipow(2 * side, n));
    const double norm = haar_norm(j, n);
    for (std::size_t q = 0; q < cubes; ++q) {
      to_tuple(q, side, n, k);
      for (unsigned cb = 0; cb < children; ++cb) {
        double v = avg[q];
        for (unsigned e = 1; e < children; ++e) v += c.at(j, q, e) * norm * child_sign(e, cb);
        for (int d = 0; d < n; ++d) ch[d] = 2 * k[d] + static_cast<int>((cb >> d) & 1u);
        next[to_linear(ch, 2 * side, n)] = v;
      }
    }
    avg.swap(next);
  }
  return GridField(n, L, std::move(avg));
}

namespace {

template <class Keep>
GridField project_if(const GridField& u, Keep keep) {
  HaarCoefficients c = analyze(u);
  c.mean = 0.0;
  for (int j = 0; j < c.level(); ++j)
    for (std::size_t q = 0; q < c.cubes(j); ++q)
      for (unsigned e = 1; e <= c.eps_count(); ++e)
        if (!keep(e)) c.at(j, q, e) = 0.0;
  return synthesize(c);
}

}  // namespace

GridField project_eps(const GridField& u, unsigned eps) {
  if (eps == 0 || eps >= (1u << u.dim())) fail(ErrorCode::InvalidArgument, "eps must be a nonzero n-bit pattern");
  return project_if(u, [eps](unsigned e) { return e == eps; });
}

GridField project_p1(const GridField& u) {
  const unsigned last = 1u << (u.dim() - 1);
  return project_if(u, [last](unsigned e) { return (e & last) == 0; });
}

GridField project_p2(const GridField& u) {
  const unsigned last = 1u << (u.dim() - 1);
  return project_if(u, [last](unsigned e) { return e == last; });
}

namespace {

using Complex = std::complex<double>;

// FFTW plans keyed by (n, side, direction); planning is serialized, execution
// with the new-array interface is thread-safe.
fftw_plan plan_for(int n, int side, int sign) {
  static std::mutex mutex;
  static std::map<std::tuple<int, int, int>, fftw_plan> plans;
  std::lock_guard lock(mutex);
  auto key = std::make_tuple(n, side, sign);
  auto it = plans.find(key);
  if (it != plans.end()) return it->second;
  const std::size_t total = ipow(static_cast<std::size_t>(side), n);
  std::vector<Complex> in(total), out(total);
  int dims[3] = {side, side, side};
  fftw_plan p = fftw_plan_dft(n, dims, reinterpret_cast<fftw_complex*>(in.data()),
                              reinterpret_cast<fftw_complex*>(out.data()), sign,
                              FFTW_ESTIMATE | FFTW_UNALIGNED);
  plans.emplace(key, p);
  return p;
}

std::vector<Complex> forward(const GridField& u) {
  std::vector<Complex> in(u.size()), out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) in[i] = u[i];
  fftw_execute_dft(plan_for(u.dim(), static_cast<int>(u.side()), FFTW_FORWARD),
                   reinterpret_cast<fftw_complex*>(in.data()), reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

GridField inverse_real(std::vector<Complex> spec, int n, int level) {
  std::vector<Complex> out(spec.size());
  const int side = 1 << level;
  fftw_execute_dft(plan_for(n, side, FFTW_BACKWARD), reinterpret_cast<fftw_complex*>(spec.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  std::vector<double> v(out.size());
  const double scale = 1.0 / static_cast<double>(out.size());
  for (std::size_t i = 0; i < out.size(); ++i) v[i] = out[i].real() * scale;
  return GridField(n, level, std::move(v));
}

// Signed frequencies of mode `lin`, with Nyquist entries set to zero.
void frequencies(std::size_t lin, std::size_t side, int n, double* xi) {
  int t[3];
  to_tuple(lin, side, n, t);
  for (int d = 0; d < n; ++d) {
    const std::size_t k = static_cast<std::size_t>(t[d]);
    if (2 * k == side)
      xi[d] = 0.0;
    else
      xi[d] = (2 * k < side) ? static_cast<double>(k) : static_cast<double>(k) - static_cast<double>(side);
  }
}

void check_axis(const GridField& u, int axis) {
  if (axis < 0 || axis >= u.dim()) fail(ErrorCode::InvalidArgument, "axis out of range");
}

template <class Multiplier>
GridField apply_multiplier(const GridField& u, Multiplier m) {
  std::vector<Complex> spec = forward(u);
  double xi[3];
  for (std::size_t i = 0; i < spec.size(); ++i) {
    frequencies(i, u.side(), u.dim(), xi);
    spec[i] *= m(xi);
  }
  return inverse_real(std::move(spec), u.dim(), u.level());
}

double norm_of(const double* xi, int n) {
  double s = 0.0;
  for (int d = 0; d < n; ++d) s += xi[d] * xi[d];
  return std::sqrt(s);
}

}  // namespace

GridField riesz(const GridField& u, int axis) {
  check_axis(u, axis);
  const int n = u.dim();
  return apply_multiplier(u, [&](const double* xi) {
    const double r = norm_of(xi, n);
    return r == 0.0 ? Complex(0.0) : Complex(0.0, -xi[axis] / r);
  });
}

GridField riesz_kernel_part(const GridField& u) {
  const int n = u.dim();
  return apply_multiplier(u, [&](const double* xi) {
    return norm_of(xi, n) == 0.0 ? Complex(1.0) : Complex(0.0);
  });
}

GridField spectral_derivative(const GridField& u, int axis) {
  check_axis(u, axis);
  return apply_multiplier(u, [&](const double* xi) {
    return Complex(0.0, 2.0 * std::numbers::pi * xi[axis]);
  });
}

GridField zero_pad(const GridField& u, int factor) {
  if (factor < 1 || !std::has_single_bit(static_cast<unsigned>(factor)))
    fail(ErrorCode::InvalidArgument, "padding factor must be a power of two");
  const int extra = std::countr_zero(static_cast<unsigned>(factor));
  GridField out(u.dim(), u.level() + extra);
  int t[3];
  for (std::size_t i = 0; i < u.size(); ++i) {
    to_tuple(i, u.side(), u.dim(), t);
    out[to_linear(t, out.side(), u.dim())] = u[i];
  }
  return out;
}

std::vector<double> riesz_norms(const GridField& u, int padding) {
  const int n = u.dim();
  const double m = u.mean();
  GridField centered = u;
  for (double& v : centered.values()) v -= m;
  const GridField w = zero_pad(centered, padding);
  const std::vector<Complex> spec = forward(w);
  std::vector<double> acc(n, 0.0);
  double xi[3];
  for (std::size_t i = 0; i < spec.size(); ++i) {
    frequencies(i, w.side(), n, xi);
    const double r2 = xi[0] * xi[0] + (n > 1 ? xi[1] * xi[1] : 0.0) + (n > 2 ? xi[2] * xi[2] : 0.0);
    if (r2 == 0.0) continue;
    const double e = std::norm(spec[i]);
    for (int d = 0; d < n; ++d) acc[d] += e * xi[d] * xi[d] / r2;
  }
  // Parseval for the unnormalized DFT, cell volume of the padded grid, and
  // the dilation factor back to the units of u.
  const double cells = static_cast<double>(w.size());
  const double scale = std::pow(static_cast<double>(padding), n) / (cells * cells);
  for (double& a : acc) a = std::sqrt(a * scale);
  return acc;
}

double interpolatory_ratio(const GridField& u, unsigned eps, int axis, int padding) {
  check_axis(u, axis);
  if (eps == 0 || eps >= (1u << u.dim())) fail(ErrorCode::InvalidArgument, "eps must be a nonzero n-bit pattern");
  if (!(eps & (1u << axis))) fail(ErrorCode::InvalidArgument, "interpolatory ratio needs eps_j = 1");
  const double norm_u = u.l2_norm();
  if (norm_u == 0.0) fail(ErrorCode::ZeroField, "interpolatory ratio of the zero field");
  const HaarCoefficients c = analyze(u);
  double num2 = 0.0;
  for (int j = 0; j < c.level(); ++j)
    for (std::size_t q = 0; q < c.cubes(j); ++q) num2 += c.at(j, q, eps) * c.at(j, q, eps);
  if (num2 == 0.0) return 0.0;
  const double den = std::sqrt(norm_u) * std::sqrt(riesz_norms(u, padding)[axis]);
  if (den == 0.0) return std::numeric_limits<double>::infinity();
  return std::sqrt(num2) / den;
}

namespace {

template <class Allowed>
HaarCoefficients random_coefficients(Rng& rng, int n, int grid_level, int max_level, Allowed allowed) {
  if (max_level >= grid_level) fail(ErrorCode::Shape, "max_level must be below the grid level");
  HaarCoefficients c(n, grid_level);
  for (int j = 0; j <= max_level; ++j) {
    const double level_scale = std::pow(2.0, uniform(rng, -2.0, 2.0));
    const double density = uniform(rng, 0.3, 1.0);
    for (std::size_t q = 0; q < c.cubes(j); ++q)
      for (unsigned e = 1; e <= c.eps_count(); ++e) {
        if (!allowed(e)) continue;
        if (uniform(rng, 0.0, 1.0) < density) c.at(j, q, e) = level_scale * normal(rng);
      }
  }
  return c;
}

}  // namespace

GridField random_haar_field(Rng& rng, int n, int grid_level, int max_level) {
  return synthesize(random_coefficients(rng, n, grid_level, max_level, [](unsigned) { return true; }));
}

double haar_orthonormality_error(int n, int L) {
  check_grid(n, L);
  const unsigned E = (1u << n) - 1;
  const std::size_t grid_side = std::size_t{1} << L;
  const double vol = std::ldexp(1.0, -L * n);
  double worst = 0.0;
  std::vector<double> x(n), psi_a(E);
  int ka[3], local[3], kb[3], cell[3];
  for (int ja = 0; ja < L; ++ja) {
    const std::size_t side_a = std::size_t{1} << ja;
    // Offsets of each finer level inside the accumulator of one cube.
    std::vector<std::size_t> base(L + 1, 0);
    for (int jb = ja; jb < L; ++jb) base[jb + 1] = base[jb] + ipow(std::size_t{1} << (jb - ja), n) * E;
    const std::size_t per_a = base[L];
    const std::size_t cells_side = grid_side >> ja;
    const std::size_t cells = ipow(cells_side, n);
    std::vector<double> acc(per_a * E);
    for (std::size_t qa = 0; qa < ipow(side_a, n); ++qa) {
      to_tuple(qa, side_a, n, ka);
      std::fill(acc.begin(), acc.end(), 0.0);
      for (std::size_t c = 0; c < cells; ++c) {
        to_tuple(c, cells_side, n, local);
        for (int d = 0; d < n; ++d) {
          cell[d] = ka[d] * static_cast<int>(cells_side) + local[d];
          x[d] = (cell[d] + 0.5) / static_cast<double>(grid_side);
        }
        HaarIndex ia{ja, {ka[0], n > 1 ? ka[1] : 0, n > 2 ? ka[2] : 0}, 1};
        for (unsigned ea = 1; ea <= E; ++ea) {
          ia.eps = ea;
          psi_a[ea - 1] = haar_norm(ja, n) * haar_eval(ia, x);
        }
        for (int jb = ja; jb < L; ++jb) {
          for (int d = 0; d < n; ++d) {
            kb[d] = cell[d] >> (L - jb);
            local[d] = kb[d] - ka[d] * (1 << (jb - ja));
          }
          const std::size_t lb = to_linear(local, std::size_t{1} << (jb - ja), n);
          HaarIndex ib{jb, {kb[0], n > 1 ? kb[1] : 0, n > 2 ? kb[2] : 0}, 1};
          for (unsigned eb = 1; eb <= E; ++eb) {
            ib.eps = eb;
            const double vb = haar_norm(jb, n) * haar_eval(ib, x);
            if (vb == 0.0) continue;
            const std::size_t slot = base[jb] + lb * E + (eb - 1);
            for (unsigned ea = 0; ea < E; ++ea) acc[ea * per_a + slot] += psi_a[ea] * vb;
          }
        }
      }
      for (unsigned ea = 0; ea < E; ++ea)
        for (std::size_t s = 0; s < per_a; ++s) {
          const double expected = (s == ea) ? 1.0 : 0.0;  // same cube and eps
          worst = std::max(worst, std::abs(acc[ea * per_a + s] * vol - expected));
        }
    }
  }
  return worst;
}

namespace {

void check_lemma_shape(const LemmaFields& f) {
  const int n = f.v.dim();
  if (n < 2) fail(ErrorCode::Shape, "lemma fields need n >= 2");
  if (static_cast<int>(f.u.size()) != n - 1)
    fail(ErrorCode::Shape, "expected " + std::to_string(n - 1) + " u fields");
  for (const GridField& u : f.u) check_same_grid(u, f.v);
}

// Analyzes `field` and checks that its coefficients are supported on
// levels <= K and on eps values accepted by `allowed`.
template <class Allowed>
HaarCoefficients checked_coefficients(const GridField& field, int K, Allowed allowed, const char* name) {
  HaarCoefficients c = analyze(field);
  double scale = std::abs(c.mean);
  for (int j = 0; j < c.level(); ++j)
    for (double v : c.level_data(j)) scale = std::max(scale, std::abs(v));
  const double tol = 1e-12 * (1.0 + scale);
  if (std::abs(c.mean) > tol) fail(ErrorCode::Shape, std::string(name) + " has a nonzero cube average");
  for (int j = 0; j < c.level(); ++j)
    for (std::size_t q = 0; q < c.cubes(j); ++q)
      for (unsigned e = 1; e <= c.eps_count(); ++e) {
        const double v = std::abs(c.at(j, q, e));
        if (v <= tol) continue;
        if (j > K) fail(ErrorCode::Shape, std::string(name) + " has coefficients above level K");
        if (!allowed(e)) fail(ErrorCode::Shape, std::string(name) + " has coefficients outside its eps set");
      }
  return c;
}

GridField drop_level(HaarCoefficients c, int K) {
  for (double& v : c.level_data(K)) v = 0.0;
  return synthesize(c);
}

}  // namespace

CoarsenResult coarsen_step(const LemmaFields& fields, int K) {
  check_lemma_shape(fields);
  const int n = fields.v.dim();
  if (K < 0 || K >= fields.v.level()) fail(ErrorCode::Shape, "coarsening level outside the grid");
  const unsigned last = 1u << (n - 1);
  CoarsenResult out{fields, fields};
  for (std::size_t i = 0; i < fields.u.size(); ++i) {
    HaarCoefficients c =
        checked_coefficients(fields.u[i], K, [last](unsigned e) { return (e & last) == 0; }, "u field");
    out.after_u.u[i] = drop_level(std::move(c), K);
  }
  HaarCoefficients cv = checked_coefficients(fields.v, K, [last](unsigned e) { return e == last; }, "v field");
  out.after_v = out.after_u;
  out.after_v.v = drop_level(std::move(cv), K);
  return out;
}

double lemma_integral(const TestFunction& f, const LemmaFields& fields) {
  check_lemma_shape(fields);
  const int n = fields.v.dim();
  if (!f.accepts(n)) fail(ErrorCode::Shape, "function '" + f.id + "' does not accept n = " + std::to_string(n));
  double s = 0.0;
  Mat2xN m(n);
  for (std::size_t c = 0; c < fields.v.size(); ++c) {
    for (int i = 0; i + 1 < n; ++i) m(0, i) = fields.u[i][c];
    m(1, n - 1) = fields.v[c];
    s += f(m);
  }
  return s * fields.v.cell_volume();
}

LemmaFields random_lemma_fields(Rng& rng, int n, int grid_level, int max_level) {
  if (n < 2 || n > 3) fail(ErrorCode::Shape, "lemma fields need n = 2 or 3");
  const unsigned last = 1u << (n - 1);
  LemmaFields f{{}, GridField(n, grid_level)};
  for (int i = 0; i + 1 < n; ++i)
    f.u.push_back(synthesize(random_coefficients(rng, n, grid_level, max_level,
                                                 [last](unsigned e) { return (e & last) == 0; })));
  f.v = synthesize(random_coefficients(rng, n, grid_level, max_level, [last](unsigned e) { return e == last; }));
  return f;
}

}  // namespace lamlab
