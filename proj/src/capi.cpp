#include "lamlab/lamlab.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include "lamlab/convexity.hpp"
#include "lamlab/duality.hpp"
#include "lamlab/error.hpp"
#include "lamlab/haar.hpp"
#include "lamlab/json_io.hpp"
#include "lamlab/laminate.hpp"
#include "lamlab/random.hpp"
#include "lamlab/runner.hpp"

struct lam_measure {
  lamlab::DiscreteMeasure m;
};

struct lam_tree {
  lamlab::SplittingTree t;
};

struct lam_field {
  lamlab::GridField f;
};

namespace {

thread_local std::string g_last_error;

lam_status set_error(lam_status s, const char* msg) {
  g_last_error = msg;
  return s;
}

template <class F>
lam_status guard(F&& body) {
  try {
    body();
    return LAM_OK;
  } catch (const lamlab::Error& e) {
    return set_error(static_cast<lam_status>(static_cast<int>(e.code())), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(LAM_INTERNAL_ERROR, "out of memory");
  } catch (const std::exception& e) {
    return set_error(LAM_INTERNAL_ERROR, e.what());
  } catch (...) {
    return set_error(LAM_INTERNAL_ERROR, "unknown failure");
  }
}

void need(const void* p, const char* name) {
  if (!p) lamlab::fail(lamlab::ErrorCode::InvalidArgument, std::string(name) + " must not be NULL");
}

lamlab::Mat2xN read_matrix(const double* x, int n) {
  need(x, "matrix");
  if (n < 2 || n > lamlab::kMaxCols) lamlab::fail(lamlab::ErrorCode::Shape, "column count out of range");
  return lamlab::Mat2xN::from_rows({x, static_cast<std::size_t>(n)}, {x + n, static_cast<std::size_t>(n)});
}

void write_matrix(const lamlab::Mat2xN& m, double* out) {
  const int n = m.cols();
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < n; ++c) out[r * n + c] = m(r, c);
}

char* copy_string(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

}  // namespace

extern "C" {

const char* lam_version(void) { return LAMLAB_VERSION; }

const char* lam_last_error(void) { return g_last_error.c_str(); }

const char* lam_status_name(lam_status status) {
  if (status == LAM_OK) return "Ok";
  if (status == LAM_INTERNAL_ERROR) return "InternalError";
  if (status >= LAM_INVALID_ARGUMENT && status <= LAM_IO_ERROR)
    return lamlab::to_string(static_cast<lamlab::ErrorCode>(static_cast<int>(status)));
  return "UnknownStatus";
}

void lam_string_free(char* s) { std::free(s); }

lam_status lam_rank_le_one(const double* d, int n, double tol, int* result) {
  return guard([&] {
    need(result, "result");
    if (!(tol >= 0.0)) lamlab::fail(lamlab::ErrorCode::InvalidArgument, "tol must be non-negative");
    *result = lamlab::rank_le_one(read_matrix(d, n), tol) ? 1 : 0;
  });
}

lam_status lam_project_diag(const double* x, int n, double* out) {
  return guard([&] {
    need(out, "out");
    write_matrix(lamlab::project_diag(read_matrix(x, n)), out);
  });
}

lam_status lam_project_k(const double* x, int n, double k, double* out) {
  return guard([&] {
    need(out, "out");
    write_matrix(lamlab::project_k(read_matrix(x, n), k), out);
  });
}

lam_status lam_det2(const double* x, double* out) {
  return guard([&] {
    need(out, "out");
    *out = lamlab::det2(read_matrix(x, 2));
  });
}

lam_status lam_psi(const double* x, double delta_plus, double* out) {
  return guard([&] {
    need(out, "out");
    write_matrix(lamlab::psi(read_matrix(x, 2), delta_plus), out);
  });
}

lam_status lam_measure_create(int n, size_t count, const double* weights, const double* matrices,
                              int renormalize, lam_measure** out) {
  return guard([&] {
    need(weights, "weights");
    need(matrices, "matrices");
    need(out, "out");
    std::vector<lamlab::Atom> atoms;
    for (size_t i = 0; i < count; ++i) atoms.push_back({weights[i], read_matrix(matrices + 2 * n * i, n)});
    lamlab::MeasureOptions opts;
    opts.renormalize = renormalize != 0;
    *out = new lam_measure{lamlab::DiscreteMeasure(std::move(atoms), opts)};
  });
}

lam_status lam_measure_from_json(const char* json, lam_measure** out) {
  return guard([&] {
    need(json, "json");
    need(out, "out");
    *out = new lam_measure{lamlab::measure_from_json(lamlab::parse_json(json, "measure"))};
  });
}

lam_status lam_measure_to_json(const lam_measure* mu, char** json) {
  return guard([&] {
    need(mu, "measure");
    need(json, "json");
    *json = copy_string(lamlab::dump(lamlab::to_json(mu->m)));
  });
}

void lam_measure_free(lam_measure* mu) { delete mu; }

lam_status lam_measure_size(const lam_measure* mu, size_t* count) {
  return guard([&] {
    need(mu, "measure");
    need(count, "count");
    *count = mu->m.size();
  });
}

lam_status lam_measure_cols(const lam_measure* mu, int* n) {
  return guard([&] {
    need(mu, "measure");
    need(n, "n");
    *n = mu->m.cols();
  });
}

lam_status lam_measure_atom(const lam_measure* mu, size_t index, double* weight, double* matrix) {
  return guard([&] {
    need(mu, "measure");
    if (index >= mu->m.size()) lamlab::fail(lamlab::ErrorCode::Index, "atom index out of range");
    const lamlab::Atom& a = mu->m[index];
    if (weight) *weight = a.weight;
    if (matrix) write_matrix(a.matrix, matrix);
  });
}

lam_status lam_measure_barycenter(const lam_measure* mu, double* out) {
  return guard([&] {
    need(mu, "measure");
    need(out, "out");
    write_matrix(lamlab::barycenter(mu->m), out);
  });
}

lam_status lam_polyconvexity_defect(const lam_measure* mu, double* out) {
  return guard([&] {
    need(mu, "measure");
    need(out, "out");
    *out = lamlab::polyconvexity_defect(mu->m);
  });
}

lam_status lam_jensen_defect(const char* fn, const lam_measure* mu, double* out) {
  return guard([&] {
    need(fn, "fn");
    need(mu, "measure");
    need(out, "out");
    *out = lamlab::jensen_defect(lamlab::resolve_function(fn), mu->m);
  });
}

lam_status lam_dual_measure(const lam_measure* mu, double delta_plus, lam_measure** out) {
  return guard([&] {
    need(mu, "measure");
    need(out, "out");
    lamlab::DualityOptions opts;
    opts.delta_plus = delta_plus;
    *out = new lam_measure{lamlab::dual_measure(mu->m, opts)};
  });
}

lam_status lam_tree_from_json(const char* json, lam_tree** out) {
  return guard([&] {
    need(json, "json");
    need(out, "out");
    *out = new lam_tree{lamlab::tree_from_json(lamlab::parse_json(json, "certificate"))};
  });
}

lam_status lam_tree_to_json(const lam_tree* tree, char** json) {
  return guard([&] {
    need(tree, "tree");
    need(json, "json");
    *json = copy_string(lamlab::dump(lamlab::to_json(tree->t)));
  });
}

void lam_tree_free(lam_tree* tree) { delete tree; }

lam_status lam_tree_verify(const lam_tree* tree, double tol, int* result) {
  return guard([&] {
    need(tree, "tree");
    need(result, "result");
    *result = lamlab::verify(tree->t, tol) ? 1 : 0;
  });
}

lam_status lam_tree_leaf_count(const lam_tree* tree, size_t* count) {
  return guard([&] {
    need(tree, "tree");
    need(count, "count");
    *count = tree->t.leaf_count();
  });
}

lam_status lam_tree_measure(const lam_tree* tree, lam_measure** out) {
  return guard([&] {
    need(tree, "tree");
    need(out, "out");
    *out = new lam_measure{lamlab::measure_of(tree->t)};
  });
}

lam_status lam_certify(const lam_measure* mu, int max_order, double rank_tol, lam_certify_status* verdict,
                       lam_tree** tree) {
  return guard([&] {
    need(mu, "measure");
    need(verdict, "verdict");
    lamlab::CertifyOptions opts;
    opts.rank_tol = rank_tol;
    lamlab::CertifyResult r = lamlab::certify(mu->m, max_order, opts);
    switch (r.status) {
      case lamlab::CertifyStatus::Certified: *verdict = LAM_CERTIFIED; break;
      case lamlab::CertifyStatus::NotPrelaminate: *verdict = LAM_NOT_PRELAMINATE; break;
      case lamlab::CertifyStatus::Indeterminate: *verdict = LAM_INDETERMINATE; break;
    }
    if (tree) *tree = r.tree ? new lam_tree{*r.tree} : nullptr;
  });
}

lam_status lam_lift_tri(const lam_measure* mu, const lam_tree* proj_cert, lam_tree** out) {
  return guard([&] {
    need(mu, "measure");
    need(proj_cert, "proj_cert");
    need(out, "out");
    *out = new lam_tree{lamlab::lift_tri(mu->m, proj_cert->t)};
  });
}

lam_status lam_random_prelaminate(uint64_t seed, int order, const char* constraint, int n, const double* root,
                                  double scale, lam_tree** out) {
  return guard([&] {
    need(constraint, "constraint");
    need(out, "out");
    lamlab::PrelaminateSpec spec;
    spec.seed = seed;
    spec.order = order;
    spec.constraint = lamlab::subspace_from_string(constraint);
    spec.root = read_matrix(root, n);
    spec.scale = scale;
    *out = new lam_tree{lamlab::random_prelaminate(spec)};
  });
}

lam_status lam_function_eval(const char* fn, int n, const double* x, double* out) {
  return guard([&] {
    need(fn, "fn");
    need(out, "out");
    *out = lamlab::resolve_function(fn)(read_matrix(x, n));
  });
}

lam_status lam_rc_check(const char* fn, int n, size_t samples, uint64_t seed, double box, double* worst_defect,
                        int* falsified) {
  return guard([&] {
    need(fn, "fn");
    lamlab::RankOneSampling s;
    s.samples = samples;
    s.seed = seed;
    s.box = box;
    const lamlab::RankOneConvexityReport r = lamlab::rank_one_convexity_defect(lamlab::resolve_function(fn), n, s);
    if (worst_defect) *worst_defect = r.worst_defect;
    if (falsified) *falsified = r.falsified ? 1 : 0;
  });
}

lam_status lam_qc_defect(const char* fn, const double* x0, const char* field_json, double* out) {
  return guard([&] {
    need(fn, "fn");
    need(field_json, "field_json");
    need(out, "out");
    const lamlab::TestField field = lamlab::test_field_from_json(lamlab::parse_json(field_json, "test field"));
    *out = lamlab::quasiconvexity_defect(lamlab::resolve_function(fn), read_matrix(x0, field.n), field);
  });
}

lam_status lam_field_create(int n, int level, const double* values, lam_field** out) {
  return guard([&] {
    need(out, "out");
    lamlab::GridField f(n, level);
    if (values)
      for (std::size_t i = 0; i < f.size(); ++i) f[i] = values[i];
    *out = new lam_field{std::move(f)};
  });
}

lam_status lam_field_from_json(const char* json, lam_field** out) {
  return guard([&] {
    need(json, "json");
    need(out, "out");
    *out = new lam_field{lamlab::field_from_json(lamlab::parse_json(json, "field"))};
  });
}

void lam_field_free(lam_field* u) { delete u; }

lam_status lam_field_size(const lam_field* u, size_t* count) {
  return guard([&] {
    need(u, "field");
    need(count, "count");
    *count = u->f.size();
  });
}

lam_status lam_field_values(const lam_field* u, double* out) {
  return guard([&] {
    need(u, "field");
    need(out, "out");
    for (std::size_t i = 0; i < u->f.size(); ++i) out[i] = u->f[i];
  });
}

lam_status lam_field_riesz(const lam_field* u, int axis, lam_field** out) {
  return guard([&] {
    need(u, "field");
    need(out, "out");
    *out = new lam_field{lamlab::riesz(u->f, axis)};
  });
}

lam_status lam_interpolatory_ratio(const lam_field* u, unsigned eps, int axis, int padding, double* out) {
  return guard([&] {
    need(u, "field");
    need(out, "out");
    *out = lamlab::interpolatory_ratio(u->f, eps, axis, padding);
  });
}

lam_status lam_run(const char* subcommand, const char* config_json, char** report, int* exit_status) {
  return guard([&] {
    need(subcommand, "subcommand");
    need(report, "report");
    need(exit_status, "exit_status");
    const lamlab::Json cfg =
        config_json && *config_json ? lamlab::parse_json(config_json, "config") : lamlab::Json::object();
    const lamlab::RunOutcome r = lamlab::run(subcommand, lamlab::config_from_json(cfg));
    *report = copy_string(r.report);
    *exit_status = r.exit_status;
  });
}

void lam_request_interrupt(void) { lamlab::request_interrupt(); }

void lam_clear_interrupt(void) { lamlab::clear_interrupt(); }

}  // extern "C"
