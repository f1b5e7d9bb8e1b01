// Command-line front end over the lamlab C API.

#include <csignal>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "lamlab/lamlab.h"

namespace {

struct Options {
  std::optional<std::uint64_t> seed;
  std::optional<double> tol_rank, tol_merge, delta_plus, amplitude, box, trial_scale;
  std::optional<int> grid, max_order, modes, n, level, padding;
  std::optional<std::size_t> trials, samples;
  std::optional<std::string> fn, in, measure, cert, x0, out, report, format;
  bool check_polyconvex = false;
};

void add_flags(CLI::App* sub, Options& o) {
  sub->add_option("--seed", o.seed, "Master seed");
  sub->add_option("--tol-rank", o.tol_rank, "Relative rank-one tolerance at tree nodes");
  sub->add_option("--tol-merge", o.tol_merge, "Atom merge tolerance");
  sub->add_option("--delta-plus", o.delta_plus, "Guard on X12 for the partial Legendre transform");
  sub->add_option("--grid", o.grid, "Quadrature points per axis");
  sub->add_option("--max-order", o.max_order, "Largest atom count certify will search");
  sub->add_option("--trials", o.trials, "Number of random trials");
  sub->add_option("--samples", o.samples, "Rank-one segments sampled by rc-check");
  sub->add_option("--modes", o.modes, "Sine modes per component of random test fields");
  sub->add_option("--amplitude", o.amplitude, "Largest sine mode amplitude");
  sub->add_option("--box", o.box, "Half width of the sampling box");
  sub->add_option("--n", o.n, "Column count / cube dimension");
  sub->add_option("--level", o.level, "Dyadic grid level");
  sub->add_option("--padding", o.padding, "Zero-padding factor of Riesz transforms");
  sub->add_option("--trial-scale", o.trial_scale, "Multiplier on the suite's trial counts");
  sub->add_option("--fn", o.fn, "Test function: builtin id or user:<path>");
  sub->add_option("--in", o.in, "Input file, '-' for standard input");
  sub->add_option("--measure", o.measure, "Measure file");
  sub->add_option("--cert", o.cert, "Certificate file");
  sub->add_option("--x0", o.x0, "Base matrix: JSON text or file");
  sub->add_option("--out", o.out, "Write the primary artifact here");
  sub->add_option("--report", o.report, "Write the report here instead of standard output");
  sub->add_option("--format", o.format, "Report format")->check(CLI::IsMember({"json", "csv"}));
  sub->add_flag("--check-polyconvex", o.check_polyconvex, "dualize: compare defect and barycenter gap");
}

template <class T>
void put(nlohmann::ordered_json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

nlohmann::ordered_json config_json(const Options& o) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  put(j, "seed", o.seed);
  put(j, "tol_rank", o.tol_rank);
  put(j, "tol_merge", o.tol_merge);
  put(j, "delta_plus", o.delta_plus);
  put(j, "grid", o.grid);
  put(j, "max_order", o.max_order);
  put(j, "trials", o.trials);
  put(j, "samples", o.samples);
  put(j, "modes", o.modes);
  put(j, "amplitude", o.amplitude);
  put(j, "box", o.box);
  put(j, "n", o.n);
  put(j, "level", o.level);
  put(j, "padding", o.padding);
  put(j, "trial_scale", o.trial_scale);
  put(j, "fn", o.fn);
  put(j, "in", o.in);
  put(j, "measure", o.measure);
  put(j, "cert", o.cert);
  put(j, "x0", o.x0);
  put(j, "out", o.out);
  put(j, "report", o.report);
  put(j, "format", o.format);
  if (o.check_polyconvex) j["check_polyconvex"] = true;
  return j;
}

extern "C" void on_sigint(int) { lam_request_interrupt(); }

// Error message of a JSON report, empty if there is none.
std::string report_error(const std::string& report) {
  const auto j = nlohmann::json::parse(report, nullptr, false);
  if (j.is_discarded() || !j.contains("error")) return {};
  return j["error"].value("code", "") + ": " + j["error"].value("message", "");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finitely supported matrix measures: laminate certificates, partial Legendre duality, Haar checks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(lam_version()));

  const std::pair<const char*, const char*> commands[] = {
      {"certify", "Search a rank-one splitting certificate for a measure (--in)"},
      {"lift", "Lift a diagonal-projection certificate to a triangular measure (--measure, --cert)"},
      {"dualize", "Dual measure under the partial Legendre transform (--in, --check-polyconvex)"},
      {"jensen", "Jensen defect of --fn on a measure or certificate (--in)"},
      {"rc-check", "Monte Carlo rank-one convexity falsification of --fn"},
      {"qc-defect", "Quasiconvexity defect of --fn at --x0 over random sine fields"},
      {"haar-verify", "Haar system, Riesz transform and coarsening checks (--n, --level, --trials)"},
      {"random-search", "Search prelaminates and fields for negative defects"},
      {"suite", "Run the acceptance battery"},
  };
  Options opts;
  for (const auto& [name, help] : commands) add_flags(app.add_subcommand(name, help), opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  std::signal(SIGINT, on_sigint);
  const std::string sub = app.get_subcommands().front()->get_name();
  const std::string cfg = config_json(opts).dump();
  char* report = nullptr;
  int exit_status = 1;
  if (lam_run(sub.c_str(), cfg.c_str(), &report, &exit_status) != LAM_OK) {
    std::cerr << "lamlab " << sub << ": " << lam_last_error() << "\n";
    return 1;
  }
  const std::string text = report;
  lam_string_free(report);
  if (!opts.report) std::cout << text << std::flush;
  if (exit_status == 1) {
    const std::string err = report_error(text);
    std::cerr << "lamlab " << sub << ": " << (err.empty() ? "failed; see the report" : err) << "\n";
  }
  return exit_status;
}
