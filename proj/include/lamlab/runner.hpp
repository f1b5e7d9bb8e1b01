#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "lamlab/json_io.hpp"

namespace lamlab {

enum class ReportFormat { Json, Csv };

struct RunConfig {
  std::uint64_t seed = 1;
  double tol_rank = 1e-9;
  double tol_merge = 1e-12;
  double delta_plus = 1e-8;
  int grid = 64;
  int max_order = 10;
  std::size_t trials = 100;
  std::size_t samples = 10000;
  int modes = 3;
  double amplitude = 0.5;
  double box = 1.0;
  int n = 2;
  int level = 6;
  int padding = 2;
  double trial_scale = 1.0;  // suite only
  bool check_polyconvex = false;
  std::string fn;       // function spec; comma separated lists for random-search
  std::string in;       // primary input; "-" is standard input
  std::string measure;  // lift
  std::string cert;     // lift
  std::string x0;       // qc-defect: matrix JSON, inline or path
  std::string out;      // primary artifact
  std::string report;   // report path; empty returns the report only
  ReportFormat format = ReportFormat::Json;
};

// Builds a config from a JSON object whose keys are the field names above
// (with '-' or '_'). Unknown keys and non-positive tolerances throw
// InvalidArgument.
RunConfig config_from_json(const Json& j);
Json to_json(const RunConfig& c);

const std::vector<std::string>& subcommands();

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitFalsified = 2;

struct RunOutcome {
  int exit_status = kExitOk;
  std::string report;  // formatted per config.format
};

// Runs one subcommand. Never throws: library errors become an error report
// with exit status 1. The report is also written to config.report when set,
// and the primary artifact (certificate, dual measure) to config.out.
RunOutcome run(std::string_view subcommand, const RunConfig& config);

// Flattens report records into CSV, matrices column-major.
std::string records_to_csv(const Json& records);

}  // namespace lamlab
