#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <string>

#include "lamlab/json_io.hpp"
#include "lamlab/laminate.hpp"
#include "lamlab/runner.hpp"
#include "support.hpp"

using namespace lamlab;

namespace {

const std::string kData = LAMLAB_TEST_DATA;

std::string data(const char* name) { return kData + "/" + name; }

RunConfig config(const Json& j) { return config_from_json(j); }

Json run_json(const char* sub, const Json& cfg, int expected_exit) {
  const RunOutcome out = run(sub, config(cfg));
  const Json report = parse_json(out.report, "report");
  CHECK_MESSAGE(out.exit_status == expected_exit, out.report);
  CHECK(report["exit_status"] == out.exit_status);
  return report;
}

std::filesystem::path temp_path(const char* name) {
  return std::filesystem::temp_directory_path() / (std::string("lamlab_test_") + name);
}

}  // namespace

TEST_CASE("config parsing") {
  const RunConfig c = config(Json{{"seed", 7}, {"tol-rank", 1e-8}, {"max_order", 6}, {"format", "csv"}});
  CHECK(c.seed == 7);
  CHECK(c.tol_rank == 1e-8);
  CHECK(c.max_order == 6);
  CHECK(c.format == ReportFormat::Csv);
  const RunConfig d = config(Json::object());
  CHECK(d.tol_merge == 1e-12);
  CHECK(d.delta_plus == 1e-8);
  CHECK(d.samples == 10000);
  CHECK(config_from_json(to_json(c)).max_order == 6);

  CHECK_CODE(config(Json{{"bogus", 1}}), ErrorCode::InvalidArgument);
  CHECK_CODE(config(Json{{"tol-rank", 0}}), ErrorCode::InvalidArgument);
  CHECK_CODE(config(Json{{"tol-rank", "x"}}), ErrorCode::InvalidArgument);
  CHECK_CODE(config(Json{{"max-order", 13}}), ErrorCode::InvalidArgument);
  CHECK_CODE(config(Json{{"format", "xml"}}), ErrorCode::InvalidArgument);
  CHECK_CODE(config(Json{{"seed", -1}}), ErrorCode::InvalidArgument);
  CHECK_CODE(config(Json::array()), ErrorCode::InvalidArgument);
}

TEST_CASE("unknown subcommand reports an error") {
  const Json r = run_json("frobnicate", Json::object(), kExitError);
  CHECK(r["status"] == "error");
  CHECK(r["error"]["code"] == "InvalidArgument");
}

TEST_CASE("certify the order-three example") {
  const std::filesystem::path out = temp_path("cert.json");
  const Json r = run_json("certify", Json{{"in", data("order3.json")}, {"out", out.string()}}, kExitOk);
  CHECK(r["status"] == "ok");
  CHECK(r["result"]["status"] == "certified");
  CHECK(r["result"]["verified"] == true);
  const SplittingTree t = tree_from_json(parse_json(read_text(out.string()), "certificate"));
  CHECK(verify(t));
  CHECK(t.leaf_count() == 3);
  std::filesystem::remove(out);
}

TEST_CASE("certify verdicts map to exit codes") {
  const Json r = run_json("certify", Json{{"in", data("pm_identity.json")}}, kExitFalsified);
  CHECK(r["result"]["status"] == "not_prelaminate");
  CHECK(r["result"].contains("witness"));
  const Json ind = run_json("certify", Json{{"in", data("order3.json")}, {"max-order", 2}}, kExitOk);
  CHECK(ind["result"]["status"] == "indeterminate");
  CHECK(ind["warnings"].size() == 1);
  const Json missing = run_json("certify", Json{{"in", data("nope.json")}}, kExitError);
  CHECK(missing["error"]["code"] == "IoError");
  const Json bad = run_json("certify", Json{{"in", "{\"n\": 2"}}, kExitError);
  CHECK(bad["error"]["code"] == "ParseError");
}

TEST_CASE("lift the triangular example") {
  const Json r = run_json("lift", Json{{"measure", data("tri_measure.json")}, {"cert", data("tri_proj_cert.json")}},
                          kExitOk);
  CHECK(r["result"]["verified"] == true);
  CHECK(r["result"]["measure_matches"] == true);
  const Json e = run_json(
      "lift",
      Json{{"measure", R"({"n": 2, "atoms": [{"w": 1, "m": {"n": 2, "rows": [[1, 0], [1, 1]]}}]})"},
           {"cert", data("tri_proj_cert.json")}},
      kExitError);
  CHECK(e["error"]["code"] == "NotSupported");
  const Json m = run_json("lift", Json{{"measure", data("tri_measure.json")}}, kExitError);
  CHECK(m["error"]["code"] == "InvalidArgument");
}

TEST_CASE("dualize") {
  const Json r = run_json("dualize", Json{{"in", data("plus_pair.json")}, {"check-polyconvex", true}}, kExitOk);
  const DiscreteMeasure dual = measure_from_json(r["result"]["dual"], MeasureOptions{.merge = false});
  REQUIRE(dual.size() == 2);
  CHECK(dual[0].weight == doctest::Approx(1.0 / 3));
  CHECK(r["result"]["polyconvex_check"]["consistent"] == true);
  const Json e = run_json("dualize", Json{{"in", data("pm_identity.json")}}, kExitError);
  CHECK(e["error"]["code"] == "DomainError");
}

TEST_CASE("jensen") {
  const Json ok = run_json("jensen", Json{{"in", data("order3.json")}, {"fn", "norm2"}}, kExitOk);
  CHECK(ok["result"]["verdict"] == "not falsified");
  CHECK(ok["result"]["laminate_status"] == "certified");
  const Json neg = run_json("jensen", Json{{"in", data("pm_identity.json")}, {"fn", "neg_norm2"}}, kExitFalsified);
  CHECK(neg["result"]["defect"] == -2.0);
  const Json cert = run_json("jensen", Json{{"in", data("tri_proj_cert.json")}, {"fn", "det"}}, kExitOk);
  CHECK(cert["result"]["laminate_status"] == "certificate verified");
  const Json nofn = run_json("jensen", Json{{"in", data("order3.json")}}, kExitError);
  CHECK(nofn["error"]["code"] == "InvalidArgument");
}

TEST_CASE("rc-check") {
  const Json neg = run_json("rc-check", Json{{"fn", "neg_norm2"}, {"samples", 100}}, kExitFalsified);
  CHECK(neg["result"]["verdict"] == "falsified");
  const Json ok = run_json("rc-check", Json{{"fn", "det"}, {"samples", 500}}, kExitOk);
  CHECK(ok["result"]["verdict"] == "not falsified");
  const Json user = run_json("rc-check", Json{{"fn", "user:" + data("neg_poly.json")}, {"samples", 200}}, kExitFalsified);
  CHECK(user["result"]["fn"] == "user:" + data("neg_poly.json"));
  const Json unknown = run_json("rc-check", Json{{"fn", "nope"}}, kExitError);
  CHECK(unknown["error"]["code"] == "UnknownId");
}

TEST_CASE("qc-defect") {
  const Json r = run_json("qc-defect", Json{{"fn", "det"}, {"trials", 4}, {"grid", 32}}, kExitOk);
  CHECK(r["records"].size() == 4);
  const Json x0 = run_json(
      "qc-defect", Json{{"fn", "norm2"}, {"trials", 2}, {"grid", 16}, {"x0", "{\"n\": 2, \"rows\": [[1, 0], [0, 1]]}"}},
      kExitOk);
  CHECK(x0["records"].size() == 2);
}

TEST_CASE("haar-verify at a small level") {
  const Json r = run_json("haar-verify", Json{{"level", 4}, {"trials", 3}}, kExitOk);
  for (const auto& [name, check] : r["result"]["checks"].items()) CHECK_MESSAGE(check["passed"] == true, name);
  const Json e = run_json("haar-verify", Json{{"n", 4}}, kExitError);
  CHECK(e["error"]["code"] == "InvalidArgument");
}

TEST_CASE("random-search") {
  const Json hit = run_json("random-search", Json{{"fn", "neg_norm2"}, {"trials", 5}, {"samples", 100}}, kExitFalsified);
  CHECK(hit["result"]["hits"].get<int>() > 0);
  const Json clean = run_json("random-search", Json{{"fn", "builtins"}, {"trials", 5}, {"samples", 100}, {"grid", 16}},
                              kExitOk);
  CHECK(clean["result"]["hits"] == 0);
}

TEST_CASE("reports are deterministic byte for byte") {
  const Json cfg{{"fn", "alibert_dacorogna"}, {"samples", 300}, {"seed", 5}};
  CHECK(run("rc-check", config(cfg)).report == run("rc-check", config(cfg)).report);
  const Json qc{{"fn", "norm2"}, {"trials", 6}, {"grid", 16}};
  CHECK(run("qc-defect", config(qc)).report == run("qc-defect", config(qc)).report);
  Json other = cfg;
  other["seed"] = 6;
  CHECK(run("rc-check", config(cfg)).report != run("rc-check", config(other)).report);
}

TEST_CASE("report file and CSV output") {
  const std::filesystem::path p = temp_path("report.csv");
  const RunOutcome out =
      run("certify", config(Json{{"in", data("order3.json")}, {"format", "csv"}, {"report", p.string()}}));
  CHECK(out.exit_status == kExitOk);
  CHECK(read_text(p.string()) == out.report);
  CHECK(out.report.rfind("status,atoms,explored_states\n", 0) == 0);
  std::filesystem::remove(p);
  const RunOutcome bad = run("certify", config(Json{{"in", data("order3.json")}, {"report", "/nonexistent/dir/r.json"}}));
  CHECK(bad.exit_status == kExitError);
}

TEST_CASE("CSV flattening is column-major for matrices") {
  const Json recs = Json::array(
      {Json{{"x", Json{{"n", 2}, {"rows", Json::array({Json::array({1, 2}), Json::array({3, 4})})}}}, {"tag", "a,b"}},
       Json{{"tag", "plain"}, {"extra", true}}});
  CHECK(records_to_csv(recs) == "x.11,x.21,x.12,x.22,tag,extra\n1,3,2,4,\"a,b\",\n,,,,plain,true\n");
}

TEST_CASE("suite at reduced scale") {
  const Json r = run_json("suite", Json{{"trial-scale", 0.02}}, kExitOk);
  CHECK(r["result"]["criteria"] == 14);
  CHECK(r["result"]["passed"] == 14);
}
