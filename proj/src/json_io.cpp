#include "lamlab/json_io.hpp"

#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>

#include "lamlab/error.hpp"

namespace lamlab {

namespace {

[[noreturn]] void parse_fail(const std::string& msg) { fail(ErrorCode::Parse, msg); }

const Json& member(const Json& j, const char* key, const char* what) {
  if (!j.is_object()) parse_fail(std::string(what) + " must be a JSON object");
  auto it = j.find(key);
  if (it == j.end()) parse_fail(std::string(what) + " is missing \"" + key + "\"");
  return *it;
}

double number(const Json& j, const char* what) {
  if (!j.is_number()) parse_fail(std::string(what) + " must be a number");
  return j.get<double>();
}

int integer(const Json& j, const char* what) {
  if (!j.is_number_integer()) parse_fail(std::string(what) + " must be an integer");
  return j.get<int>();
}

const Json& array(const Json& j, const char* what) {
  if (!j.is_array()) parse_fail(std::string(what) + " must be an array");
  return j;
}

}  // namespace

Json parse_json(std::string_view text, std::string_view what) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    parse_fail(std::string(what) + ": " + e.what());
  }
}

Json to_json(const Mat2xN& x) {
  Json rows = Json::array();
  for (int r = 0; r < 2; ++r) {
    Json row = Json::array();
    for (int c = 0; c < x.cols(); ++c) row.push_back(x(r, c));
    rows.push_back(std::move(row));
  }
  return Json{{"n", x.cols()}, {"rows", std::move(rows)}};
}

Mat2xN matrix_from_json(const Json& j) {
  const int n = integer(member(j, "n", "matrix"), "matrix n");
  const Json& rows = array(member(j, "rows", "matrix"), "matrix rows");
  if (rows.size() != 2) parse_fail("matrix rows must hold exactly two rows");
  std::vector<double> r[2];
  for (int i = 0; i < 2; ++i) {
    for (const Json& v : array(rows[i], "matrix row")) r[i].push_back(number(v, "matrix entry"));
    if (static_cast<int>(r[i].size()) != n) parse_fail("matrix row length differs from n");
  }
  return Mat2xN::from_rows(r[0], r[1]);
}

Json to_json(const DiscreteMeasure& mu) {
  Json atoms = Json::array();
  for (const Atom& a : mu.atoms()) atoms.push_back(Json{{"w", a.weight}, {"m", to_json(a.matrix)}});
  return Json{{"n", mu.cols()}, {"atoms", std::move(atoms)}};
}

DiscreteMeasure measure_from_json(const Json& j, const MeasureOptions& opts) {
  const int n = integer(member(j, "n", "measure"), "measure n");
  std::vector<Atom> atoms;
  for (const Json& a : array(member(j, "atoms", "measure"), "measure atoms")) {
    Atom atom{number(member(a, "w", "atom"), "atom weight"), matrix_from_json(member(a, "m", "atom"))};
    if (atom.matrix.cols() != n) parse_fail("atom matrix n differs from measure n");
    atoms.push_back(atom);
  }
  return DiscreteMeasure(std::move(atoms), opts);
}

Json to_json(const SplittingTree& tree) {
  if (tree.is_leaf()) return Json{{"leaf", to_json(tree.barycenter())}};
  return Json{{"lambda", tree.lambda()}, {"left", to_json(tree.left())}, {"right", to_json(tree.right())}};
}

SplittingTree tree_from_json(const Json& j) {
  if (!j.is_object()) parse_fail("certificate must be a JSON object");
  if (j.contains("leaf")) return SplittingTree::leaf(matrix_from_json(j.at("leaf")));
  const double lambda = number(member(j, "lambda", "certificate node"), "lambda");
  return SplittingTree::node(tree_from_json(member(j, "left", "certificate node")),
                             tree_from_json(member(j, "right", "certificate node")), lambda);
}

bool looks_like_tree(const Json& j) { return j.is_object() && (j.contains("leaf") || j.contains("lambda")); }

Json to_json(const GridField& u) {
  Json values = Json::array();
  for (double v : u.values()) values.push_back(v);
  return Json{{"n", u.dim()}, {"level", u.level()}, {"values", std::move(values)}};
}

GridField field_from_json(const Json& j) {
  const int n = integer(member(j, "n", "field"), "field n");
  const int level = integer(member(j, "level", "field"), "field level");
  std::vector<double> values;
  for (const Json& v : array(member(j, "values", "field"), "field values")) values.push_back(number(v, "field value"));
  return GridField(n, level, std::move(values));
}

Json to_json(const TestField& f) {
  Json modes = Json::array();
  for (const SineMode& m : f.modes)
    modes.push_back(Json{{"component", m.component}, {"amplitude", m.amplitude}, {"freq", m.freq}});
  return Json{{"n", f.n}, {"grid", f.grid}, {"modes", std::move(modes)}};
}

TestField test_field_from_json(const Json& j) {
  TestField f;
  f.n = integer(member(j, "n", "test field"), "test field n");
  f.grid = integer(member(j, "grid", "test field"), "test field grid");
  if (f.n < 2 || f.n > kMaxCols) fail(ErrorCode::Shape, "test field n out of range");
  if (f.grid < 1) fail(ErrorCode::InvalidArgument, "test field grid must be positive");
  for (const Json& m : array(member(j, "modes", "test field"), "test field modes")) {
    SineMode mode;
    mode.component = integer(member(m, "component", "mode"), "mode component");
    mode.amplitude = number(member(m, "amplitude", "mode"), "mode amplitude");
    for (const Json& k : array(member(m, "freq", "mode"), "mode freq")) mode.freq.push_back(integer(k, "frequency"));
    if (mode.component < 0 || mode.component > 1) fail(ErrorCode::InvalidArgument, "mode component must be 0 or 1");
    if (static_cast<int>(mode.freq.size()) != f.n) fail(ErrorCode::Shape, "mode needs one frequency per axis");
    for (int k : mode.freq)
      if (k < 1) fail(ErrorCode::InvalidArgument, "mode frequencies must be positive");
    f.modes.push_back(std::move(mode));
  }
  return f;
}

std::string read_text(const std::string& path) {
  if (path == "-") return std::string(std::istreambuf_iterator<char>(std::cin), {});
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open '" + path + "' for reading");
  std::ostringstream os;
  os << in.rdbuf();
  if (in.bad()) fail(ErrorCode::Io, "error reading '" + path + "'");
  return os.str();
}

void write_text(const std::string& path, std::string_view text) {
  if (path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::Io, "cannot open '" + path + "' for writing");
  out << text;
  if (!out) fail(ErrorCode::Io, "error writing '" + path + "'");
}

Json load_json_argument(const std::string& arg, std::string_view what) {
  if (arg.empty()) fail(ErrorCode::InvalidArgument, std::string(what) + " is required");
  const auto first = arg.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && arg[first] == '{') return parse_json(arg, what);
  return parse_json(read_text(arg), std::string(what) + " '" + arg + "'");
}

std::string dump(const Json& j, int indent) { return j.dump(indent) + "\n"; }

}  // namespace lamlab
