#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

#include "lamlab/convexity.hpp"
#include "lamlab/haar.hpp"
#include "lamlab/laminate.hpp"
#include "lamlab/matrix.hpp"
#include "lamlab/measure.hpp"

namespace lamlab {

using Json = nlohmann::ordered_json;

// All parsers throw Parse on malformed or ill-typed input and let the value
// constructors report semantic errors (Shape, InvalidArgument, ...).
Json parse_json(std::string_view text, std::string_view what = "input");

// {"n": 2, "rows": [[...], [...]]}
Json to_json(const Mat2xN& x);
Mat2xN matrix_from_json(const Json& j);

// {"n": 2, "atoms": [{"w": 0.5, "m": <matrix>}, ...]}
Json to_json(const DiscreteMeasure& mu);
DiscreteMeasure measure_from_json(const Json& j, const MeasureOptions& opts = {});

// {"leaf": <matrix>} or {"lambda": l, "left": <tree>, "right": <tree>}
Json to_json(const SplittingTree& tree);
SplittingTree tree_from_json(const Json& j);
bool looks_like_tree(const Json& j);

// {"n": 2, "level": 6, "values": [...]}, cells with the first axis slowest.
Json to_json(const GridField& u);
GridField field_from_json(const Json& j);

// {"n": 2, "grid": 64, "modes": [{"component": 0, "amplitude": a, "freq": [..]}]}
Json to_json(const TestField& f);
TestField test_field_from_json(const Json& j);

// Reads `path`, or standard input when path is "-". Throws Io.
std::string read_text(const std::string& path);
// Throws Io.
void write_text(const std::string& path, std::string_view text);

// Text, file path, or "-": inline JSON when the argument starts with '{'.
Json load_json_argument(const std::string& arg, std::string_view what);

// Compact dump with round-trip number formatting.
std::string dump(const Json& j, int indent = 2);

}  // namespace lamlab
