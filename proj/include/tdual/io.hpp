#pragma once
// JSON documents for every artifact kind, with positioned schema errors,
// byte-stable rendering, content hashes and the fixture library.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "tdual/bimodule.hpp"
#include "tdual/cochain.hpp"
#include "tdual/cover.hpp"
#include "tdual/pipeline.hpp"
#include "tdual/star_algebra.hpp"

namespace tdual::io {

using Json = nlohmann::json;

/// Malformed or ill-typed document; `line`/`column` are 1-based, 0 when unknown.
struct SchemaError : std::runtime_error {
  SchemaError(const std::string& what, std::string pointer, int line = 0, int column = 0)
      : std::runtime_error(what), pointer(std::move(pointer)), line(line), column(column) {}
  std::string pointer;
  int line, column;
  std::string located() const;
};

/// Parses text; syntax errors carry their line and column.
Json parse(const std::string& text);
/// Reads a file; missing files raise SchemaError with an empty pointer.
std::string read_file(const std::string& path);
/// 1-based line and column of the value at a JSON pointer, if present.
std::pair<int, int> locate(const std::string& text, const std::string& pointer);

/// Deterministic rendering: sorted keys, scalar arrays on one line.
std::string render(const Json& j);
/// FNV-1a 64 of the rendered document, as 16 hex digits.
std::string content_hash(const Json& j);

// "p/q" torus values
std::string rational(i64 k, i64 level);
/// k with value = k/level. SchemaError when malformed; std::invalid_argument
/// when the value is not a multiple of 1/level.
i64 parse_rational(const Json& v, i64 level, const std::string& pointer);

Json to_json(const FiniteGroup& g);
Json to_json(const FiniteGroupoid& g);
Json to_json(const Cochain& c);
Json to_json(const Bimodule& p);
Json to_json(const StarAlgebra& a);
Json to_json(const Report& r);
Json to_json(const DualityReport& r);
Json to_json(const BundleGerbeData& b);

FiniteGroup group_from_json(const Json& j, const std::string& at = "");
GroupoidTables groupoid_tables_from_json(const Json& j, const std::string& at = "");
/// Groupoid document or cover document ({"kind": "cover"}); throws
/// std::invalid_argument for structurally malformed tables.
GroupoidPtr groupoid_from_json(const Json& j, const std::string& at = "");
CoveredBase cover_from_json(const Json& j, const std::string& at = "");
Cochain cochain_from_json(const Json& j, GroupoidPtr g, i64 level, const std::string& at = "");
/// Cochain document carrying its own "groupoid" and "level".
Cochain cochain_from_json(const Json& j, std::optional<i64> override_level);
Bimodule bimodule_from_json(const Json& j);
StarAlgebra algebra_from_json(const Json& j);
GroupAction action_from_json(const Json& j, GroupoidPtr g, const std::string& at = "");

/// Level precedence: explicit override, the document's "level", TDUAL_LEVEL, 12.
i64 resolve_level(const Json& doc, std::optional<i64> override_level);
BundleGerbeData bundle_gerbe_from_json(const Json& j, i64 level);

struct HilbertInput {
  GroupoidPtr groupoid;
  int dimension = 1;
  std::vector<Eigen::MatrixXcd> unitaries;
  i64 level = 0;
};
HilbertInput hilbert_from_json(const Json& j, std::optional<i64> override_level);

/// Wraps an artifact with its provenance and content id.
Json artifact(Json body, const std::string& construction, const std::vector<std::string>& inputs);

struct Fixture {
  std::string id;
  std::string description;
  Json document;
  bool negative = false;  // built to fail `check`
};

/// The shipped worked examples, in stable order.
std::vector<Fixture> fixtures();
std::optional<Fixture> fixture(const std::string& id);

}  // namespace tdual::io
