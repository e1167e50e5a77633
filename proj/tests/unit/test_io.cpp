#include <cstdlib>
#include <random>

#include "doctest.h"
#include "tdual/io.hpp"

using namespace tdual;
namespace io = tdual::io;

namespace {

template <class F>
std::string schema_pointer(F&& f) {
  try {
    f();
  } catch (const io::SchemaError& e) {
    return e.pointer;
  }
  return "<no error>";
}

}  // namespace

TEST_CASE("rendering is deterministic and stable under reparsing") {
  for (const auto& f : io::fixtures()) {
    auto text = io::render(f.document);
    CHECK(io::render(io::parse(text)) == text);
    auto h = io::content_hash(f.document);
    CHECK(h.size() == 16);
    CHECK(h == io::content_hash(io::parse(text)));
  }
  auto a = io::fixture("z4-mobius")->document, b = a;
  b["level"] = 8;
  CHECK(io::content_hash(a) != io::content_hash(b));
}

TEST_CASE("fixture ids are stable and complete") {
  std::vector<std::string> ids;
  for (const auto& f : io::fixtures()) ids.push_back(f.id);
  CHECK(ids.size() >= 7);
  for (const char* id : {"two-chart-point", "z4-mobius", "z4-trivial", "klein-heisenberg", "q8-center", "pauli-d2",
                         "broken-compose"})
    CHECK(std::find(ids.begin(), ids.end(), id) != ids.end());
  CHECK_FALSE(io::fixture("no-such").has_value());
  CHECK(io::fixture("broken-compose")->negative);
}

TEST_CASE("rationals") {
  CHECK(io::rational(2, 4) == "1/2");
  CHECK(io::rational(0, 4) == "0/1");
  CHECK(io::rational(-1, 4) == "3/4");
  CHECK(io::parse_rational("1/2", 4, "/x") == 2);
  CHECK(io::parse_rational("3/4", 4, "/x") == 3);
  CHECK(io::parse_rational("2/4", 2, "/x") == 1);
  CHECK(io::parse_rational("-1/2", 4, "/x") == 2);
  CHECK(io::parse_rational(0, 4, "/x") == 0);
  CHECK_THROWS_AS(io::parse_rational("1/3", 4, "/x"), std::invalid_argument);
  CHECK(schema_pointer([] { io::parse_rational("half", 4, "/v/0"); }) == "/v/0");
  CHECK(schema_pointer([] { io::parse_rational("1/0", 4, "/v/1"); }) == "/v/1");
}

TEST_CASE("groupoid documents round-trip byte for byte") {
  CoveredBase cb;
  cb.base_points = 2;
  cb.cover = {{0}, {0, 1}, {1}};
  for (auto g : {pair_groupoid(3), group_groupoid(FiniteGroup::quaternion()), cech_groupoid(cb)}) {
    auto doc = io::to_json(*g);
    auto text = io::render(doc);
    auto back = io::groupoid_from_json(io::parse(text));
    CHECK(io::render(io::to_json(*back)) == text);
    CHECK(back->has_points() == g->has_points());
  }
}

TEST_CASE("cochain, bimodule and algebra documents round-trip") {
  auto q = FiniteGroup::quaternion();
  auto g = group_groupoid(q);
  std::mt19937_64 rng(5);
  auto c = random_cochain(g, 2, 4, rng);
  auto text = io::render(io::to_json(c));
  auto back = io::cochain_from_json(io::parse(text), std::nullopt);
  CHECK(back.values == c.values);
  CHECK(back.modulus == 4);
  CHECK(io::render(io::to_json(back)) == text);

  auto P = identity_bimodule(pair_groupoid(2));
  auto ptext = io::render(io::to_json(P));
  auto Pb = io::bimodule_from_json(io::parse(ptext));
  CHECK(verify_bimodule(Pb).ok());
  CHECK(io::render(io::to_json(Pb)) == ptext);

  auto sigma = differential(random_cochain(g, 1, 4, rng));
  auto A = twisted_algebra(sigma);
  auto atext = io::render(io::to_json(A));
  auto Ab = io::algebra_from_json(io::parse(atext));
  CHECK(Ab.twist == A.twist);
  CHECK(check_star_algebra(Ab).ok());
  CHECK(io::render(io::to_json(Ab)) == atext);
}

TEST_CASE("bundle-gerbe fixtures load, validate and round-trip") {
  for (const auto& f : io::fixtures()) {
    if (io::Json(f.document["kind"]) != "bundle-gerbe") continue;
    INFO(f.id);
    const auto L = io::resolve_level(f.document, std::nullopt);
    auto b = io::bundle_gerbe_from_json(f.document, L);
    CHECK(check_bundle_gerbe(b).ok());
    auto text = io::render(io::to_json(b));
    auto again = io::bundle_gerbe_from_json(io::parse(text), L);
    CHECK(io::render(io::to_json(again)) == text);
    CHECK(again.cocycle.sigma.values == b.cocycle.sigma.values);
    CHECK(again.cocycle.beta.values == b.cocycle.beta.values);
  }
  auto klein = io::bundle_gerbe_from_json(io::fixture("klein-heisenberg")->document, 2);
  CHECK_FALSE(klein.cocycle.beta.is_zero());
  auto q8 = io::bundle_gerbe_from_json(io::fixture("q8-center")->document, 4);
  CHECK_FALSE(q8.cocycle.beta.is_zero());
  auto cech = io::bundle_gerbe_from_json(io::fixture("two-chart-point")->document, 2);
  CHECK(cech.base()->objects() == 2);
  CHECK(cech.base()->arrows() == 4);
}

TEST_CASE("pauli fixture yields a projective unitary assignment") {
  auto h = io::hilbert_from_json(io::fixture("pauli-d2")->document, std::nullopt);
  CHECK(h.dimension == 2);
  CHECK(h.unitaries.size() == 4);
  auto chk = hilbert_bimodule_check(h.groupoid, h.unitaries, h.dimension, h.level);
  CHECK(chk.report.ok());
  REQUIRE(chk.sigma_cochain.has_value());
  CHECK_FALSE(chk.sigma_cochain->is_zero());
}

TEST_CASE("broken fixture names the offending composition") {
  const auto doc = io::fixture("broken-compose")->document;
  auto rep = validate_groupoid(io::groupoid_tables_from_json(doc));
  CHECK_FALSE(rep.ok());
  bool named = false;
  for (const auto& v : rep.violations()) named = named || v.find("(1,2)") != std::string::npos;
  CHECK(named);
  CHECK_THROWS_AS(io::groupoid_from_json(doc), std::invalid_argument);
}

TEST_CASE("schema errors carry a pointer that locates to line and column") {
  const std::string text = "{\n  \"kind\": \"groupoid\",\n  \"objects\": 1,\n  \"arrows\": [[0, 0]],\n"
                           "  \"compose\": [[0, 0, 0]],\n  \"inverse\": [0],\n  \"units\": [\"x\"]\n}\n";
  std::string ptr = schema_pointer([&] { io::groupoid_from_json(io::parse(text)); });
  CHECK(ptr == "/units/0");
  auto [line, col] = io::locate(text, ptr);
  CHECK(line == 7);
  CHECK(col == 13);
  CHECK(io::locate(text, "/arrows/0/1") == std::pair<int, int>{4, 18});
  CHECK(io::locate(text, "/objects") == std::pair<int, int>{3, 14});

  auto missing = io::parse("{\"kind\": \"groupoid\", \"objects\": 1}");
  CHECK(schema_pointer([&] { io::groupoid_from_json(missing); }) == "");
  try {
    io::groupoid_from_json(missing);
  } catch (const io::SchemaError& e) {
    CHECK(std::string(e.what()).find("arrows") != std::string::npos);
  }

  try {
    io::parse("{\n  \"a\": [1, 2,\n}\n");
    FAIL("expected a syntax error");
  } catch (const io::SchemaError& e) {
    CHECK(e.line == 3);
    CHECK(e.located().rfind("line 3", 0) == 0);
  }
}

TEST_CASE("level precedence") {
  io::Json with{{"level", 6}}, without = io::Json::object();
  ::unsetenv("TDUAL_LEVEL");
  CHECK(io::resolve_level(without, std::nullopt) == 12);
  CHECK(io::resolve_level(with, std::nullopt) == 6);
  ::setenv("TDUAL_LEVEL", "8", 1);
  CHECK(io::resolve_level(without, std::nullopt) == 8);
  CHECK(io::resolve_level(with, std::nullopt) == 6);
  CHECK(io::resolve_level(with, 4) == 4);
  ::setenv("TDUAL_LEVEL", "eight", 1);
  CHECK_THROWS_AS(io::resolve_level(without, std::nullopt), std::invalid_argument);
  ::unsetenv("TDUAL_LEVEL");
}

TEST_CASE("artifacts are content addressed") {
  auto body = io::to_json(*pair_groupoid(2));
  auto a = io::artifact(body, "pair", {"2"});
  auto b = io::artifact(body, "pair", {"2"});
  CHECK(a["id"] == b["id"]);
  CHECK(io::artifact(a, "pair", {"2"})["id"] == a["id"]);
  CHECK(io::artifact(body, "pair", {"3"})["id"] != a["id"]);
  CHECK(a["provenance"]["construction"] == "pair");
}
