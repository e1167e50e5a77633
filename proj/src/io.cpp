#include "tdual/io.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>
#include <fstream>
#include <numeric>
#include <sstream>

namespace tdual::io {

namespace {

std::string child(const std::string& at, const std::string& key) { return at + "/" + key; }
std::string child(const std::string& at, std::size_t i) { return at + "/" + std::to_string(i); }

[[noreturn]] void fail(const std::string& at, const std::string& what) {
  throw SchemaError(what + " at " + (at.empty() ? "/" : at), at);
}

const Json& field(const Json& j, const std::string& key, const std::string& at) {
  if (!j.is_object()) fail(at, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(at, "missing field \"" + key + "\"");
  return *it;
}

int as_int(const Json& j, const std::string& at) {
  if (!j.is_number_integer()) fail(at, "expected an integer");
  auto v = j.get<std::int64_t>();
  if (v < INT32_MIN || v > INT32_MAX) fail(at, "integer out of range");
  return int(v);
}

int int_field(const Json& j, const std::string& key, const std::string& at) { return as_int(field(j, key, at), child(at, key)); }

std::vector<int> int_array(const Json& j, const std::string& at) {
  if (!j.is_array()) fail(at, "expected an array of integers");
  std::vector<int> v;
  for (std::size_t i = 0; i < j.size(); ++i) v.push_back(as_int(j[i], child(at, i)));
  return v;
}

std::vector<std::vector<int>> int_rows(const Json& j, const std::string& at, int width = -1) {
  if (!j.is_array()) fail(at, "expected an array of integer arrays");
  std::vector<std::vector<int>> rows;
  for (std::size_t i = 0; i < j.size(); ++i) {
    rows.push_back(int_array(j[i], child(at, i)));
    if (width >= 0 && int(rows.back().size()) != width)
      fail(child(at, i), "expected " + std::to_string(width) + " entries");
  }
  return rows;
}

std::string kind_of(const Json& j) {
  if (j.is_object() && j.contains("kind") && j["kind"].is_string()) return j["kind"].get<std::string>();
  return {};
}

std::string str_field(const Json& j, const std::string& key, const std::string& def) {
  if (j.is_object() && j.contains(key) && j[key].is_string()) return j[key].get<std::string>();
  return def;
}

Json sparse_values(const Cochain& c) {
  Json vals = Json::array();
  const auto& nv = c.groupoid->nerve();
  for (std::size_t i = 0; i < c.values.size(); ++i) {
    if (c.values[i] == 0) continue;
    Json at = Json::array();
    if (c.degree == 0) {
      at.push_back(int(i));
    } else {
      const int* t = nv.tuple(c.degree, i);
      for (int k = 0; k < c.degree; ++k) at.push_back(t[k]);
    }
    vals.push_back({{"at", at}, {"value", rational(c.values[i], c.modulus)}});
  }
  return vals;
}

Json sparse_eq(const EqCochain& c) {
  Json vals = Json::array();
  const std::size_t nq = c.groupoid_count();
  const int k = c.action->group->order;
  const auto& nv = c.action->target->nerve();
  for (std::size_t i = 0; i < c.values.size(); ++i) {
    if (c.values[i] == 0) continue;
    std::size_t gt = i / nq, t = i % nq;
    std::vector<int> gs(c.p);
    for (int s = c.p - 1; s >= 0; --s) {
      gs[s] = int(gt % k);
      gt /= k;
    }
    Json at = Json::array();
    for (int g : gs) at.push_back(g);
    if (c.q == 0) {
      at.push_back(int(t));
    } else {
      const int* tp = nv.tuple(c.q, t);
      for (int s = 0; s < c.q; ++s) at.push_back(tp[s]);
    }
    vals.push_back({{"at", at}, {"value", rational(c.values[i], c.modulus)}});
  }
  return vals;
}

std::size_t tuple_index(const FiniteGroupoid& g, const std::vector<int>& t, const std::string& at) {
  for (std::size_t i = 0; i < t.size(); ++i)
    if (t[i] < 0 || t[i] >= g.arrows()) throw std::invalid_argument("arrow " + std::to_string(t[i]) + " out of range at " + at);
  for (std::size_t i = 0; i + 1 < t.size(); ++i)
    if (!g.composable(t[i], t[i + 1])) throw std::invalid_argument("arrows not composable at " + at);
  return g.nerve().index(int(t.size()), t.data());
}

template <class Set>
void read_sparse(const Json& j, const std::string& at, i64 level, int width, Set&& set) {
  if (!j.is_array()) fail(at, "expected an array of {\"at\", \"value\"} entries");
  for (std::size_t i = 0; i < j.size(); ++i) {
    auto here = child(at, i);
    auto idx = int_array(field(j[i], "at", here), child(here, "at"));
    if (int(idx.size()) != width) fail(child(here, "at"), "expected " + std::to_string(width) + " indices");
    set(idx, parse_rational(field(j[i], "value", here), level, child(here, "value")), here);
  }
}

void emit(const Json& j, int indent, std::string& out) {
  const std::string pad(indent, ' ');
  auto scalar = [](const Json& x) { return !x.is_structured(); };
  auto flat = [&](const Json& x) {
    if (!x.is_array()) return scalar(x);
    for (const auto& e : x)
      if (!scalar(e)) return false;
    return true;
  };
  if (j.is_object()) {
    if (j.empty()) {
      out += "{}";
      return;
    }
    out += "{\n";
    std::size_t n = 0;
    for (auto it = j.begin(); it != j.end(); ++it) {
      out += pad + "  " + Json(it.key()).dump() + ": ";
      emit(it.value(), indent + 2, out);
      out += ++n < j.size() ? ",\n" : "\n";
    }
    out += pad + "}";
  } else if (j.is_array()) {
    if (flat(j)) {
      out += j.dump();
      return;
    }
    out += "[\n";
    for (std::size_t i = 0; i < j.size(); ++i) {
      out += pad + "  ";
      if (flat(j[i]) || (j[i].is_object() && j[i].size() <= 2 && std::all_of(j[i].begin(), j[i].end(), flat)))
        out += j[i].dump();
      else
        emit(j[i], indent + 2, out);
      out += i + 1 < j.size() ? ",\n" : "\n";
    }
    out += pad + "]";
  } else {
    out += j.dump();
  }
}

// Minimal scanner that walks raw JSON text to the value addressed by a pointer.
struct Scanner {
  const std::string& s;
  std::size_t i = 0;

  void ws() {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\n' || s[i] == '\r' || s[i] == '\t')) ++i;
  }
  std::string string() {
    std::string out;
    ++i;
    while (i < s.size() && s[i] != '"') {
      if (s[i] == '\\' && i + 1 < s.size()) ++i;
      out += s[i++];
    }
    ++i;
    return out;
  }
  void skip() {
    ws();
    if (i >= s.size()) return;
    char c = s[i];
    if (c == '"') {
      string();
    } else if (c == '{' || c == '[') {
      char close = c == '{' ? '}' : ']';
      ++i;
      ws();
      if (i < s.size() && s[i] == close) {
        ++i;
        return;
      }
      while (i < s.size()) {
        if (c == '{') {
          ws();
          string();
          ws();
          ++i;  // ':'
        }
        skip();
        ws();
        if (i < s.size() && s[i] == ',') {
          ++i;
          continue;
        }
        ++i;  // close
        return;
      }
    } else {
      while (i < s.size() && s[i] != ',' && s[i] != '}' && s[i] != ']' && s[i] != ' ' && s[i] != '\n') ++i;
    }
  }
  // Moves to the member `key` or element `index` of the container at i; false if absent.
  bool enter(const std::string& token) {
    ws();
    if (i >= s.size()) return false;
    if (s[i] == '{') {
      ++i;
      while (true) {
        ws();
        if (i >= s.size() || s[i] != '"') return false;
        std::string key = string();
        ws();
        ++i;
        ws();
        if (key == token) return true;
        skip();
        ws();
        if (i < s.size() && s[i] == ',') {
          ++i;
          continue;
        }
        return false;
      }
    }
    if (s[i] == '[') {
      std::size_t want = 0;
      try {
        want = std::stoul(token);
      } catch (...) {
        return false;
      }
      ++i;
      for (std::size_t k = 0;; ++k) {
        ws();
        if (i >= s.size() || s[i] == ']') return false;
        if (k == want) return true;
        skip();
        ws();
        if (i < s.size() && s[i] == ',') ++i;
      }
    }
    return false;
  }
};

std::pair<int, int> line_col(const std::string& s, std::size_t offset) {
  int line = 1, col = 1;
  for (std::size_t k = 0; k < offset && k < s.size(); ++k) {
    if (s[k] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

Json group_doc(const FiniteGroup& g) { return to_json(g); }

Json pair_doc(int n) { return to_json(*pair_groupoid(n)); }

}  // namespace

std::string SchemaError::located() const {
  if (line > 0) return "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what();
  return what();
}

Json parse(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    auto [l, c] = line_col(text, e.byte > 0 ? e.byte - 1 : 0);
    std::string msg = e.what();
    auto pos = msg.find("syntax error");
    throw SchemaError(pos == std::string::npos ? msg : msg.substr(pos), "", l, c);
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot read " + path, "");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::pair<int, int> locate(const std::string& text, const std::string& pointer) {
  Scanner sc{text};
  std::size_t last = 0;
  std::size_t start = 1;
  while (start <= pointer.size()) {
    std::size_t end = pointer.find('/', start);
    if (end == std::string::npos) end = pointer.size();
    std::string tok = pointer.substr(start, end - start);
    for (std::size_t p; (p = tok.find("~1")) != std::string::npos;) tok.replace(p, 2, "/");
    for (std::size_t p; (p = tok.find("~0")) != std::string::npos;) tok.replace(p, 2, "~");
    sc.ws();
    last = sc.i;
    if (!sc.enter(tok)) return line_col(text, last);
    start = end + 1;
  }
  sc.ws();
  return line_col(text, sc.i);
}

std::string render(const Json& j) {
  std::string out;
  emit(j, 0, out);
  return out + "\n";
}

std::string content_hash(const Json& j) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : render(j)) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string rational(i64 k, i64 level) {
  k = mod(k, level);
  if (k == 0) return "0/1";
  i64 g = std::gcd(k, level);
  return std::to_string(k / g) + "/" + std::to_string(level / g);
}

i64 parse_rational(const Json& v, i64 level, const std::string& pointer) {
  i64 p = 0, q = 1;
  if (v.is_number_integer()) {
    p = v.get<i64>();
  } else if (v.is_string()) {
    const auto s = v.get<std::string>();
    auto slash = s.find('/');
    try {
      std::size_t used = 0;
      p = std::stoll(s.substr(0, slash), &used);
      if (used != (slash == std::string::npos ? s.size() : slash)) throw std::invalid_argument(s);
      if (slash != std::string::npos) {
        q = std::stoll(s.substr(slash + 1), &used);
        if (used != s.size() - slash - 1) throw std::invalid_argument(s);
      }
    } catch (const std::exception&) {
      fail(pointer, "expected a rational \"p/q\"");
    }
    if (q <= 0) fail(pointer, "denominator must be positive");
  } else {
    fail(pointer, "expected a rational \"p/q\"");
  }
  if ((p * level) % q != 0)
    throw std::invalid_argument("value " + std::to_string(p) + "/" + std::to_string(q) + " at " + pointer +
                                " is not representable at level " + std::to_string(level));
  return mod(p * level / q, level);
}

// ---------------------------------------------------------------- writers

Json to_json(const FiniteGroup& g) {
  Json mult = Json::array();
  for (int a = 0; a < g.order; ++a) {
    Json row = Json::array();
    for (int b = 0; b < g.order; ++b) row.push_back(g.mul(a, b));
    mult.push_back(row);
  }
  Json j{{"kind", "group"}, {"order", g.order}, {"mult", mult}};
  if (!g.factors.empty()) j["factors"] = g.factors;
  if (!g.name.empty()) j["name"] = g.name;
  return j;
}

Json to_json(const FiniteGroupoid& g) {
  auto t = g.tables();
  Json arrows = Json::array(), compose = Json::array();
  for (auto& a : t.arrows) arrows.push_back({a[0], a[1]});
  for (auto& c : t.compose) compose.push_back({c[0], c[1], c[2]});
  Json j{{"kind", "groupoid"}, {"objects", t.objects}, {"arrows", arrows}, {"compose", compose},
         {"inverse", t.inverse}, {"units", t.units}};
  if (!t.point_of.empty()) {
    j["point_of"] = t.point_of;
    j["base_points"] = t.base_points;
  }
  if (!g.name.empty()) j["name"] = g.name;
  return j;
}

Json to_json(const Cochain& c) {
  return Json{{"kind", "cochain"},
              {"degree", c.degree},
              {"level", c.modulus},
              {"groupoid", to_json(*c.groupoid)},
              {"closed", differential(c).is_zero()},
              {"values", sparse_values(c)}};
}

Json to_json(const Bimodule& p) {
  Json la = Json::array(), ra = Json::array();
  for (int q = 0; q < p.carrier; ++q) {
    for (int g : p.left->from(p.lmoment[q])) la.push_back({g, q, p.left_act(g, q)});
    for (int h : p.right->into(p.rmoment[q])) ra.push_back({q, h, p.right_act(q, h)});
  }
  Json j{{"kind", "bimodule"},    {"carrier", p.carrier},   {"lmoment", p.lmoment}, {"rmoment", p.rmoment},
         {"left_action", la},     {"right_action", ra},     {"left", to_json(*p.left)},
         {"right", to_json(*p.right)}};
  if (!p.name.empty()) j["name"] = p.name;
  return j;
}

Json to_json(const StarAlgebra& a) {
  Json st = Json::array(), inv = Json::array();
  const auto& g = *a.groupoid;
  for (int x = 0; x < g.arrows(); ++x) {
    for (int y : g.into(g.src(x))) {
      auto [xy, k] = a.product(x, y);
      st.push_back({x, y, xy, rational(k, a.level)});
    }
    auto [xi, k] = a.star(x);
    inv.push_back({x, xi, rational(k, a.level)});
  }
  return Json{{"kind", "algebra"}, {"dimension", a.dimension()}, {"level", a.level}, {"groupoid", to_json(g)},
              {"structure", st},   {"involution", inv}};
}

Json to_json(const Report& r) {
  Json checks = Json::array();
  for (const auto& c : r.checks) checks.push_back({{"id", c.id}, {"ok", c.ok}, {"detail", c.detail}});
  return Json{{"kind", "report"}, {"subject", r.subject}, {"ok", r.ok()}, {"checks", checks}};
}

Json to_json(const DualityReport& r) {
  Json arts = Json::array();
  for (const auto& a : r.artifacts)
    arts.push_back({{"step", a.step}, {"role", a.role}, {"groupoid", a.groupoid}, {"objects", a.objects},
                    {"arrows", a.arrows}, {"level", a.level}, {"twist", a.twist}});
  Json checks = Json::array();
  for (const auto& c : r.checks.checks) checks.push_back({{"id", c.id}, {"ok", c.ok}, {"detail", c.detail}});
  Json blocks = Json::object(), ranks = Json::object();
  for (const auto& [k, v] : r.blocks) blocks[k] = v;
  for (const auto& [k, v] : r.k0_ranks) ranks[k] = v;
  return Json{{"kind", "duality-report"}, {"pipeline", r.kind}, {"subject", r.subject}, {"ok", r.ok()},
              {"level", r.level},         {"seed", r.seed},     {"artifacts", arts},    {"checks", checks},
              {"blocks", blocks},         {"k0_ranks", ranks},  {"notes", r.notes}};
}

Json to_json(const BundleGerbeData& b) {
  std::vector<int> trans(b.base()->arrows());
  const bool lift = b.lift.has_value();
  for (int c = 0; c < b.base()->arrows(); ++c) trans[c] = lift ? (*b.lift)[c] : b.quotient.rep[b.rho_bar.map[c]];
  Json j{{"kind", "bundle-gerbe"},
         {"name", b.name},
         {"level", b.level()},
         {"group", to_json(*b.group)},
         {"normal", b.normal.elements},
         {"base", to_json(*b.base())},
         {"transition", trans},
         {"lift", b.force_fibred ? "fibred" : lift ? "transition" : "canonical"},
         {"sigma", sparse_values(b.cocycle.sigma)},
         {"lambda", sparse_eq(b.cocycle.lambda)},
         {"beta", sparse_eq(b.cocycle.beta)}};
  return j;
}

// ---------------------------------------------------------------- readers

FiniteGroup group_from_json(const Json& j, const std::string& at) {
  const int n = int_field(j, "order", at);
  if (n < 1) fail(child(at, "order"), "order must be positive");
  auto rows = int_rows(field(j, "mult", at), child(at, "mult"), n);
  if (int(rows.size()) != n) fail(child(at, "mult"), "expected " + std::to_string(n) + " rows");
  std::vector<int> flat;
  for (auto& r : rows)
    for (int v : r) {
      if (v < 0 || v >= n) throw std::invalid_argument("group table entry out of range at " + child(at, "mult"));
      flat.push_back(v);
    }
  std::vector<int> factors;
  if (j.contains("factors")) factors = int_array(j["factors"], child(at, "factors"));
  auto rep = validate_group(FiniteGroup::from_table(n, flat, factors));
  if (!rep.ok()) throw std::invalid_argument("invalid group at " + (at.empty() ? "/" : at) + ": " + rep.violations().front());
  auto g = FiniteGroup::from_table(n, std::move(flat), std::move(factors));
  g.name = str_field(j, "name", "");
  return g;
}

GroupoidTables groupoid_tables_from_json(const Json& j, const std::string& at) {
  GroupoidTables t;
  t.objects = int_field(j, "objects", at);
  for (auto& a : int_rows(field(j, "arrows", at), child(at, "arrows"), 2)) t.arrows.push_back({a[0], a[1]});
  for (auto& c : int_rows(field(j, "compose", at), child(at, "compose"), 3)) t.compose.push_back({c[0], c[1], c[2]});
  t.inverse = int_array(field(j, "inverse", at), child(at, "inverse"));
  t.units = int_array(field(j, "units", at), child(at, "units"));
  if (j.contains("point_of")) {
    t.point_of = int_array(j["point_of"], child(at, "point_of"));
    t.base_points = int_field(j, "base_points", at);
  }
  return t;
}

CoveredBase cover_from_json(const Json& j, const std::string& at) {
  CoveredBase cb;
  cb.base_points = int_field(j, "base_points", at);
  cb.cover = int_rows(field(j, "cover", at), child(at, "cover"));
  for (std::size_t i = 0; i < cb.cover.size(); ++i)
    for (int m : cb.cover[i])
      if (m < 0 || m >= cb.base_points) throw std::invalid_argument("cover member outside the base at " + child(at, "cover"));
  return cb;
}

GroupoidPtr groupoid_from_json(const Json& j, const std::string& at) {
  const auto kind = kind_of(j);
  if (kind == "cover") return cech_groupoid(cover_from_json(j, at));
  if (kind == "group") return group_groupoid(group_from_json(j, at));
  if (!kind.empty() && kind != "groupoid") fail(child(at, "kind"), "expected a groupoid, group or cover document");
  auto g = FiniteGroupoid::from_tables(groupoid_tables_from_json(j, at), str_field(j, "name", ""));
  auto rep = validate_groupoid(*g);
  if (!rep.ok()) throw std::invalid_argument("invalid groupoid: " + rep.violations().front());
  return g;
}

Cochain cochain_from_json(const Json& j, GroupoidPtr g, i64 level, const std::string& at) {
  const int degree = int_field(j, "degree", at);
  if (degree < 0) fail(child(at, "degree"), "degree must be nonnegative");
  Cochain c = Cochain::zero(g, degree, level);
  read_sparse(field(j, "values", at), child(at, "values"), level, std::max(degree, 1),
              [&](const std::vector<int>& idx, i64 v, const std::string& here) {
                std::size_t i = degree == 0 ? std::size_t(idx[0]) : tuple_index(*g, idx, here);
                if (degree == 0 && (idx[0] < 0 || idx[0] >= g->objects()))
                  throw std::invalid_argument("object out of range at " + here);
                c.values[i] = v;
              });
  return c;
}

Cochain cochain_from_json(const Json& j, std::optional<i64> override_level) {
  if (kind_of(j) != "cochain") fail("/kind", "expected kind \"cochain\"");
  auto g = groupoid_from_json(field(j, "groupoid", ""), "/groupoid");
  return cochain_from_json(j, g, resolve_level(j, override_level), "");
}

Bimodule bimodule_from_json(const Json& j) {
  if (kind_of(j) != "bimodule") fail("/kind", "expected kind \"bimodule\"");
  auto left = groupoid_from_json(field(j, "left", ""), "/left");
  auto right = groupoid_from_json(field(j, "right", ""), "/right");
  const int n = int_field(j, "carrier", "");
  auto lm = int_array(field(j, "lmoment", ""), "/lmoment");
  auto rm = int_array(field(j, "rmoment", ""), "/rmoment");
  if (int(lm.size()) != n) fail("/lmoment", "expected one entry per carrier point");
  if (int(rm.size()) != n) fail("/rmoment", "expected one entry per carrier point");
  for (int p = 0; p < n; ++p)
    if (lm[p] < 0 || lm[p] >= left->objects() || rm[p] < 0 || rm[p] >= right->objects())
      throw std::invalid_argument("moment of carrier point " + std::to_string(p) + " out of range");
  std::map<std::pair<int, int>, int> la, ra;
  for (auto& t : int_rows(field(j, "left_action", ""), "/left_action", 3)) la[{t[0], t[1]}] = t[2];
  for (auto& t : int_rows(field(j, "right_action", ""), "/right_action", 3)) ra[{t[0], t[1]}] = t[2];
  auto lookup = [](const std::map<std::pair<int, int>, int>& m, int a, int b, const char* side) {
    auto it = m.find({a, b});
    if (it == m.end())
      throw std::invalid_argument(std::string(side) + " action undefined on (" + std::to_string(a) + ", " +
                                  std::to_string(b) + ")");
    return it->second;
  };
  return make_bimodule(
      left, right, n, lm, rm, [&](int g, int p) { return lookup(la, g, p, "left"); },
      [&](int p, int h) { return lookup(ra, p, h, "right"); }, str_field(j, "name", ""));
}

StarAlgebra algebra_from_json(const Json& j) {
  if (kind_of(j) != "algebra") fail("/kind", "expected kind \"algebra\"");
  auto g = groupoid_from_json(field(j, "groupoid", ""), "/groupoid");
  const i64 level = int_field(j, "level", "");
  if (level < 1) fail("/level", "level must be positive");
  auto sigma = Cochain::zero(g, 2, level);
  const auto& st = field(j, "structure", "");
  if (!st.is_array()) fail("/structure", "expected an array of [a, b, ab, \"p/q\"]");
  for (std::size_t i = 0; i < st.size(); ++i) {
    auto at = child("/structure", i);
    if (!st[i].is_array() || st[i].size() != 4) fail(at, "expected [a, b, ab, \"p/q\"]");
    int a = as_int(st[i][0], child(at, 0)), b = as_int(st[i][1], child(at, 1)), ab = as_int(st[i][2], child(at, 2));
    std::vector<int> t{a, b};
    auto idx = tuple_index(*g, t, at);
    if (g->compose(a, b) != ab)
      throw std::invalid_argument("structure entry (" + std::to_string(a) + ", " + std::to_string(b) + ", " +
                                  std::to_string(ab) + ") disagrees with the groupoid composition");
    sigma.values[idx] = parse_rational(st[i][3], level, child(at, 3));
  }
  StarAlgebra a;
  a.groupoid = g;
  a.level = level;
  a.twist = std::move(sigma.values);
  return a;
}

GroupAction action_from_json(const Json& j, GroupoidPtr g, const std::string& at) {
  auto G = std::make_shared<FiniteGroup>(group_from_json(field(j, "group", at), child(at, "group")));
  auto rows = int_rows(field(j, "arrow_action", at), child(at, "arrow_action"), g->arrows());
  if (int(rows.size()) != G->order) fail(child(at, "arrow_action"), "expected one row per group element");
  std::vector<int> flat;
  for (auto& r : rows)
    for (int v : r) {
      if (v < 0 || v >= g->arrows()) throw std::invalid_argument("action entry out of range at " + child(at, "arrow_action"));
      flat.push_back(v);
    }
  auto a = make_action(G, g, flat);
  auto rep = check_action(a);
  if (!rep.ok()) throw std::invalid_argument("invalid action: " + rep.violations().front());
  return a;
}

i64 resolve_level(const Json& doc, std::optional<i64> override_level) {
  i64 L = 12;
  if (const char* env = std::getenv("TDUAL_LEVEL")) {
    try {
      L = std::stoll(env);
    } catch (...) {
      throw std::invalid_argument(std::string("TDUAL_LEVEL is not an integer: ") + env);
    }
  }
  if (doc.is_object() && doc.contains("level")) L = as_int(doc["level"], "/level");
  if (override_level) L = *override_level;
  if (L < 1) throw std::invalid_argument("level must be positive");
  return L;
}

BundleGerbeData bundle_gerbe_from_json(const Json& j, i64 level) {
  if (kind_of(j) != "bundle-gerbe") fail("/kind", "expected kind \"bundle-gerbe\"");
  auto G = std::make_shared<FiniteGroup>(group_from_json(field(j, "group", ""), "/group"));
  auto normal = int_array(field(j, "normal", ""), "/normal");
  for (int n : normal)
    if (n < 0 || n >= G->order) throw std::invalid_argument("normal subgroup element out of range");
  std::sort(normal.begin(), normal.end());
  auto N = make_subgroup(G, normal);
  auto base = groupoid_from_json(field(j, "base", ""), "/base");
  auto trans = int_array(field(j, "transition", ""), "/transition");
  if (int(trans.size()) != base->arrows()) fail("/transition", "expected one group element per base arrow");
  for (int t : trans)
    if (t < 0 || t >= G->order) throw std::invalid_argument("transition element out of range");
  auto Q = quotient(N);
  std::vector<int> tq(trans.size());
  for (std::size_t i = 0; i < trans.size(); ++i) tq[i] = Q.proj[trans[i]];
  auto b = make_bundle_gerbe(G, N, base, tq, level, str_field(j, "name", ""));
  const auto mode = str_field(j, "lift", "canonical");
  if (mode == "transition") {
    b.lift = trans;
  } else if (mode == "fibred") {
    b.force_fibred = true;
  } else if (mode != "canonical") {
    fail("/lift", "expected \"canonical\", \"transition\" or \"fibred\"");
  }
  const auto& E = b.bundle.groupoid;
  const int k = G->order;
  if (j.contains("sigma"))
    read_sparse(j["sigma"], "/sigma", level, 2, [&](const std::vector<int>& idx, i64 v, const std::string& here) {
      b.cocycle.sigma.values[tuple_index(*E, idx, here)] = v;
    });
  if (j.contains("lambda"))
    read_sparse(j["lambda"], "/lambda", level, 2, [&](const std::vector<int>& idx, i64 v, const std::string& here) {
      if (idx[0] < 0 || idx[0] >= k || idx[1] < 0 || idx[1] >= E->arrows())
        throw std::invalid_argument("index out of range at " + here);
      b.cocycle.lambda.set({idx[0]}, idx[1], v);
    });
  if (j.contains("beta"))
    read_sparse(j["beta"], "/beta", level, 3, [&](const std::vector<int>& idx, i64 v, const std::string& here) {
      if (idx[0] < 0 || idx[0] >= k || idx[1] < 0 || idx[1] >= k || idx[2] < 0 || idx[2] >= E->objects())
        throw std::invalid_argument("index out of range at " + here);
      b.cocycle.beta.set({idx[0], idx[1]}, idx[2], v);
    });
  if (j.contains("beta_constant")) {
    std::vector<i64> omega(std::size_t(k) * k, 0);
    read_sparse(j["beta_constant"], "/beta_constant", level, 2,
                [&](const std::vector<int>& idx, i64 v, const std::string& here) {
                  if (idx[0] < 0 || idx[0] >= k || idx[1] < 0 || idx[1] >= k)
                    throw std::invalid_argument("index out of range at " + here);
                  omega[idx[0] * k + idx[1]] = v;
                });
    set_constant_beta(b, omega);
  }
  return b;
}

HilbertInput hilbert_from_json(const Json& j, std::optional<i64> override_level) {
  if (kind_of(j) != "hilbert") fail("/kind", "expected kind \"hilbert\"");
  HilbertInput h;
  h.groupoid = groupoid_from_json(field(j, "groupoid", ""), "/groupoid");
  h.dimension = int_field(j, "dimension", "");
  if (h.dimension < 1) fail("/dimension", "dimension must be positive");
  h.level = resolve_level(j, override_level);
  const auto& us = field(j, "unitaries", "");
  if (!us.is_array() || int(us.size()) != h.groupoid->arrows()) fail("/unitaries", "expected one matrix per arrow");
  const int d = h.dimension;
  for (std::size_t a = 0; a < us.size(); ++a) {
    auto at = child("/unitaries", a);
    if (!us[a].is_array() || int(us[a].size()) != d * d) fail(at, "expected d*d entries in row-major order");
    Eigen::MatrixXcd m(d, d);
    for (int e = 0; e < d * d; ++e) {
      auto here = child(at, e);
      const auto& z = us[a][e];
      if (!z.is_array() || z.size() != 2) fail(here, "expected [re, im]");
      auto part = [&](const Json& v, const std::string& p) {
        if (v.is_number_integer()) return double(v.get<i64>());
        if (!v.is_string()) fail(p, "expected a rational \"p/q\"");
        auto s = v.get<std::string>();
        auto slash = s.find('/');
        try {
          double num = double(std::stoll(s.substr(0, slash)));
          double den = slash == std::string::npos ? 1.0 : double(std::stoll(s.substr(slash + 1)));
          if (den == 0) fail(p, "zero denominator");
          return num / den;
        } catch (const SchemaError&) {
          throw;
        } catch (const std::exception&) {
          fail(p, "expected a rational \"p/q\"");
        }
      };
      m(e / d, e % d) = {part(z[0], child(here, 0)), part(z[1], child(here, 1))};
    }
    h.unitaries.push_back(m);
  }
  return h;
}

Json artifact(Json body, const std::string& construction, const std::vector<std::string>& inputs) {
  body["provenance"] = Json{{"construction", construction}, {"inputs", inputs}, {"tool", "tdual"}};
  body.erase("id");
  body["id"] = content_hash(body);
  return body;
}

// ---------------------------------------------------------------- fixtures

std::vector<Fixture> fixtures() {
  std::vector<Fixture> out;
  auto bundle_doc = [](std::string name, const FiniteGroup& G, std::vector<int> normal, Json base,
                       std::vector<int> transition, i64 level) {
    return Json{{"kind", "bundle-gerbe"}, {"name", name},     {"level", level},
                {"group", group_doc(G)},  {"normal", normal}, {"base", base},
                {"transition", transition}, {"lift", "canonical"}};
  };
  {
    auto z2 = FiniteGroup::cyclic(2);
    z2.name = "Z/2";
    Json cover{{"kind", "cover"}, {"base_points", 1}, {"cover", {{0}, {0}}}};
    out.push_back({"two-chart-point", "Z/2 over the Cech groupoid of two charts covering a point, trivial cocycle",
                   bundle_doc("two-chart-point", z2, {0, 1}, cover, {0, 0, 0, 0}, 2)});
  }
  auto z4 = FiniteGroup::cyclic(4);
  z4.name = "Z/4";
  out.push_back({"z4-mobius", "Z/4 over Z/2-bundle with the Mobius transition on two charts, level 4",
                 bundle_doc("z4-mobius", z4, {0, 2}, pair_doc(2), {0, 1, 3, 0}, 4)});
  out.push_back({"z4-trivial", "Z/4 over the trivial Z/2-bundle on two charts, level 4",
                 bundle_doc("z4-trivial", z4, {0, 2}, pair_doc(2), {0, 0, 0, 0}, 4)});
  {
    auto k = FiniteGroup::abelian({2, 2});
    k.name = "(Z/2)^2";
    auto doc = bundle_doc("klein-heisenberg", k, {0, 1, 2, 3}, to_json(*point_groupoid()), {0}, 2);
    auto w = bilinear_group_cocycle(k, 0, 1, 2);
    Json bc = Json::array();
    for (int g = 0; g < 4; ++g)
      for (int h = 0; h < 4; ++h)
        if (w[g * 4 + h]) bc.push_back({{"at", {g, h}}, {"value", rational(w[g * 4 + h], 2)}});
    doc["beta_constant"] = bc;
    out.push_back({"klein-heisenberg", "(Z/2)^2 gerbe over a point with the Heisenberg class as beta (obstructed fiber)", doc});
  }
  {
    auto q = FiniteGroup::quaternion();
    q.name = "Q8";
    const int i = 2;
    auto doc = bundle_doc("q8-center", q, {0, 1}, pair_doc(2), {q.id, i, q.inverse(i), q.id}, 4);
    // β = δa for a(g) = (g mod 4)/4 with a(1) = 0
    auto a = [&](int g) { return i64(g % 4); };
    Json bc = Json::array();
    for (int g = 0; g < 8; ++g)
      for (int h = 0; h < 8; ++h) {
        i64 v = mod(a(h) - a(q.mul(g, h)) + a(g), 4);
        if (v) bc.push_back({{"at", {g, h}}, {"value", rational(v, 4)}});
      }
    doc["beta_constant"] = bc;
    out.push_back({"q8-center", "Q8 over Q8/{+-1} on two charts with transition i and a coboundary beta", doc});
  }
  {
    auto z4p = z4;
    out.push_back({"z4-point", "Z/4 gerbe over a point, untwisted (commutative fiber with four blocks)",
                   bundle_doc("z4-point", z4p, {0, 1, 2, 3}, to_json(*point_groupoid()), {0}, 4)});
  }
  {
    auto k = FiniteGroup::abelian({2, 2});
    k.name = "(Z/2)^2";
    Json us = Json::array();
    auto r = [](int v) { return std::to_string(v) + "/1"; };
    for (int g = 0; g < 4; ++g) {
      auto res = k.residues(g);
      // X^a Z^b with X = [[0,1],[1,0]], Z = diag(1,-1)
      int m[2][2];
      int a = res[0], b = res[1];
      for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y) {
          int xv = a ? (x != y) : (x == y);
          int zv = (y == 1 && b) ? -1 : 1;
          m[x][y] = xv ? zv : 0;
        }
      Json row = Json::array();
      for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y) row.push_back({r(m[x][y]), "0/1"});
      us.push_back(row);
    }
    Json doc{{"kind", "hilbert"}, {"name", "pauli-d2"}, {"groupoid", group_doc(k)}, {"dimension", 2},
             {"level", 2},        {"unitaries", us}};
    out.push_back({"pauli-d2", "Pauli unitaries X^a Z^b on (Z/2)^2 in dimension 2 for the Hilbert bimodule check", doc});
  }
  {
    auto doc = pair_doc(2);
    // (0<-1)(1<-0) must be the unit at 0; point it at the arrow 0<-1 instead
    for (auto& c : doc["compose"])
      if (c[0] == 1 && c[1] == 2) c[2] = 1;
    doc["name"] = "broken-compose";
    out.push_back({"broken-compose", "pair groupoid on two objects with one compose triple deliberately mis-set", doc, true});
  }
  return out;
}

std::optional<Fixture> fixture(const std::string& id) {
  for (auto& f : fixtures())
    if (f.id == id) return f;
  return std::nullopt;
}

}  // namespace tdual::io
