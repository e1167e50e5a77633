#include "tdual/group.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "tdual/modarith.hpp"

namespace tdual {

std::string Report::render() const {
  std::ostringstream os;
  if (!subject.empty()) os << subject << "\n";
  for (const auto& c : checks) {
    os << "  [" << (c.ok ? "ok" : "FAIL") << "] " << c.id;
    if (!c.detail.empty()) os << ": " << c.detail;
    os << "\n";
  }
  return os.str();
}

bool FiniteGroup::is_abelian() const {
  for (int a = 0; a < order; ++a)
    for (int b = a + 1; b < order; ++b)
      if (mul(a, b) != mul(b, a)) return false;
  return true;
}

int FiniteGroup::element_order(int g) const {
  int k = 1, x = g;
  while (x != id) {
    x = mul(x, g);
    ++k;
  }
  return k;
}

int FiniteGroup::exponent() const {
  i64 e = 1;
  for (int g = 0; g < order; ++g) e = lcm64(e, element_order(g));
  return static_cast<int>(e);
}

std::vector<int> FiniteGroup::residues(int g) const {
  std::vector<int> r(factors.size());
  for (int i = static_cast<int>(factors.size()) - 1; i >= 0; --i) {
    r[i] = g % factors[i];
    g /= factors[i];
  }
  return r;
}

int FiniteGroup::from_residues(const std::vector<int>& r) const {
  int g = 0;
  for (std::size_t i = 0; i < factors.size(); ++i) g = g * factors[i] + static_cast<int>(mod(r[i], factors[i]));
  return g;
}

FiniteGroup FiniteGroup::from_table(int order, std::vector<int> mult, std::vector<int> factors) {
  FiniteGroup G;
  G.order = order;
  G.mult = std::move(mult);
  G.factors = std::move(factors);
  G.id = -1;
  for (int e = 0; e < order && G.id < 0; ++e) {
    bool ok = true;
    for (int a = 0; a < order && ok; ++a) ok = G.mul(e, a) == a && G.mul(a, e) == a;
    if (ok) G.id = e;
  }
  if (G.id < 0) throw std::invalid_argument("group table has no identity");
  G.inv.assign(order, -1);
  for (int a = 0; a < order; ++a)
    for (int b = 0; b < order; ++b)
      if (G.mul(a, b) == G.id) G.inv[a] = b;
  for (int a = 0; a < order; ++a)
    if (G.inv[a] < 0) throw std::invalid_argument("group table: element without inverse");
  return G;
}

FiniteGroup FiniteGroup::trivial() { return abelian({1}); }

FiniteGroup FiniteGroup::cyclic(int n) {
  auto G = abelian({n});
  G.name = "Z/" + std::to_string(n);
  return G;
}

FiniteGroup FiniteGroup::abelian(const std::vector<int>& factors) {
  FiniteGroup G;
  G.factors = factors;
  G.order = 1;
  for (int n : factors) G.order *= n;
  G.mult.assign(std::size_t(G.order) * G.order, 0);
  G.inv.assign(G.order, 0);
  G.id = 0;
  for (int a = 0; a < G.order; ++a) {
    auto ra = G.residues(a);
    std::vector<int> ri(ra.size());
    for (std::size_t i = 0; i < ra.size(); ++i) ri[i] = -ra[i];
    G.inv[a] = G.from_residues(ri);
    for (int b = 0; b < G.order; ++b) {
      auto rb = G.residues(b);
      for (std::size_t i = 0; i < ra.size(); ++i) rb[i] += ra[i];
      G.mult[std::size_t(a) * G.order + b] = G.from_residues(rb);
    }
  }
  std::string nm;
  for (std::size_t i = 0; i < factors.size(); ++i) nm += (i ? "x" : "") + ("Z/" + std::to_string(factors[i]));
  G.name = nm;
  return G;
}

FiniteGroup FiniteGroup::quaternion() {
  // index 2*b + s : basis b in {1,i,j,k}, sign s (0 = +, 1 = -)
  static const int bm[4][4] = {{0, 1, 2, 3}, {1, 0, 3, 2}, {2, 3, 0, 1}, {3, 2, 1, 0}};
  static const int sm[4][4] = {{0, 0, 0, 0}, {0, 1, 0, 1}, {0, 1, 1, 0}, {0, 0, 1, 1}};
  std::vector<int> mult(64);
  for (int a = 0; a < 8; ++a)
    for (int b = 0; b < 8; ++b) {
      int ba = a / 2, sa = a % 2, bb = b / 2, sb = b % 2;
      mult[a * 8 + b] = 2 * bm[ba][bb] + ((sa + sb + sm[ba][bb]) % 2);
    }
  auto G = from_table(8, std::move(mult));
  G.name = "Q8";
  return G;
}

FiniteGroup FiniteGroup::dihedral(int n) {
  const int ord = 2 * n;
  std::vector<int> mult(std::size_t(ord) * ord);
  for (int x = 0; x < ord; ++x)
    for (int y = 0; y < ord; ++y) {
      int a = x % n, b = x / n, c = y % n, d = y / n;
      int r = static_cast<int>(mod(a + (b ? -c : c), n));
      mult[std::size_t(x) * ord + y] = r + n * ((b + d) % 2);
    }
  auto G = from_table(ord, std::move(mult));
  G.name = "D" + std::to_string(n);
  return G;
}

Report validate_group(const FiniteGroup& g) {
  Report rep;
  rep.subject = "group " + g.name;
  const int n = g.order;
  bool closed = static_cast<int>(g.mult.size()) == n * n;
  for (int v : g.mult) closed = closed && v >= 0 && v < n;
  rep.add("table.closed", closed);
  if (!closed) return rep;
  std::string bad;
  for (int a = 0; a < n && bad.empty(); ++a)
    for (int b = 0; b < n && bad.empty(); ++b)
      for (int c = 0; c < n; ++c)
        if (g.mul(g.mul(a, b), c) != g.mul(a, g.mul(b, c))) {
          bad = "(" + std::to_string(a) + "," + std::to_string(b) + "," + std::to_string(c) + ")";
          break;
        }
  rep.add("associativity", bad.empty(), bad);
  bool unit = g.id >= 0 && g.id < n, inv = static_cast<int>(g.inv.size()) == n;
  for (int a = 0; a < n && unit; ++a) unit = g.mul(g.id, a) == a && g.mul(a, g.id) == a;
  for (int a = 0; a < n && inv && unit; ++a) inv = g.mul(a, g.inv[a]) == g.id && g.mul(g.inv[a], a) == g.id;
  rep.add("identity", unit);
  rep.add("inverse", inv);
  if (!g.factors.empty()) {
    FiniteGroup ref = FiniteGroup::abelian(g.factors);
    rep.add("abelian-structure", ref.order == n && ref.mult == g.mult);
  }
  return rep;
}

FiniteGroup direct_product(const FiniteGroup& a, const FiniteGroup& b) {
  const int n = a.order * b.order;
  std::vector<int> mult(std::size_t(n) * n);
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      mult[std::size_t(x) * n + y] = a.mul(x / b.order, y / b.order) * b.order + b.mul(x % b.order, y % b.order);
  std::vector<int> f;
  if (!a.factors.empty() && !b.factors.empty()) {
    f = a.factors;
    f.insert(f.end(), b.factors.begin(), b.factors.end());
  }
  auto G = FiniteGroup::from_table(n, std::move(mult), f);
  G.name = a.name + "x" + b.name;
  return G;
}

Subgroup make_subgroup(GroupPtr g, std::vector<int> elements) {
  std::sort(elements.begin(), elements.end());
  elements.erase(std::unique(elements.begin(), elements.end()), elements.end());
  Subgroup s;
  s.ambient = g;
  s.index_of.assign(g->order, -1);
  for (std::size_t i = 0; i < elements.size(); ++i) s.index_of[elements[i]] = static_cast<int>(i);
  const int k = static_cast<int>(elements.size());
  std::vector<int> mult(std::size_t(k) * k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      int p = s.index_of[g->mul(elements[i], elements[j])];
      if (p < 0) throw std::invalid_argument("subset is not closed under multiplication");
      mult[std::size_t(i) * k + j] = p;
    }
  if (s.index_of[g->id] < 0) throw std::invalid_argument("subset does not contain the identity");
  auto sub = FiniteGroup::from_table(k, std::move(mult));
  sub.name = "sub(" + g->name + ")";
  s.normal = true;
  for (int x = 0; x < g->order && s.normal; ++x)
    for (int n : elements)
      if (s.index_of[g->conj(x, n)] < 0) {
        s.normal = false;
        break;
      }
  s.elements = std::move(elements);
  s.group = std::make_shared<const FiniteGroup>(std::move(sub));
  return s;
}

Subgroup center(GroupPtr g) {
  std::vector<int> z;
  for (int a = 0; a < g->order; ++a) {
    bool c = true;
    for (int b = 0; b < g->order && c; ++b) c = g->mul(a, b) == g->mul(b, a);
    if (c) z.push_back(a);
  }
  return make_subgroup(g, z);
}

Subgroup whole_group(GroupPtr g) {
  std::vector<int> all(g->order);
  std::iota(all.begin(), all.end(), 0);
  return make_subgroup(g, all);
}

Subgroup trivial_subgroup(GroupPtr g) { return make_subgroup(g, {g->id}); }

QuotientGroup quotient(const Subgroup& n) {
  if (!n.normal) throw std::invalid_argument("quotient by a non-normal subgroup");
  const auto& G = *n.ambient;
  QuotientGroup q;
  q.ambient_id = G.id;
  q.proj.assign(G.order, -1);
  for (int g = 0; g < G.order; ++g) {
    if (q.proj[g] >= 0) continue;
    int c = static_cast<int>(q.rep.size());
    q.rep.push_back(g);
    for (int x : n.elements) q.proj[G.mul(g, x)] = c;
  }
  const int k = static_cast<int>(q.rep.size());
  std::vector<int> mult(std::size_t(k) * k);
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b) mult[std::size_t(a) * k + b] = q.proj[G.mul(q.rep[a], q.rep[b])];
  auto Q = FiniteGroup::from_table(k, std::move(mult));
  Q.name = G.name + "/N";
  q.group = std::make_shared<const FiniteGroup>(std::move(Q));
  return q;
}

std::pair<FiniteGroup, std::vector<int>> abelian_normal_form(const FiniteGroup& g) {
  if (!g.is_abelian()) throw std::invalid_argument("abelian_normal_form: group is not abelian");
  if (g.order == 1) return {FiniteGroup::trivial(), {0}};
  // divisor chains n1 | n2 | ... with product = order
  std::vector<std::vector<int>> chains;
  std::function<void(std::vector<int>&, int)> gen = [&](std::vector<int>& cur, int rest) {
    if (rest == 1) {
      chains.push_back(cur);
      return;
    }
    for (int d = 2; d <= rest; ++d) {
      if (rest % d) continue;
      if (!cur.empty() && d % cur.back()) continue;
      cur.push_back(d);
      gen(cur, rest / d);
      cur.pop_back();
    }
  };
  std::vector<int> cur;
  gen(cur, g.order);
  std::vector<int> ord(g.order);
  for (int x = 0; x < g.order; ++x) ord[x] = g.element_order(x);
  for (const auto& chain : chains) {
    const int k = static_cast<int>(chain.size());
    std::vector<int> gens(k);
    std::vector<int> span{g.id};
    std::function<bool(int, const std::vector<int>&)> pick = [&](int i, const std::vector<int>& sp) -> bool {
      if (i == k) {
        span = sp;
        return true;
      }
      for (int x = 0; x < g.order; ++x) {
        if (ord[x] != chain[i]) continue;
        std::vector<int> next;
        std::vector<char> seen(g.order, 0);
        bool clash = false;
        for (int s : sp) {
          int p = s;
          for (int t = 0; t < chain[i]; ++t) {
            if (seen[p]) {
              clash = true;
              break;
            }
            seen[p] = 1;
            next.push_back(p);
            p = g.mul(p, x);
          }
          if (clash) break;
        }
        if (clash) continue;
        gens[i] = x;
        if (pick(i + 1, next)) return true;
      }
      return false;
    };
    if (!pick(0, span)) continue;
    FiniteGroup A = FiniteGroup::abelian(chain);
    std::vector<int> old_to_new(g.order, -1);
    for (int a = 0; a < A.order; ++a) {
      auto r = A.residues(a);
      int e = g.id;
      for (int i = 0; i < k; ++i)
        for (int t = 0; t < r[i]; ++t) e = g.mul(e, gens[i]);
      old_to_new[e] = a;
    }
    return {A, old_to_new};
  }
  throw std::logic_error("abelian_normal_form: no decomposition found");
}

DualGroup::DualGroup(const FiniteGroup& g) {
  if (g.factors.empty()) throw std::invalid_argument("DualGroup requires an abelian group with factors");
  factors = g.factors;
  i64 e = 1;
  for (int n : factors) e = lcm64(e, n);
  exponent = static_cast<int>(e);
  order = g.order;
}

int DualGroup::pairing(int phi, int g) const {
  i64 s = 0;
  for (int i = static_cast<int>(factors.size()) - 1; i >= 0; --i) {
    int n = factors[i];
    s += static_cast<i64>(phi % n) * (g % n) * (exponent / n);
    phi /= n;
    g /= n;
  }
  return static_cast<int>(mod(s, exponent));
}

}  // namespace tdual
