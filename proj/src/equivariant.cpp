#include "tdual/equivariant.hpp"

#include <stdexcept>

#include "tdual/constructions.hpp"

namespace tdual {

namespace {

std::size_t ipow_size(std::size_t b, int e) {
  std::size_t r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

std::size_t gindex(const std::vector<int>& g, int order) {
  std::size_t i = 0;
  for (int x : g) i = i * order + x;
  return i;
}

std::vector<int> gtuple(std::size_t idx, int p, int order) {
  std::vector<int> g(p);
  for (int i = p - 1; i >= 0; --i) {
    g[i] = static_cast<int>(idx % order);
    idx /= order;
  }
  return g;
}

std::size_t count_q(const FiniteGroupoid& h, int q) { return h.nerve().count(q); }

// perm[g * count + t] = index of g.t
std::vector<std::size_t> tuple_action(const GroupAction& a, int q) {
  const auto& H = *a.target;
  const auto& nv = H.nerve();
  const std::size_t n = nv.count(q);
  const int order = a.group->order;
  std::vector<std::size_t> perm(order * n);
  int buf[16];
  for (int g = 0; g < order; ++g)
    for (std::size_t t = 0; t < n; ++t) {
      if (q == 0) {
        perm[g * n + t] = a.act_obj(g, static_cast<int>(t));
        continue;
      }
      const int* tu = nv.tuple(q, t);
      for (int i = 0; i < q; ++i) buf[i] = a.act(g, tu[i]);
      perm[g * n + t] = nv.index(q, buf);
    }
  return perm;
}

void require_same(const EqCochain& a, const EqCochain& b) {
  if (a.p != b.p || a.q != b.q || a.modulus != b.modulus) throw std::invalid_argument("equivariant cochains: shape mismatch");
}

}  // namespace

EqCochain EqCochain::zero(ActionPtr a, int p, int q, i64 modulus) {
  if (p < 0 || q < 0) throw std::invalid_argument("EqCochain: negative bidegree");
  EqCochain c;
  c.action = a;
  c.p = p;
  c.q = q;
  c.modulus = modulus;
  c.values.assign(ipow_size(a->group->order, p) * count_q(*a->target, q), 0);
  return c;
}

std::size_t EqCochain::groupoid_count() const { return count_q(*action->target, q); }
std::size_t EqCochain::group_count() const { return ipow_size(action->group->order, p); }

i64 EqCochain::at(const std::vector<int>& g, std::size_t t) const {
  return values[gindex(g, action->group->order) * groupoid_count() + t];
}

void EqCochain::set(const std::vector<int>& g, std::size_t t, i64 v) {
  values[gindex(g, action->group->order) * groupoid_count() + t] = mod(v, modulus);
}

Cochain EqCochain::slice(const std::vector<int>& g) const {
  Cochain c = Cochain::zero(action->target, q, modulus, true);
  const std::size_t base = gindex(g, action->group->order) * groupoid_count();
  for (std::size_t t = 0; t < c.values.size(); ++t) c.values[t] = values[base + t];
  return c;
}

bool EqCochain::normalized() const {
  const int order = action->group->order;
  const int id = action->group->id;
  const auto& H = *action->target;
  const auto& nv = H.nerve();
  const std::size_t n = groupoid_count();
  for (std::size_t gi = 0; gi < group_count(); ++gi) {
    auto g = gtuple(gi, p, order);
    bool gdeg = false;
    for (int x : g) gdeg = gdeg || x == id;
    for (std::size_t t = 0; t < n; ++t) {
      if (!values[gi * n + t]) continue;
      if (gdeg) return false;
      if (q > 0) {
        const int* tu = nv.tuple(q, t);
        for (int i = 0; i < q; ++i)
          if (H.is_unit(tu[i])) return false;
      }
    }
  }
  return true;
}

bool EqCochain::is_zero() const {
  for (i64 v : values)
    if (v) return false;
  return true;
}

EqCochain EqCochain::operator+(const EqCochain& o) const {
  require_same(*this, o);
  EqCochain c = *this;
  for (std::size_t i = 0; i < values.size(); ++i) c.values[i] = (values[i] + o.values[i]) % modulus;
  return c;
}

EqCochain EqCochain::operator-(const EqCochain& o) const {
  require_same(*this, o);
  EqCochain c = *this;
  for (std::size_t i = 0; i < values.size(); ++i) c.values[i] = mod(values[i] - o.values[i], modulus);
  return c;
}

TotalCochain TotalCochain::zero(ActionPtr a, int n, i64 modulus) {
  TotalCochain t;
  t.action = a;
  t.degree = n;
  t.modulus = modulus;
  for (int p = 0; p <= n; ++p) t.parts.push_back(EqCochain::zero(a, p, n - p, modulus));
  return t;
}

bool TotalCochain::is_zero() const {
  for (const auto& c : parts)
    if (!c.is_zero()) return false;
  return true;
}

EqCochain group_differential(const EqCochain& c) {
  const auto& G = *c.action->group;
  const int order = G.order;
  const int p = c.p;
  EqCochain out = EqCochain::zero(c.action, p + 1, c.q, c.modulus);
  const std::size_t n = c.groupoid_count();
  auto perm = tuple_action(*c.action, c.q);
  std::vector<int> face(p);
  for (std::size_t gi = 0; gi < out.group_count(); ++gi) {
    auto g = gtuple(gi, p + 1, order);
    // first face acts by g1 on the argument: (g1.f)(t) = f(g1^-1 t)
    std::size_t first = gindex(std::vector<int>(g.begin() + 1, g.end()), order) * n;
    const std::size_t* pinv = &perm[std::size_t(G.inverse(g[0])) * n];
    std::vector<std::size_t> mids;
    std::vector<int> msign;
    for (int i = 1; i <= p; ++i) {
      int w = 0;
      for (int j = 0; j <= p; ++j) {
        if (j == i - 1) {
          face[w++] = G.mul(g[j], g[j + 1]);
          ++j;
        } else {
          face[w++] = g[j];
        }
      }
      mids.push_back(gindex(face, order) * n);
      msign.push_back(i % 2 ? -1 : 1);
    }
    std::size_t last = gindex(std::vector<int>(g.begin(), g.end() - 1), order) * n;
    const int lsign = (p + 1) % 2 ? -1 : 1;
    for (std::size_t t = 0; t < n; ++t) {
      i64 s = c.values[first + pinv[t]];
      for (std::size_t m = 0; m < mids.size(); ++m) s += msign[m] * c.values[mids[m] + t];
      s += lsign * c.values[last + t];
      out.values[gi * n + t] = mod(s, c.modulus);
    }
  }
  return out;
}

EqCochain groupoid_differential(const EqCochain& c) {
  EqCochain out = EqCochain::zero(c.action, c.p, c.q + 1, c.modulus);
  const auto& H = *c.action->target;
  const auto& nv = H.nerve();
  const std::size_t n = c.groupoid_count(), n1 = out.groupoid_count();
  for (std::size_t gi = 0; gi < c.group_count(); ++gi)
    for (std::size_t t = 0; t < n1; ++t) {
      i64 s = 0;
      detail::bar_faces(H, c.q, nv.tuple(c.q + 1, t),
                        [&](const int* f, int sign) { s += sign * c.values[gi * n + nv.index(c.q, f)]; });
      out.values[gi * n1 + t] = mod(s, c.modulus);
    }
  return out;
}

TotalCochain total_differential(const TotalCochain& t) {
  if (static_cast<int>(t.parts.size()) != t.degree + 1) throw std::invalid_argument("total_differential: wrong number of parts");
  for (int p = 0; p <= t.degree; ++p)
    if (t.parts[p].p != p || t.parts[p].q != t.degree - p || t.parts[p].modulus != t.modulus)
      throw std::invalid_argument("total_differential: inconsistent bidegrees");
  TotalCochain out = TotalCochain::zero(t.action, t.degree + 1, t.modulus);
  for (int p = 0; p <= t.degree + 1; ++p) {
    EqCochain& slot = out.parts[p];
    if (p >= 1) slot = slot + group_differential(t.parts[p - 1]);
    if (p <= t.degree) {
      auto dd = groupoid_differential(t.parts[p]);
      slot = (p % 2) ? slot - dd : slot + dd;
    }
  }
  return out;
}

EqCochain random_eq_cochain(ActionPtr a, int p, int q, i64 modulus, std::mt19937_64& rng) {
  EqCochain c = EqCochain::zero(a, p, q, modulus);
  std::uniform_int_distribution<i64> dist(0, modulus - 1);
  const int order = a->group->order, id = a->group->id;
  auto nd = q == 0 ? nondegenerate(*a->target, 0) : nondegenerate(*a->target, q);
  const std::size_t n = c.groupoid_count();
  for (std::size_t gi = 0; gi < c.group_count(); ++gi) {
    auto g = gtuple(gi, p, order);
    bool deg = false;
    for (int x : g) deg = deg || x == id;
    if (deg) continue;
    for (auto t : nd) c.values[gi * n + t] = dist(rng);
  }
  return c;
}

TotalCochain random_total(ActionPtr a, int n, i64 modulus, std::mt19937_64& rng) {
  TotalCochain t = TotalCochain::zero(a, n, modulus);
  for (int p = 0; p <= n; ++p) t.parts[p] = random_eq_cochain(a, p, n - p, modulus, rng);
  return t;
}

TotalCochain EquivariantCocycle::total() const {
  TotalCochain t = TotalCochain::zero(action, 2, sigma.modulus);
  if (lambda.modulus != sigma.modulus || beta.modulus != sigma.modulus)
    throw std::invalid_argument("equivariant cocycle: components at different levels");
  t.parts[0].values = sigma.values;
  t.parts[1] = lambda;
  t.parts[2] = beta;
  return t;
}

EquivariantCocycle untwisted_equivariant(ActionPtr a, const Cochain& sigma) {
  return {a, sigma, EqCochain::zero(a, 1, 1, sigma.modulus), EqCochain::zero(a, 2, 0, sigma.modulus)};
}

Report check_equivariant_cocycle(const EquivariantCocycle& c) {
  Report r;
  r.subject = "equivariant 2-cocycle";
  r.add("sigma.normalized", c.sigma.normalized());
  r.add("lambda.normalized", c.lambda.normalized());
  r.add("beta.normalized", c.beta.normalized());
  auto d = total_differential(c.total());
  const char* names[] = {"D(0,3): delta sigma", "D(1,2): d sigma - delta lambda", "D(2,1): d lambda + delta beta",
                         "D(3,0): d beta"};
  for (int p = 0; p <= 3; ++p) {
    const auto& s = d.parts[p];
    std::size_t bad = 0, first = s.values.size();
    for (std::size_t i = 0; i < s.values.size(); ++i)
      if (s.values[i]) {
        if (!bad) first = i;
        ++bad;
      }
    r.add(names[p], bad == 0,
          bad ? std::to_string(bad) + " nonzero entries, first at flat index " + std::to_string(first) : "");
  }
  return r;
}

Cochain chain_map_F(const TotalCochain& t, GroupoidPtr crossed) {
  const auto& a = *t.action;
  const auto& G = *a.group;
  const auto& H = *a.target;
  const int na = H.arrows();
  const int n = t.degree;
  if (crossed->arrows() != G.order * na || crossed->objects() != H.objects())
    throw std::invalid_argument("chain_map_F: groupoid is not the crossed product of the action");
  Cochain out = Cochain::zero(crossed, n, t.modulus, true);
  const auto& cn = crossed->nerve();
  const auto& hn = H.nerve();
  if (n == 0) {
    for (int x = 0; x < H.objects(); ++x) out.values[x] = t.parts[0].values[x];
    return out;
  }
  std::vector<int> g(n), gam(n);
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    const int* T = cn.tuple(n, i);
    int prefix = G.id;
    for (int k = 0; k < n; ++k) {
      g[k] = T[k] / na;
      gam[k] = a.act(prefix, T[k] % na);
      prefix = G.mul(prefix, g[k]);
    }
    i64 s = 0;
    for (int p = 0; p <= n; ++p) {
      const auto& c = t.parts[p];
      const int q = n - p;
      std::size_t tt = q == 0 ? static_cast<std::size_t>(H.src(gam[n - 1])) : hn.index(q, gam.data() + p);
      std::size_t gi = gindex(std::vector<int>(g.begin(), g.begin() + p), G.order);
      s += c.values[gi * c.groupoid_count() + tt];
    }
    out.values[i] = mod(s, t.modulus);
  }
  return out;
}

Cochain crossed_twist(const EquivariantCocycle& c, GroupoidPtr crossed) { return chain_map_F(c.total(), crossed); }

}  // namespace tdual
