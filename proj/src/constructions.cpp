#include "tdual/constructions.hpp"

#include <stdexcept>
#include <string>

namespace tdual {

namespace {
std::string pair_str(int a, int b) { return "(" + std::to_string(a) + "," + std::to_string(b) + ")"; }
std::string triple_str(int a, int b, int c) {
  return "(" + std::to_string(a) + "," + std::to_string(b) + "," + std::to_string(c) + ")";
}
}  // namespace

Report check_functorial(const GroupValuedHom& h) {
  Report rep;
  rep.subject = "homomorphism " + h.source->name + " -> " + h.target->name;
  const auto& G = *h.source;
  const auto& T = *h.target;
  std::string bad;
  if (static_cast<int>(h.map.size()) != G.arrows()) bad = "map has wrong length";
  for (int x = 0; x < G.objects() && bad.empty(); ++x)
    if (h.map[G.unit(x)] != T.id) bad = "unit of object " + std::to_string(x) + " not sent to the identity";
  for (int a = 0; a < G.arrows() && bad.empty(); ++a)
    for (int b : G.into(G.src(a)))
      if (h.map[G.compose(a, b)] != T.mul(h.map[a], h.map[b])) {
        bad = "pair " + pair_str(a, b);
        break;
      }
  rep.add("functorial", bad.empty(), bad);
  return rep;
}

Report check_functorial(const GroupoidHom& h) {
  Report rep;
  rep.subject = "homomorphism " + h.source->name + " -> " + h.target->name;
  const auto& G = *h.source;
  const auto& T = *h.target;
  std::string bad;
  if (static_cast<int>(h.map.size()) != G.arrows()) bad = "map has wrong length";
  for (int x = 0; x < G.objects() && bad.empty(); ++x)
    if (!T.is_unit(h.map[G.unit(x)])) bad = "unit of object " + std::to_string(x) + " not sent to a unit";
  for (int a = 0; a < G.arrows() && bad.empty(); ++a)
    for (int b : G.into(G.src(a))) {
      int c = T.compose(h.map[a], h.map[b]);
      if (c < 0 || h.map[G.compose(a, b)] != c) {
        bad = "pair " + pair_str(a, b);
        break;
      }
    }
  rep.add("functorial", bad.empty(), bad);
  return rep;
}

GroupoidHom compose_hom(const GroupoidHom& second, const GroupoidHom& first) {
  GroupoidHom h{first.source, second.target, std::vector<int>(first.map.size())};
  for (std::size_t a = 0; a < first.map.size(); ++a) h.map[a] = second.map[first.map[a]];
  return h;
}

int NonabelianCocycle::sig(int a, int b) const {
  const int t[2] = {a, b};
  return sigma[groupoid->nerve().index(2, t)];
}

Report check_nonabelian_cocycle(const NonabelianCocycle& c) {
  Report rep;
  rep.subject = "nonabelian cocycle on " + c.groupoid->name;
  const auto& G = *c.groupoid;
  const auto& N = *c.fiber;
  std::string bad;
  for (int a = 0; a < G.arrows() && bad.empty(); ++a) {
    std::vector<char> hit(N.order, 0);
    for (int n = 0; n < N.order; ++n) {
      int y = c.t(a, n);
      if (y < 0 || y >= N.order || hit[y]) {
        bad = "tau(" + std::to_string(a) + ") is not a bijection";
        break;
      }
      hit[y] = 1;
    }
    for (int n = 0; n < N.order && bad.empty(); ++n)
      for (int m = 0; m < N.order; ++m)
        if (c.t(a, N.mul(n, m)) != N.mul(c.t(a, n), c.t(a, m))) {
          bad = "tau(" + std::to_string(a) + ") is not a homomorphism";
          break;
        }
  }
  rep.add("tau.automorphisms", bad.empty(), bad);
  if (!bad.empty()) return rep;
  for (int x = 0; x < G.objects() && bad.empty(); ++x) {
    int u = G.unit(x);
    for (int n = 0; n < N.order; ++n)
      if (c.t(u, n) != n) bad = "tau(unit " + std::to_string(u) + ") is not the identity";
    for (int a : G.into(x))
      if (c.sig(u, a) != N.id) bad = "sigma" + pair_str(u, a) + " not normalized";
    for (int a : G.from(x))
      if (c.sig(a, u) != N.id) bad = "sigma" + pair_str(a, u) + " not normalized";
  }
  rep.add("normalized", bad.empty(), bad);
  for (int a = 0; a < G.arrows() && bad.empty(); ++a)
    for (int b : G.into(G.src(a))) {
      int ab = G.compose(a, b), s = c.sig(a, b);
      for (int n = 0; n < N.order; ++n)
        if (c.t(a, c.t(b, n)) != N.conj(s, c.t(ab, n))) {
          bad = "pair " + pair_str(a, b);
          break;
        }
      if (!bad.empty()) break;
    }
  rep.add("tau.twisted-homomorphism", bad.empty(), bad);
  bad.clear();
  for (int a = 0; a < G.arrows() && bad.empty(); ++a)
    for (int b : G.into(G.src(a))) {
      for (int d : G.into(G.src(b))) {
        int lhs = N.mul(c.t(a, c.sig(b, d)), c.sig(a, G.compose(b, d)));
        int rhs = N.mul(c.sig(a, b), c.sig(G.compose(a, b), d));
        if (lhs != rhs) {
          bad = "triple " + triple_str(a, b, d);
          break;
        }
      }
      if (!bad.empty()) break;
    }
  rep.add("sigma.cocycle", bad.empty(), bad);
  return rep;
}

NonabelianCocycle central_cocycle(GroupoidPtr g, GroupPtr fiber, std::vector<int> sigma) {
  NonabelianCocycle c;
  c.groupoid = g;
  c.fiber = fiber;
  c.sigma = std::move(sigma);
  c.tau.resize(std::size_t(g->arrows()) * fiber->order);
  for (int a = 0; a < g->arrows(); ++a)
    for (int n = 0; n < fiber->order; ++n) c.tau[std::size_t(a) * fiber->order + n] = n;
  return c;
}

GroupoidPtr crossed_product(const GroupAction& a) {
  auto rep = check_action(a);
  if (!rep.ok()) throw std::invalid_argument("crossed_product: invalid action: " + rep.violations().front());
  const auto& G = *a.group;
  const auto& H = *a.target;
  const int na = H.arrows();
  const int n = G.order * na;
  std::vector<int> src(n), dst(n), inv(n), unit(H.objects()), pts;
  for (int g = 0; g < G.order; ++g)
    for (int c = 0; c < na; ++c) {
      int i = g * na + c;
      src[i] = a.act_obj(G.inverse(g), H.src(c));
      dst[i] = H.dst(c);
      inv[i] = G.inverse(g) * na + a.act(G.inverse(g), H.inv(c));
    }
  for (int x = 0; x < H.objects(); ++x) {
    unit[x] = G.id * na + H.unit(x);
    if (H.has_points()) pts.push_back(H.point_of(x));
  }
  return FiniteGroupoid::build(
      H.objects(), src, dst, unit, inv,
      [&](int p, int q) {
        int g = p / na, c = p % na, g2 = q / na, c2 = q % na;
        return G.mul(g, g2) * na + H.compose(c, a.act(g, c2));
      },
      pts, H.base_points(), "(" + G.name + " |x " + H.name + ")");
}

PrincipalBundle principal_bundle(const GroupValuedHom& rho) {
  auto rep = check_functorial(rho);
  if (!rep.ok()) throw std::invalid_argument("principal_bundle: " + rep.violations().front());
  const auto& G = *rho.target;
  const auto& H = *rho.source;
  const int na = H.arrows(), no = H.objects();
  const int n = G.order * na;
  std::vector<int> src(n), dst(n), inv(n), unit(G.order * no), pts;
  for (int g = 0; g < G.order; ++g)
    for (int c = 0; c < na; ++c) {
      int i = g * na + c;
      int gr = G.mul(g, rho.map[c]);
      src[i] = gr * no + H.src(c);
      dst[i] = g * no + H.dst(c);
      inv[i] = gr * na + H.inv(c);
    }
  for (int g = 0; g < G.order; ++g)
    for (int x = 0; x < no; ++x) {
      unit[g * no + x] = g * na + H.unit(x);
      if (H.has_points()) pts.push_back(H.point_of(x));
    }
  PrincipalBundle b;
  b.groupoid = FiniteGroupoid::build(
      G.order * no, src, dst, unit, inv, [&](int p, int q) { return (p / na) * na + H.compose(p % na, q % na); }, pts,
      H.base_points(), "(" + G.name + " x_rho " + H.name + ")");
  std::vector<int> t(std::size_t(G.order) * n);
  for (int k = 0; k < G.order; ++k)
    for (int i = 0; i < n; ++i) t[std::size_t(k) * n + i] = G.mul(k, i / na) * na + i % na;
  b.translation = make_action(rho.target, b.groupoid, std::move(t));
  return b;
}

GroupoidPtr extension(const NonabelianCocycle& c) {
  auto rep = check_nonabelian_cocycle(c);
  if (!rep.ok()) throw std::invalid_argument("extension: cocycle condition violated: " + rep.violations().front());
  const auto& G = *c.groupoid;
  const auto& N = *c.fiber;
  const int na = G.arrows();
  const int n = N.order * na;
  // inverse permutations of tau
  std::vector<int> tinv(std::size_t(na) * N.order);
  for (int a = 0; a < na; ++a)
    for (int m = 0; m < N.order; ++m) tinv[std::size_t(a) * N.order + c.t(a, m)] = m;
  std::vector<int> src(n), dst(n), inv(n), unit(G.objects()), pts;
  for (int p = 0; p < N.order; ++p)
    for (int a = 0; a < na; ++a) {
      int i = p * na + a;
      src[i] = G.src(a);
      dst[i] = G.dst(a);
      int ai = G.inv(a);
      int w = N.mul(N.inverse(p), N.inverse(c.sig(a, ai)));
      inv[i] = tinv[std::size_t(a) * N.order + w] * na + ai;
    }
  for (int x = 0; x < G.objects(); ++x) {
    unit[x] = N.id * na + G.unit(x);
    if (G.has_points()) pts.push_back(G.point_of(x));
  }
  return FiniteGroupoid::build(
      G.objects(), src, dst, unit, inv,
      [&](int u, int v) {
        int p1 = u / na, a1 = u % na, p2 = v / na, a2 = v % na;
        int p = N.mul(N.mul(p1, c.t(a1, p2)), c.sig(a1, a2));
        return p * na + G.compose(a1, a2);
      },
      pts, G.base_points(), "(" + N.name + " x^sigma " + G.name + ")");
}

NonabelianCocycle delta_rho(GroupoidPtr gp, const Subgroup& n, const std::vector<int>& rho_tilde) {
  const auto& G = *gp;
  const auto& A = *n.ambient;
  for (int x = 0; x < G.objects(); ++x)
    if (rho_tilde[G.unit(x)] != A.id) throw std::invalid_argument("delta_rho: lift does not send units to the identity");
  NonabelianCocycle c;
  c.groupoid = gp;
  c.fiber = n.group;
  const auto& nerve = G.nerve();
  c.sigma.resize(nerve.count(2));
  for (std::size_t i = 0; i < nerve.count(2); ++i) {
    const int* t = nerve.tuple(2, i);
    int v = A.mul(A.mul(rho_tilde[t[0]], rho_tilde[t[1]]), A.inverse(rho_tilde[G.compose(t[0], t[1])]));
    if (!n.contains(v)) throw std::invalid_argument("delta_rho: value escapes N at pair " + pair_str(t[0], t[1]));
    c.sigma[i] = n.index_of[v];
  }
  const int k = n.group->order;
  c.tau.resize(std::size_t(G.arrows()) * k);
  for (int a = 0; a < G.arrows(); ++a)
    for (int m = 0; m < k; ++m) {
      int v = A.conj(rho_tilde[a], n.elements[m]);
      if (!n.contains(v)) throw std::invalid_argument("delta_rho: N is not stable under conjugation by the lift");
      c.tau[std::size_t(a) * k + m] = n.index_of[v];
    }
  return c;
}

FibredGerbe fibred_gerbe(const Subgroup& n, const QuotientGroup& q, const GroupValuedHom& rho_bar,
                         const std::vector<int>* lift) {
  auto rep = check_functorial(rho_bar);
  if (!rep.ok()) throw std::invalid_argument("fibred_gerbe: " + rep.violations().front());
  const auto& G = *n.ambient;
  const auto& H = *rho_bar.source;
  const int na = H.arrows();
  FibredGerbe f;
  f.index.assign(std::size_t(G.order) * na, -1);
  for (int c = 0; c < na; ++c)
    for (int g = 0; g < G.order; ++g)
      if (q.proj[g] == rho_bar.map[c]) {
        f.index[std::size_t(g) * na + c] = static_cast<int>(f.arrows.size());
        f.arrows.push_back({g, c});
      }
  const int m = static_cast<int>(f.arrows.size());
  std::vector<int> src(m), dst(m), inv(m), unit(H.objects()), pts;
  for (int i = 0; i < m; ++i) {
    auto [g, c] = f.arrows[i];
    src[i] = H.src(c);
    dst[i] = H.dst(c);
    inv[i] = f.index[std::size_t(G.inverse(g)) * na + H.inv(c)];
  }
  for (int x = 0; x < H.objects(); ++x) {
    unit[x] = f.index[std::size_t(G.id) * na + H.unit(x)];
    if (H.has_points()) pts.push_back(H.point_of(x));
  }
  f.groupoid = FiniteGroupoid::build(
      H.objects(), src, dst, unit, inv,
      [&](int u, int v) {
        return f.index[std::size_t(G.mul(f.arrows[u].first, f.arrows[v].first)) * na +
                       H.compose(f.arrows[u].second, f.arrows[v].second)];
      },
      pts, H.base_points(), "fibred(" + H.name + ")");
  if (lift) {
    std::vector<int> iso(std::size_t(n.group->order) * na);
    for (int k = 0; k < n.group->order; ++k)
      for (int c = 0; c < na; ++c) {
        int g = G.mul(n.elements[k], (*lift)[c]);
        iso[std::size_t(k) * na + c] = f.index[std::size_t(g) * na + c];
      }
    f.from_extension = std::move(iso);
  }
  return f;
}

std::vector<int> canonical_lift(const GroupValuedHom& rho_bar, const QuotientGroup& q) {
  const auto& H = *rho_bar.source;
  std::vector<int> l(H.arrows());
  for (int c = 0; c < H.arrows(); ++c) l[c] = H.is_unit(c) ? q.ambient_id : q.rep[rho_bar.map[c]];
  return l;
}

std::vector<std::vector<int>> all_lifts(const GroupValuedHom& rho_bar, const QuotientGroup& q, std::size_t limit) {
  const auto& H = *rho_bar.source;
  const int go = static_cast<int>(q.proj.size());
  std::vector<std::vector<int>> choices(H.arrows());
  for (int c = 0; c < H.arrows(); ++c) {
    if (H.is_unit(c)) {
      choices[c].push_back(q.ambient_id);
      continue;
    }
    for (int g = 0; g < go; ++g)
      if (q.proj[g] == rho_bar.map[c]) choices[c].push_back(g);
  }
  std::vector<std::vector<int>> out;
  std::vector<int> cur(H.arrows(), 0);
  std::vector<std::size_t> pos(H.arrows(), 0);
  while (out.size() < limit) {
    for (int c = 0; c < H.arrows(); ++c) cur[c] = choices[c][pos[c]];
    out.push_back(cur);
    int c = 0;
    for (; c < H.arrows(); ++c) {
      if (H.is_unit(c)) continue;
      if (++pos[c] < choices[c].size()) break;
      pos[c] = 0;
    }
    if (c == H.arrows()) break;
  }
  return out;
}

InducedTakai induced_takai(const GroupAction& a) {
  auto rep = check_action(a);
  if (!rep.ok()) throw std::invalid_argument("induced_takai: invalid action: " + rep.violations().front());
  const auto& G = *a.group;
  const auto& H = *a.target;
  const int na = H.arrows(), no = H.objects(), k = G.order;
  const int n = k * k * na;
  auto idx = [&](int g, int h, int c) { return (g * k + h) * na + c; };
  std::vector<int> src(n), dst(n), inv(n), unit(k * no), pts;
  for (int g = 0; g < k; ++g)
    for (int h = 0; h < k; ++h)
      for (int c = 0; c < na; ++c) {
        int i = idx(g, h, c);
        int hi = G.inverse(h);
        src[i] = G.mul(g, h) * no + a.act_obj(hi, H.src(c));
        dst[i] = g * no + H.dst(c);
        inv[i] = idx(G.mul(g, h), hi, a.act(hi, H.inv(c)));
      }
  for (int g = 0; g < k; ++g)
    for (int x = 0; x < no; ++x) {
      unit[g * no + x] = idx(g, G.id, H.unit(x));
      if (H.has_points()) pts.push_back(H.point_of(x));
    }
  InducedTakai t;
  t.groupoid = FiniteGroupoid::build(
      k * no, src, dst, unit, inv,
      [&](int p, int q) {
        int g = p / (k * na), h1 = (p / na) % k, c1 = p % na;
        int h2 = (q / na) % k, c2 = q % na;
        return idx(g, G.mul(h1, h2), H.compose(c1, a.act(h1, c2)));
      },
      pts, H.base_points(), "induced(" + H.name + ")");
  std::vector<int> tr(std::size_t(k) * n);
  for (int m = 0; m < k; ++m)
    for (int i = 0; i < n; ++i) {
      int g = i / (k * na), rest = i % (k * na);
      tr[std::size_t(m) * n + i] = G.mul(m, g) * k * na + rest;
    }
  t.translation = make_action(a.group, t.groupoid, std::move(tr));
  t.embedding.source = a.target;
  t.embedding.target = t.groupoid;
  t.embedding.map.resize(na);
  for (int c = 0; c < na; ++c) t.embedding.map[c] = idx(G.id, G.id, c);
  return t;
}

}  // namespace tdual
