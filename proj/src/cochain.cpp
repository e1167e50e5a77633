#include "tdual/cochain.hpp"

#include <stdexcept>

namespace tdual {

namespace {

bool has_unit(const FiniteGroupoid& g, const int* t, int k) {
  for (int i = 0; i < k; ++i)
    if (g.is_unit(t[i])) return true;
  return false;
}

}  // namespace

std::vector<std::size_t> nondegenerate(const FiniteGroupoid& g, int k) {
  std::vector<std::size_t> out;
  const auto& nv = g.nerve();
  if (k == 0) {
    for (int x = 0; x < g.objects(); ++x) out.push_back(x);
    return out;
  }
  for (std::size_t i = 0; i < nv.count(k); ++i)
    if (!has_unit(g, nv.tuple(k, i), k)) out.push_back(i);
  return out;
}

Cochain Cochain::zero(GroupoidPtr g, int degree, i64 modulus, bool torus) {
  Cochain c;
  c.groupoid = g;
  c.degree = degree;
  c.modulus = modulus;
  c.torus = torus;
  c.values.assign(g->nerve().count(degree), 0);
  return c;
}

i64 Cochain::at(const int* tuple) const { return values[groupoid->nerve().index(degree, tuple)]; }

void Cochain::set(std::initializer_list<int> t, i64 v) {
  values[groupoid->nerve().index(degree, t.begin())] = mod(v, modulus);
}

bool Cochain::is_zero() const {
  for (i64 v : values)
    if (v) return false;
  return true;
}

bool Cochain::normalized() const {
  if (degree == 0) return true;
  const auto& nv = groupoid->nerve();
  for (std::size_t i = 0; i < values.size(); ++i)
    if (values[i] && has_unit(*groupoid, nv.tuple(degree, i), degree)) return false;
  return true;
}

Cochain Cochain::at_level(i64 m) const {
  if (m % modulus) throw std::invalid_argument("at_level: new level is not a multiple");
  Cochain c = *this;
  c.modulus = m;
  for (auto& v : c.values) v = v * (m / modulus);
  return c;
}

Cochain Cochain::operator+(const Cochain& o) const {
  if (o.modulus != modulus || o.degree != degree) throw std::invalid_argument("cochain sum: mismatched shapes");
  Cochain c = *this;
  for (std::size_t i = 0; i < values.size(); ++i) c.values[i] = (values[i] + o.values[i]) % modulus;
  return c;
}

Cochain Cochain::operator-(const Cochain& o) const {
  if (o.modulus != modulus || o.degree != degree) throw std::invalid_argument("cochain difference: mismatched shapes");
  Cochain c = *this;
  for (std::size_t i = 0; i < values.size(); ++i) c.values[i] = mod(values[i] - o.values[i], modulus);
  return c;
}

Cochain Cochain::scaled(i64 k) const {
  Cochain c = *this;
  for (auto& v : c.values) v = mod(v * k, modulus);
  return c;
}

Cochain differential(const Cochain& c) {
  const auto& g = *c.groupoid;
  const auto& nv = g.nerve();
  Cochain d = Cochain::zero(c.groupoid, c.degree + 1, c.modulus, c.torus);
  for (std::size_t i = 0; i < d.values.size(); ++i) {
    const int* t = nv.tuple(c.degree + 1, i);
    i64 s = 0;
    detail::bar_faces(g, c.degree, t, [&](const int* f, int sign) { s += sign * c.values[nv.index(c.degree, f)]; });
    d.values[i] = mod(s, c.modulus);
  }
  return d;
}

Cochain pullback(const GroupoidHom& phi, const Cochain& c) {
  const auto& g = *phi.source;
  const auto& nv = g.nerve();
  Cochain out = Cochain::zero(phi.source, c.degree, c.modulus, c.torus);
  const auto& tn = phi.target->nerve();
  int buf[16];
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    if (c.degree == 0) {
      out.values[i] = c.values[phi.target->src(phi.map[g.unit(static_cast<int>(i))])];
      continue;
    }
    const int* t = nv.tuple(c.degree, i);
    for (int j = 0; j < c.degree; ++j) buf[j] = phi.map[t[j]];
    out.values[i] = c.values[tn.index(c.degree, buf)];
  }
  return out;
}

Cochain normalize_cocycle(const Cochain& c) {
  if (c.degree <= 1) return c;
  if (c.degree != 2) throw std::invalid_argument("normalize_cocycle: only degrees up to 2 are supported");
  const auto& g = *c.groupoid;
  Cochain b = Cochain::zero(c.groupoid, 1, c.modulus, c.torus);
  for (int a = 0; a < g.arrows(); ++a) {
    int u = g.unit(g.dst(a));
    b.values[a] = c({u, u});
  }
  return c - differential(b);
}

Cochain random_cochain(GroupoidPtr gp, int degree, i64 modulus, std::mt19937_64& rng, bool torus) {
  Cochain c = Cochain::zero(gp, degree, modulus, torus);
  std::uniform_int_distribution<i64> dist(0, modulus - 1);
  for (std::size_t i : nondegenerate(*gp, degree)) c.values[i] = dist(rng);
  return c;
}

std::optional<Cochain> coboundary_witness(const Cochain& c) {
  if (c.degree == 0) {
    if (c.is_zero()) return Cochain::zero(c.groupoid, 0, c.modulus, c.torus);
    return std::nullopt;  // no (-1)-cochains
  }
  const auto& g = *c.groupoid;
  const auto& nv = g.nerve();
  const int k = c.degree - 1;
  auto unknowns = nondegenerate(g, k);
  std::vector<int> var(nv.count(k), -1);
  for (std::size_t j = 0; j < unknowns.size(); ++j) var[unknowns[j]] = static_cast<int>(j);
  ModLinearSystem sys(c.modulus, static_cast<int>(unknowns.size()));
  for (std::size_t i = 0; i < c.values.size(); ++i) {
    const int* t = nv.tuple(c.degree, i);
    std::vector<std::pair<int, i64>> row;
    detail::bar_faces(g, k, t, [&](const int* f, int sign) {
      int v = var[nv.index(k, f)];
      if (v >= 0) row.emplace_back(v, sign);
    });
    sys.add_equation(row, c.values[i]);
  }
  auto sol = sys.solve();
  if (!sol) return std::nullopt;
  Cochain b = Cochain::zero(c.groupoid, k, c.modulus, c.torus);
  for (std::size_t j = 0; j < unknowns.size(); ++j) b.values[unknowns[j]] = (*sol)[j];
  return b;
}

}  // namespace tdual
