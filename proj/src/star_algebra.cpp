#include "tdual/star_algebra.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace tdual {

namespace {

using cd = std::complex<double>;

std::string tuple_str(std::initializer_list<int> v) {
  std::ostringstream os;
  os << "(";
  bool first = true;
  for (int x : v) {
    os << (first ? "" : ",") << x;
    first = false;
  }
  os << ")";
  return os.str();
}

i64 nerve2(const FiniteGroupoid& g, int a, int b) {
  const int t[2] = {a, b};
  return static_cast<i64>(g.nerve().index(2, t));
}

std::vector<cd> roots_table(i64 level) {
  std::vector<cd> z(static_cast<std::size_t>(level));
  for (i64 k = 0; k < level; ++k) z[k] = std::polar(1.0, 2 * std::numbers::pi * double(k) / double(level));
  return z;
}

}  // namespace

// ---------------------------------------------------------------- algebra

i64 StarAlgebra::phase(int a, int b) const { return twist[nerve2(*groupoid, a, b)]; }

std::pair<int, i64> StarAlgebra::product(int a, int b) const {
  if (!groupoid->composable(a, b)) return {-1, 0};
  return {groupoid->compose(a, b), phase(a, b)};
}

std::pair<int, i64> StarAlgebra::star(int a) const {
  const int ai = groupoid->inv(a);
  return {ai, mod(-phase(ai, a), level)};
}

AlgebraElement StarAlgebra::basis(int a, i64 k) const { return {{a, Cyclotomic::root(level, k)}}; }

AlgebraElement StarAlgebra::multiply(const AlgebraElement& x, const AlgebraElement& y) const {
  AlgebraElement r;
  for (const auto& [a, ca] : x)
    for (const auto& [b, cb] : y) {
      auto [ab, k] = product(a, b);
      if (ab < 0) continue;
      auto it = r.try_emplace(ab, Cyclotomic(level)).first;
      it->second += (ca * cb).times_root(k);
    }
  return r;
}

AlgebraElement StarAlgebra::adjoint(const AlgebraElement& x) const {
  AlgebraElement r;
  for (const auto& [a, ca] : x) {
    auto [ai, k] = star(a);
    r.insert_or_assign(ai, ca.conj().times_root(k));
  }
  return r;
}

AlgebraElement StarAlgebra::unit() const {
  AlgebraElement r;
  for (int x = 0; x < groupoid->objects(); ++x) {
    int u = groupoid->unit(x);
    r.emplace(u, Cyclotomic::root(level, -phase(u, u)));
  }
  return r;
}

bool equal(const AlgebraElement& x, const AlgebraElement& y) {
  auto zero_or = [](const AlgebraElement& m, int a, const Cyclotomic& c) {
    auto it = m.find(a);
    return it == m.end() ? c.is_zero() : it->second == c;
  };
  for (const auto& [a, c] : x)
    if (!zero_or(y, a, c)) return false;
  for (const auto& [a, c] : y)
    if (!zero_or(x, a, c)) return false;
  return true;
}

AlgebraElement scaled(const AlgebraElement& x, i64 s) {
  AlgebraElement r;
  for (const auto& [a, c] : x) r.emplace(a, c.scaled(s));
  return r;
}

AlgebraElement plus(const AlgebraElement& x, const AlgebraElement& y) {
  AlgebraElement r = x;
  for (const auto& [a, c] : y) {
    auto it = r.find(a);
    if (it == r.end())
      r.emplace(a, c);
    else
      it->second += c;
  }
  return r;
}

StarAlgebra twisted_algebra(GroupoidPtr g, const Cochain& sigma, i64 level) {
  if (sigma.degree != 2) throw std::invalid_argument("twisted_algebra: the twist must be a 2-cochain");
  if (level % sigma.modulus != 0) throw std::invalid_argument("twisted_algebra: level must be a multiple of the cochain modulus");
  if (sigma.groupoid.get() != g.get()) throw std::invalid_argument("twisted_algebra: cochain lives on another groupoid");
  Cochain s = sigma.at_level(level);
  auto d = differential(s);
  const auto& nv = g->nerve();
  for (std::size_t i = 0; i < d.values.size(); ++i)
    if (d.values[i] != 0) {
      const int* t = nv.tuple(3, i);
      throw std::invalid_argument("twisted_algebra: twist is not closed, associativity fails at triple " +
                                  tuple_str({t[0], t[1], t[2]}));
    }
  StarAlgebra a;
  a.groupoid = std::move(g);
  a.level = level;
  a.twist = std::move(s.values);
  return a;
}

StarAlgebra twisted_algebra(const Cochain& sigma) { return twisted_algebra(sigma.groupoid, sigma, sigma.modulus); }

StarAlgebra untwisted_algebra(GroupoidPtr g) {
  StarAlgebra a;
  a.twist.assign(g->nerve().count(2), 0);
  a.groupoid = std::move(g);
  return a;
}

Report check_star_algebra(const StarAlgebra& A) {
  Report rep;
  rep.subject = "twisted algebra on " + A.groupoid->name;
  const auto& g = *A.groupoid;
  const i64 L = A.level;
  std::string bad;
  for (int a = 0; a < g.arrows() && bad.empty(); ++a)
    for (int b : g.into(g.src(a)))
      for (int c : g.into(g.src(b))) {
        int ab = g.compose(a, b), bc = g.compose(b, c);
        if (mod(A.phase(a, b) + A.phase(ab, c) - A.phase(b, c) - A.phase(a, bc), L) != 0) {
          bad = "basis triple " + tuple_str({a, b, c});
          break;
        }
      }
  rep.add("associative", bad.empty(), bad);
  bad.clear();
  for (int a = 0; a < g.arrows() && bad.empty(); ++a)
    for (int b : g.into(g.src(a))) {
      // (δa δb)* against δb* δa*
      auto [ab, k] = A.product(a, b);
      auto [abi, kab] = A.star(ab);
      auto [bi, kb] = A.star(b);
      auto [ai, ka] = A.star(a);
      auto [prod, kp] = A.product(bi, ai);
      if (prod != abi || mod(-k + kab - kb - ka - kp, L) != 0) {
        bad = "basis pair " + tuple_str({a, b});
        break;
      }
    }
  rep.add("involution.anti-multiplicative", bad.empty(), bad);
  bad.clear();
  for (int a = 0; a < g.arrows(); ++a) {
    auto [ai, k] = A.star(a);
    auto [aa, k2] = A.star(ai);
    if (aa != a || mod(k2 - k, L) != 0) {
      bad = "arrow " + std::to_string(a);
      break;
    }
  }
  rep.add("involution.square", bad.empty(), bad);
  return rep;
}

// ---------------------------------------------------------------- center

std::vector<CentralElement> center_basis(const StarAlgebra& A) {
  const auto& g = *A.groupoid;
  const int n = g.arrows();
  const i64 L = A.level;
  // z_a = ζ^{off[a]} z_{root(a)}
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::vector<i64> off(n, 0);
  std::vector<char> dead(n, 0);
  auto find = [&](int a) {
    std::vector<int> path;
    while (parent[a] != a) {
      path.push_back(a);
      a = parent[a];
    }
    // compress from the top so offsets accumulate correctly
    for (auto it = path.rbegin(); it != path.rend(); ++it) {
      int p = parent[*it];
      if (p != a) off[*it] = mod(off[*it] + off[p], L);
      parent[*it] = a;
    }
    return a;
  };
  // relate z_b = ζ^d z_a
  auto relate = [&](int a, int b, i64 d) {
    int ra = find(a), rb = find(b);
    if (ra == rb) {
      if (mod(off[b] - off[a] - d, L) != 0) dead[ra] = 1;
      return;
    }
    // z_rb = ζ^{d + off[a] - off[b]} z_ra
    parent[rb] = ra;
    off[rb] = mod(d + off[a] - off[b], L);
    dead[ra] |= dead[rb];
  };
  auto kill = [&](int a) { dead[find(a)] = 1; };

  for (int eta = 0; eta < n; ++eta) {
    const int ei = g.inv(eta);
    // coefficient of δ_α in z δ_η: α with s(α) = s(η), from z_{αη⁻¹}
    for (int alpha : g.from(g.src(eta))) {
      int left = g.compose(alpha, ei);
      i64 p = A.phase(left, eta);
      if (g.dst(alpha) == g.dst(eta)) {
        int right = g.compose(ei, alpha);
        i64 q = A.phase(eta, right);
        relate(left, right, p - q);
      } else {
        kill(left);
      }
    }
    // coefficient of δ_α in δ_η z with no partner on the left
    for (int alpha : g.into(g.dst(eta)))
      if (g.src(alpha) != g.src(eta)) kill(g.compose(ei, alpha));
  }
  std::vector<std::vector<int>> members(n);
  for (int a = 0; a < n; ++a) members[find(a)].push_back(a);
  std::vector<CentralElement> basis;
  for (int r = 0; r < n; ++r) {
    if (members[r].empty() || dead[r]) continue;
    CentralElement z;
    for (int a : members[r]) z.terms.push_back({a, off[a]});
    basis.push_back(std::move(z));
  }
  return basis;
}

// ---------------------------------------------------------------- blocks

namespace {

struct GeneralBlocks {
  std::vector<int> sizes;
  int center_dim = 0;
  double residual = 0;
  int attempts = 0;
  bool center_verified = false;
};

bool verify_center(const StarAlgebra& A, const std::vector<CentralElement>& Z) {
  for (const auto& z : Z) {
    AlgebraElement e;
    for (auto [a, k] : z.terms) e.emplace(a, Cyclotomic::root(A.level, k));
    for (int eta = 0; eta < A.dimension(); ++eta) {
      auto d = A.basis(eta);
      if (!equal(A.multiply(e, d), A.multiply(d, e))) return false;
    }
  }
  return true;
}

// Complex product of two dense vectors supported on `support` of each.
std::vector<cd> dense_product(const StarAlgebra& A, const std::vector<cd>& zeta, const std::vector<cd>& x,
                              const std::vector<int>& sx, const std::vector<cd>& y, const std::vector<int>& sy) {
  const auto& g = *A.groupoid;
  std::vector<cd> r(g.arrows(), 0.0);
  std::vector<char> in_x(g.arrows(), 0);
  for (int a : sx) in_x[a] = 1;
  for (int b : sy) {
    if (y[b] == 0.0) continue;
    for (int a : g.from(g.dst(b))) {
      if (!in_x[a] || x[a] == 0.0) continue;
      r[g.compose(a, b)] += x[a] * y[b] * zeta[A.phase(a, b)];
    }
  }
  return r;
}

GeneralBlocks general_blocks(const StarAlgebra& A, const BlockOptions& opt, bool verify) {
  const auto& g = *A.groupoid;
  const int n = g.arrows();
  GeneralBlocks out;
  auto Z = center_basis(A);
  const int k = static_cast<int>(Z.size());
  out.center_dim = k;
  out.center_verified = verify && verify_center(A, Z);
  if (verify && !out.center_verified) throw std::logic_error("block_decomposition: center basis failed exact verification");
  const auto zeta = roots_table(A.level);

  std::vector<int> support, rep(k);
  std::vector<cd> rep_phase(k);
  for (int i = 0; i < k; ++i) {
    for (auto [a, p] : Z[i].terms) support.push_back(a);
    rep[i] = Z[i].terms.front().first;
    rep_phase[i] = zeta[Z[i].terms.front().second];
  }
  std::sort(support.begin(), support.end());
  auto dense = [&](int i) {
    std::vector<cd> v(n, 0.0);
    for (auto [a, p] : Z[i].terms) v[a] = zeta[p];
    return v;
  };
  auto coords = [&](const std::vector<cd>& v) {
    Eigen::VectorXcd c(k);
    for (int i = 0; i < k; ++i) c[i] = v[rep[i]] / rep_phase[i];
    return c;
  };
  // regular trace of δ at each unit
  std::vector<cd> tr_unit(g.objects(), 0.0);
  for (int x = 0; x < g.objects(); ++x) {
    int u = g.unit(x);
    for (int b : g.into(x)) tr_unit[x] += zeta[A.phase(u, b)];
  }
  std::vector<std::vector<cd>> Zd(k);
  for (int i = 0; i < k; ++i) Zd[i] = dense(i);

  for (int attempt = 0; attempt < opt.attempts; ++attempt) {
    out.attempts = attempt + 1;
    std::mt19937_64 rng(opt.seed + 0x9e3779b97f4a7c15ULL * attempt);
    std::normal_distribution<double> nd;
    std::vector<cd> c(n, 0.0);
    for (int i = 0; i < k; ++i) {
      cd r(nd(rng), nd(rng));
      for (auto [a, p] : Z[i].terms) c[a] += r * zeta[p];
    }
    // h = c + c*
    std::vector<cd> h = c;
    for (int a : support) {
      auto [ai, p] = A.star(a);
      h[ai] += std::conj(c[a]) * zeta[p];
    }
    Eigen::MatrixXcd Lh(k, k);
    for (int i = 0; i < k; ++i) {
      std::vector<int> si;
      for (auto [a, p] : Z[i].terms) si.push_back(a);
      Lh.col(i) = coords(dense_product(A, zeta, h, support, Zd[i], si));
    }
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(Lh);
    if (es.info() != Eigen::Success) continue;
    const auto& ev = es.eigenvalues();
    double scale = 1;
    for (int i = 0; i < k; ++i) scale = std::max(scale, std::abs(ev[i]));
    std::vector<double> re(k);
    bool real = true;
    for (int i = 0; i < k; ++i) {
      re[i] = ev[i].real();
      real &= std::abs(ev[i].imag()) <= opt.tolerance * 1e3 * scale;
    }
    std::vector<double> sorted = re;
    std::sort(sorted.begin(), sorted.end());
    double gap = std::numeric_limits<double>::infinity();
    for (int i = 1; i < k; ++i) gap = std::min(gap, sorted[i] - sorted[i - 1]);
    if (!real || gap < opt.tolerance * opt.gap_ratio * scale) continue;

    std::vector<int> sizes;
    double residual = 0;
    bool good = true;
    for (int j = 0; j < k && good; ++j) {
      Eigen::VectorXcd v = es.eigenvectors().col(j);
      std::vector<cd> e(n, 0.0);
      for (int i = 0; i < k; ++i)
        for (auto [a, p] : Z[i].terms) e[a] += v[i] * zeta[p];
      auto e2 = dense_product(A, zeta, e, support, e, support);
      int best = 0;
      for (int i = 1; i < k; ++i)
        if (std::abs(v[i]) > std::abs(v[best])) best = i;
      cd alpha = e2[rep[best]] / e[rep[best]];
      if (std::abs(alpha) < opt.tolerance) {
        good = false;
        break;
      }
      cd tr = 0;
      for (int x = 0; x < g.objects(); ++x) tr += e[g.unit(x)] * tr_unit[x];
      tr /= alpha;
      double nsq = tr.real();
      double r = std::round(nsq);
      residual = std::max({residual, std::abs(nsq - r), std::abs(tr.imag())});
      int nb = static_cast<int>(std::lround(std::sqrt(std::max(r, 0.0))));
      if (r < 1 || nb * nb != static_cast<int>(r) || std::abs(nsq - r) > 1e-6) good = false;
      sizes.push_back(nb);
    }
    if (!good) continue;
    int total = 0;
    for (int s : sizes) total += s * s;
    if (total != n) continue;
    std::sort(sizes.begin(), sizes.end());
    out.sizes = std::move(sizes);
    out.residual = residual;
    return out;
  }
  throw std::runtime_error("block_decomposition: spectral split stayed ambiguous after " +
                           std::to_string(opt.attempts) + " attempts");
}

}  // namespace

BlockDecomposition block_decomposition(const StarAlgebra& A, const BlockOptions& opt) {
  const auto& g = *A.groupoid;
  BlockDecomposition out;
  out.seed = opt.seed;
  out.report.subject = "blocks of " + g.name;
  if (!opt.reduce) {
    auto gb = general_blocks(A, opt, true);
    out.sizes = gb.sizes;
    out.center_dimension = gb.center_dim;
    out.attempts = gb.attempts;
    out.max_residual = gb.residual;
    out.method = "regular";
    out.report.add("center.exact", gb.center_verified, "dimension " + std::to_string(gb.center_dim));
  } else {
    out.method = "components";
    int ncomp = 0;
    auto comp = object_components(g, &ncomp);
    std::vector<int> rep(ncomp, -1), count(ncomp, 0);
    for (int x = 0; x < g.objects(); ++x) {
      if (rep[comp[x]] < 0) rep[comp[x]] = x;
      ++count[comp[x]];
    }
    std::map<std::vector<i64>, std::pair<std::vector<int>, int>> cache;
    bool verified = true;
    for (int c = 0; c < ncomp; ++c) {
      auto loops = isotropy(g, rep[c]);
      std::vector<int> blocks{1};
      int zdim = 1;
      if (loops.size() > 1) {
        auto [sub, emb] = full_subgroupoid(g, {rep[c]});
        std::vector<i64> key{sub->arrows()};
        const auto& nv = sub->nerve();
        std::vector<i64> tw(nv.count(2));
        for (std::size_t i = 0; i < tw.size(); ++i) {
          const int* t = nv.tuple(2, i);
          tw[i] = A.phase(emb[t[0]], emb[t[1]]);
          key.push_back(sub->compose(t[0], t[1]));
          key.push_back(tw[i]);
        }
        auto it = cache.find(key);
        if (it == cache.end()) {
          StarAlgebra iso{sub, A.level, std::move(tw)};
          auto gb = general_blocks(iso, opt, true);
          verified &= gb.center_verified;
          out.attempts = std::max(out.attempts, gb.attempts);
          out.max_residual = std::max(out.max_residual, gb.residual);
          it = cache.emplace(key, std::make_pair(gb.sizes, gb.center_dim)).first;
        }
        blocks = it->second.first;
        zdim = it->second.second;
      }
      for (int b : blocks) out.sizes.push_back(b * count[c]);
      out.center_dimension += zdim;
    }
    std::sort(out.sizes.begin(), out.sizes.end());
    out.report.add("center.exact", verified, "dimension " + std::to_string(out.center_dimension));
  }
  long total = 0;
  for (int s : out.sizes) total += long(s) * s;
  out.report.add("blocks.count", int(out.sizes.size()) == out.center_dimension,
                 std::to_string(out.sizes.size()) + " blocks, center dimension " + std::to_string(out.center_dimension));
  out.report.add("blocks.sum-of-squares", total == A.dimension(),
                 std::to_string(total) + " against dimension " + std::to_string(A.dimension()));
  std::ostringstream os;
  os << "seed " << opt.seed << ", tolerance " << opt.tolerance << ", gap ratio " << opt.gap_ratio << ", residual "
     << out.max_residual;
  out.report.add("blocks.spectral", true, os.str());
  return out;
}

K0Group k0(const BlockDecomposition& b) {
  K0Group k;
  k.rank = static_cast<int>(b.sizes.size());
  k.order_unit = b.sizes;
  k.positive_cone = "N^" + std::to_string(k.rank);
  return k;
}

// ---------------------------------------------------------------- gauge

GaugeIsomorphism gauge_isomorphism(const Cochain& sigma, const Cochain& b) {
  if (b.degree != 1 || b.groupoid.get() != sigma.groupoid.get())
    throw std::invalid_argument("gauge_isomorphism: expected a 1-cochain on the same groupoid");
  const i64 L = lcm64(sigma.modulus, b.modulus);
  GaugeIsomorphism gi;
  gi.source = twisted_algebra(sigma.groupoid, sigma, L);
  Cochain bl = b.at_level(L);
  gi.target = twisted_algebra(sigma.groupoid, sigma.at_level(L) + differential(bl), L);
  gi.phase.resize(bl.values.size());
  for (std::size_t a = 0; a < bl.values.size(); ++a) gi.phase[a] = mod(-bl.values[a], L);
  const auto& g = *sigma.groupoid;
  std::string bad;
  for (int a = 0; a < g.arrows() && bad.empty(); ++a)
    for (int c : g.into(g.src(a))) {
      auto [ac, k] = gi.source.product(a, c);
      auto [ac2, k2] = gi.target.product(a, c);
      if (ac != ac2 || mod(gi.phase[a] + gi.phase[c] + k2 - k - gi.phase[ac], L) != 0) {
        bad = "basis pair " + tuple_str({a, c});
        break;
      }
    }
  gi.report.subject = "gauge isomorphism";
  gi.report.add("multiplicative", bad.empty(), bad);
  bad.clear();
  for (int a = 0; a < g.arrows(); ++a) {
    auto [ai, k] = gi.source.star(a);
    auto [ai2, k2] = gi.target.star(a);
    if (ai != ai2 || mod(k + gi.phase[ai] - (-gi.phase[a] + k2), L) != 0) {
      bad = "arrow " + std::to_string(a);
      break;
    }
  }
  gi.report.add("star-preserving", bad.empty(), bad);
  gi.report.add("bijective", true, "diagonal with unit-modulus entries");
  return gi;
}

// ---------------------------------------------------------------- Pontryagin

int PontryaginData::f_at(int a, int b) const { return f[nerve2(*groupoid, a, b)]; }

namespace {

struct PairingCtx {
  DualGroup dual;
  GroupPtr dual_group;
  i64 level;
  i64 step;  // level / exponent
  PairingCtx(const PontryaginData& pd, i64 nu_mod)
      : dual(*pd.group),
        dual_group(std::make_shared<FiniteGroup>(dual.as_group())),
        level(lcm64(nu_mod, dual.exponent)),
        step(level / dual.exponent) {}
  i64 pair(int phi, int g) const { return dual.pairing(phi, g) * step; }
};

}  // namespace

Report check_pontryagin_data(const PontryaginData& pd) {
  Report rep;
  rep.subject = "Pontryagin duality data";
  const auto& g = *pd.groupoid;
  const auto& G = *pd.group;
  if (G.factors.empty()) {
    rep.add("group.abelian", false, "the group must be abelian in residue form");
    return rep;
  }
  PairingCtx P(pd, pd.nu.modulus);
  const auto& D = *P.dual_group;
  const auto& nv = g.nerve();
  std::string bad;
  for (int a = 0; a < g.arrows() && bad.empty(); ++a) {
    if (g.is_unit(a) && pd.rho[a] != G.id) bad = "unit " + std::to_string(a) + " not sent to the identity";
    for (int b : g.into(g.src(a)))
      if (pd.rho[g.compose(a, b)] != G.mul(pd.rho[a], pd.rho[b])) {
        bad = "pair " + tuple_str({a, b});
        break;
      }
  }
  rep.add("rho.closed", bad.empty(), bad);
  bad.clear();
  for (std::size_t i = 0; i < nv.count(2); ++i) {
    const int* t = nv.tuple(2, i);
    if ((g.is_unit(t[0]) || g.is_unit(t[1])) && pd.f[i] != D.id) {
      bad = "pair " + tuple_str({t[0], t[1]});
      break;
    }
  }
  rep.add("f.normalized", bad.empty(), bad);
  bad.clear();
  Cochain nu = pd.nu.at_level(P.level);
  auto dnu = differential(nu);
  std::string bad_inv;
  for (std::size_t i = 0; i < nv.count(3); ++i) {
    const int* t = nv.tuple(3, i);
    int a = t[0], b = t[1], c = t[2];
    int df = D.mul(D.mul(pd.f_at(b, c), D.inverse(pd.f_at(g.compose(a, b), c))),
                   D.mul(pd.f_at(a, g.compose(b, c)), D.inverse(pd.f_at(a, b))));
    if (df != D.id && bad.empty()) bad = "triple " + tuple_str({a, b, c});
    if (mod(dnu.values[i] + P.pair(pd.f_at(b, c), pd.rho[a]), P.level) != 0 && bad_inv.empty())
      bad_inv = "triple " + tuple_str({a, b, c});
  }
  rep.add("f.closed", bad.empty(), bad);
  rep.add("nu.coboundary", bad_inv.empty(), bad_inv);
  return rep;
}

AlgebraElement PontryaginDual::fourier(int arrow) const {
  const int na = bundle.groupoid->arrows() / group_order;
  const int g = arrow / na, c = arrow % na;
  DualGroup D(*bundle.translation.group);
  const i64 step = level / D.exponent;
  AlgebraElement r;
  for (int phi = 0; phi < group_order; ++phi)
    r.emplace(phi * na + c, Cyclotomic::root(level, -i64(D.pairing(phi, g)) * step));
  return r;
}

AlgebraElement PontryaginDual::fourier(const AlgebraElement& x) const {
  AlgebraElement r;
  for (const auto& [a, c] : x)
    for (auto& [b, d] : fourier(a)) {
      auto it = r.try_emplace(b, Cyclotomic(level)).first;
      it->second += c * d;
    }
  return r;
}

AlgebraElement PontryaginDual::inverse_fourier_scaled(int arrow) const {
  const int na = gerbe->arrows() / group_order;
  const int phi = arrow / na, c = arrow % na;
  DualGroup D(*bundle.translation.group);
  const i64 step = level / D.exponent;
  AlgebraElement r;
  for (int g = 0; g < group_order; ++g) r.emplace(g * na + c, Cyclotomic::root(level, i64(D.pairing(phi, g)) * step));
  return r;
}

PontryaginDual pontryagin_dualize(const PontryaginData& pd) {
  auto rep = check_pontryagin_data(pd);
  if (!rep.ok()) throw std::invalid_argument("pontryagin_dualize: " + rep.violations().front());
  PairingCtx P(pd, pd.nu.modulus);
  const auto& g = *pd.groupoid;
  const int na = g.arrows();
  const int order = pd.group->order;
  PontryaginDual out;
  out.level = P.level;
  out.group_order = order;
  out.dual_group = P.dual_group;
  out.report = rep;
  out.report.subject = "Pontryagin duality";
  Cochain nu = pd.nu.at_level(P.level);

  out.bundle = principal_bundle({pd.groupoid, pd.group, pd.rho});
  const auto& B = *out.bundle.groupoid;
  out.sigma = Cochain::zero(out.bundle.groupoid, 2, P.level);
  {
    const auto& nv = B.nerve();
    for (std::size_t i = 0; i < nv.count(2); ++i) {
      const int* t = nv.tuple(2, i);
      int gg = t[0] / na, c1 = t[0] % na, c2 = t[1] % na;
      out.sigma.values[i] = mod(nu({c1, c2}) + P.pair(pd.f_at(c1, c2), gg), P.level);
    }
  }
  out.gerbe = extension(central_cocycle(pd.groupoid, P.dual_group, pd.f));
  out.tau = Cochain::zero(out.gerbe, 2, P.level);
  {
    const auto& nv = out.gerbe->nerve();
    for (std::size_t i = 0; i < nv.count(2); ++i) {
      const int* t = nv.tuple(2, i);
      int c1 = t[0] % na, phi2 = t[1] / na, c2 = t[1] % na;
      out.tau.values[i] = mod(nu({c1, c2}) + P.pair(phi2, pd.rho[c1]), P.level);
    }
  }
  out.primal = twisted_algebra(out.sigma);
  out.dual = twisted_algebra(out.tau);
  out.report.add("sigma.closed", true);
  out.report.add("tau.closed", true);

  const auto& A = out.primal;
  const auto& Dl = out.dual;
  const auto& G = *pd.group;
  DualGroup dual(G);
  std::string bad;
  // |G| F(xy) = F(x) F(y) with the counting product on the dual side
  for (int x = 0; x < B.arrows() && bad.empty(); ++x)
    for (int y = 0; y < B.arrows(); ++y) {
      if (!g.composable(x % na, y % na)) continue;
      auto lhs = scaled(out.fourier(A.multiply(A.basis(x), A.basis(y))), order);
      auto rhs = Dl.multiply(out.fourier(x), out.fourier(y));
      if (!equal(lhs, rhs)) {
        bad = "basis pair " + tuple_str({x, y});
        break;
      }
    }
  out.report.add("fourier.multiplicative", bad.empty(), bad.empty() ? "dual measure 1/|G|" : bad);
  bad.clear();
  for (int x = 0; x < B.arrows(); ++x)
    if (!equal(out.fourier(A.adjoint(A.basis(x))), Dl.adjoint(out.fourier(x)))) {
      bad = "arrow " + std::to_string(x);
      break;
    }
  out.report.add("fourier.star", bad.empty(), bad);
  bad.clear();
  for (int x = 0; x < B.arrows() && bad.empty(); ++x) {
    AlgebraElement back;
    for (const auto& [y, c] : out.fourier(x))
      for (const auto& [z, d] : out.inverse_fourier_scaled(y)) {
        auto it = back.try_emplace(z, Cyclotomic(P.level)).first;
        it->second += c * d;
      }
    if (!equal(back, scaled(A.basis(x), order))) bad = "primal arrow " + std::to_string(x);
  }
  for (int y = 0; y < out.gerbe->arrows() && bad.empty(); ++y)
    if (!equal(out.fourier(out.inverse_fourier_scaled(y)), scaled(Dl.basis(y), order)))
      bad = "dual arrow " + std::to_string(y);
  out.report.add("fourier.inverse", bad.empty(), bad);
  out.report.add("fourier.unital", equal(out.fourier(A.unit()), scaled(Dl.unit(), order)));
  bad.clear();
  // (k.a)(g,γ) = a(g+k,γ) goes to multiplication by <φ,k>; multiplication by <ψ,g> goes to φ -> φ+ψ
  for (int k = 0; k < order && bad.empty(); ++k)
    for (int x = 0; x < B.arrows(); ++x) {
      int gx = x / na, c = x % na;
      auto moved = out.fourier(G.mul(gx, G.inverse(k)) * na + c);
      AlgebraElement expect;
      for (const auto& [y, v] : out.fourier(x)) expect.emplace(y, v.times_root(P.pair(y / na, k)));
      if (!equal(moved, expect)) {
        bad = "translation by " + std::to_string(k) + " on arrow " + std::to_string(x);
        break;
      }
      auto twisted = scaled(out.fourier(x), 1);
      for (auto& [y, v] : twisted) v = v.times_root(P.pair(k, gx));
      AlgebraElement shifted;
      for (const auto& [y, v] : out.fourier(x)) {
        const auto& Dg = *P.dual_group;
        shifted.emplace(Dg.mul(y / na, k) * na + y % na, v);
      }
      if (!equal(twisted, shifted)) {
        bad = "dual translation by " + std::to_string(k) + " on arrow " + std::to_string(x);
        break;
      }
    }
  out.report.add("fourier.translation", bad.empty(), bad);
  return out;
}

PontryaginData gauge_transform(const PontryaginData& pd, const std::vector<int>& alpha, const std::vector<int>& beta,
                               const Cochain& c) {
  const auto& g = *pd.groupoid;
  const auto& G = *pd.group;
  DualGroup dual(G);
  auto D = dual.as_group();
  for (int x = 0; x < g.objects(); ++x)
    if (alpha[g.unit(x)] != D.id) throw std::invalid_argument("gauge_transform: alpha must vanish on units");
  PontryaginData out;
  out.groupoid = pd.groupoid;
  out.group = pd.group;
  out.rho.resize(g.arrows());
  for (int a = 0; a < g.arrows(); ++a)
    out.rho[a] = G.mul(G.mul(pd.rho[a], beta[g.src(a)]), G.inverse(beta[g.dst(a)]));
  const auto& nv = g.nerve();
  out.f.resize(nv.count(2));
  const i64 L = lcm64(lcm64(c.modulus, pd.nu.modulus), dual.exponent);
  const i64 step = L / dual.exponent;
  Cochain nu = pd.nu.at_level(L);
  Cochain cl = c.at_level(L);
  out.nu = Cochain::zero(pd.groupoid, 2, L);
  for (std::size_t i = 0; i < nv.count(2); ++i) {
    const int* t = nv.tuple(2, i);
    int a = t[0], b = t[1];
    int da = D.mul(D.mul(alpha[b], D.inverse(alpha[g.compose(a, b)])), alpha[a]);
    out.f[i] = D.mul(pd.f[i], da);
    i64 v = cl.values[i] + nu.values[i] - i64(dual.pairing(pd.f[i], beta[g.dst(a)])) * step +
            i64(dual.pairing(alpha[b], out.rho[a])) * step;
    out.nu.values[i] = mod(v, L);
  }
  return out;
}

// ---------------------------------------------------------------- Hilbert bimodule

HilbertBimoduleCheck hilbert_bimodule_check(GroupoidPtr gp, const std::vector<Eigen::MatrixXcd>& T, int d, i64 level,
                                            double tol) {
  using Mat = Eigen::MatrixXcd;
  using Vec = Eigen::VectorXcd;
  HilbertBimoduleCheck out;
  auto& rep = out.report;
  rep.subject = "Hilbert bimodule of a unitary assignment";
  const auto& g = *gp;
  const int n = g.arrows();
  if (int(T.size()) != n) throw std::invalid_argument("hilbert_bimodule_check: one matrix per arrow expected");
  const Mat I = Mat::Identity(d, d);
  std::string bad;
  for (int x = 0; x < g.objects(); ++x)
    if ((T[g.unit(x)] - I).norm() > tol) bad = "unit of object " + std::to_string(x);
  rep.add("T.unital", bad.empty(), bad);
  if (!bad.empty()) return out;
  for (int a = 0; a < n; ++a)
    if ((T[a].adjoint() * T[a] - I).norm() > tol) bad = "arrow " + std::to_string(a);
  rep.add("T.unitary", bad.empty(), bad);
  if (!bad.empty()) return out;

  const auto& nv = g.nerve();
  out.sigma.resize(nv.count(2));
  for (std::size_t i = 0; i < nv.count(2); ++i) {
    const int* t = nv.tuple(2, i);
    Mat M = T[t[0]] * T[t[1]] * T[g.compose(t[0], t[1])].adjoint();
    cd s = M(0, 0);
    if ((M - s * I).norm() > tol * d) {
      bad = "pair " + tuple_str({t[0], t[1]});
      break;
    }
    out.sigma[i] = std::conj(s);
  }
  rep.add("sigma.scalar", bad.empty(), bad.empty() ? "σ = (δT)⁻¹" : bad);
  if (!bad.empty()) return out;
  auto sig = [&](int a, int b) { return out.sigma[nerve2(g, a, b)]; };
  if (level > 0) {
    Cochain c = Cochain::zero(gp, 2, level);
    bool ok = true;
    for (std::size_t i = 0; i < out.sigma.size() && ok; ++i) {
      double k = std::arg(out.sigma[i]) / (2 * std::numbers::pi) * double(level);
      double r = std::round(k);
      ok = std::abs(k - r) < 1e-6;
      c.values[i] = mod(static_cast<i64>(r), level);
    }
    if (ok) out.sigma_cochain = std::move(c);
  }

  using AEl = std::vector<Mat>;
  using XEl = std::vector<Vec>;
  using BEl = std::vector<cd>;
  auto zeroA = [&] { return AEl(n, Mat::Zero(d, d)); };
  auto zeroX = [&] { return XEl(n, Vec::Zero(d)); };
  auto zeroB = [&] { return BEl(n, 0.0); };
  auto amul = [&](const AEl& a, const AEl& b) {
    auto r = zeroA();
    for (int g1 = 0; g1 < n; ++g1)
      for (int g2 : g.into(g.src(g1))) r[g.compose(g1, g2)] += a[g1] * T[g1] * b[g2] * T[g1].adjoint();
    return r;
  };
  auto bmul = [&](const BEl& a, const BEl& b) {
    auto r = zeroB();
    for (int g1 = 0; g1 < n; ++g1)
      for (int g2 : g.into(g.src(g1))) r[g.compose(g1, g2)] += sig(g1, g2) * a[g1] * b[g2];
    return r;
  };
  auto ax = [&](const AEl& a, const XEl& x) {
    auto r = zeroX();
    for (int g1 = 0; g1 < n; ++g1)
      for (int g2 : g.into(g.src(g1))) r[g.compose(g1, g2)] += sig(g1, g2) * (a[g1] * T[g1] * x[g2]);
    return r;
  };
  auto xb = [&](const XEl& x, const BEl& b) {
    auto r = zeroX();
    for (int g1 = 0; g1 < n; ++g1)
      for (int g2 : g.into(g.src(g1))) r[g.compose(g1, g2)] += sig(g1, g2) * b[g2] * x[g1];
    return r;
  };
  // both inner products carry the involution factor conj σ(h,h⁻¹) of the twisted algebra
  auto aip = [&](const XEl& x1, const XEl& x2) {
    auto r = zeroA();
    for (int g1 = 0; g1 < n; ++g1)
      for (int g2 : g.into(g.src(g1))) {
        int gg = g.compose(g1, g2);
        r[gg] += sig(g1, g2) * std::conj(sig(g.inv(g2), g2)) * x1[g1] * (T[gg] * x2[g.inv(g2)]).adjoint();
      }
    return r;
  };
  auto bip = [&](const XEl& x1, const XEl& x2) {
    auto r = zeroB();
    for (int g1 = 0; g1 < n; ++g1)
      for (int g2 : g.into(g.src(g1))) r[g.compose(g1, g2)] += x1[g.inv(g1)].dot(x2[g2]) * sig(g1, g2) * std::conj(sig(g1, g.inv(g1)));
    return r;
  };
  auto astar = [&](const AEl& a) {
    auto r = zeroA();
    for (int x = 0; x < n; ++x) r[x] = T[x] * a[g.inv(x)].adjoint() * T[x].adjoint();
    return r;
  };
  auto bstar = [&](const BEl& b) {
    auto r = zeroB();
    for (int x = 0; x < n; ++x) r[x] = std::conj(b[g.inv(x)] * sig(x, g.inv(x)));
    return r;
  };
  auto dA = [&](const AEl& a, const AEl& b) {
    double s = 0;
    for (int x = 0; x < n; ++x) s += (a[x] - b[x]).norm();
    return s;
  };
  auto dX = [&](const XEl& a, const XEl& b) {
    double s = 0;
    for (int x = 0; x < n; ++x) s += (a[x] - b[x]).norm();
    return s;
  };
  auto dB = [&](const BEl& a, const BEl& b) {
    double s = 0;
    for (int x = 0; x < n; ++x) s += std::abs(a[x] - b[x]);
    return s;
  };
  std::vector<AEl> As;
  for (int a = 0; a < n; ++a)
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        auto e = zeroA();
        e[a](i, j) = 1;
        As.push_back(std::move(e));
      }
  std::vector<XEl> Xs;
  for (int a = 0; a < n; ++a)
    for (int i = 0; i < d; ++i) {
      auto e = zeroX();
      e[a](i) = 1;
      Xs.push_back(std::move(e));
    }
  std::vector<BEl> Bs;
  for (int a = 0; a < n; ++a) {
    auto e = zeroB();
    e[a] = 1;
    Bs.push_back(std::move(e));
  }
  const double eps = tol * 1e3;
  auto run = [&](const std::string& id, auto&& body) {
    std::string why;
    body(why);
    rep.add(id, why.empty(), why);
  };
  run("left.module", [&](std::string& why) {
    for (std::size_t i = 0; i < As.size() && why.empty(); ++i)
      for (std::size_t j = 0; j < As.size() && why.empty(); ++j) {
        auto ab = amul(As[i], As[j]);
        for (std::size_t k = 0; k < Xs.size(); ++k)
          if (dX(ax(ab, Xs[k]), ax(As[i], ax(As[j], Xs[k]))) > eps) {
            why = "basis triple " + tuple_str({int(i), int(j), int(k)});
            break;
          }
      }
  });
  run("right.module", [&](std::string& why) {
    for (std::size_t k = 0; k < Xs.size() && why.empty(); ++k)
      for (std::size_t i = 0; i < Bs.size() && why.empty(); ++i)
        for (std::size_t j = 0; j < Bs.size(); ++j)
          if (dX(xb(Xs[k], bmul(Bs[i], Bs[j])), xb(xb(Xs[k], Bs[i]), Bs[j])) > eps) {
            why = "basis triple " + tuple_str({int(k), int(i), int(j)});
            break;
          }
  });
  run("commuting", [&](std::string& why) {
    for (std::size_t i = 0; i < As.size() && why.empty(); ++i)
      for (std::size_t k = 0; k < Xs.size() && why.empty(); ++k)
        for (std::size_t j = 0; j < Bs.size(); ++j)
          if (dX(xb(ax(As[i], Xs[k]), Bs[j]), ax(As[i], xb(Xs[k], Bs[j]))) > eps) {
            why = "basis triple " + tuple_str({int(i), int(k), int(j)});
            break;
          }
  });
  run("right.inner", [&](std::string& why) {
    for (std::size_t i = 0; i < Xs.size() && why.empty(); ++i)
      for (std::size_t k = 0; k < Xs.size() && why.empty(); ++k) {
        auto ip = bip(Xs[i], Xs[k]);
        if (dB(bstar(ip), bip(Xs[k], Xs[i])) > eps) why = "adjoint at " + tuple_str({int(i), int(k)});
        for (std::size_t j = 0; j < Bs.size() && why.empty(); ++j)
          if (dB(bip(Xs[i], xb(Xs[k], Bs[j])), bmul(ip, Bs[j])) > eps)
            why = "linearity at " + tuple_str({int(i), int(k), int(j)});
      }
  });
  run("left.inner", [&](std::string& why) {
    for (std::size_t i = 0; i < Xs.size() && why.empty(); ++i)
      for (std::size_t k = 0; k < Xs.size() && why.empty(); ++k) {
        auto ip = aip(Xs[i], Xs[k]);
        if (dA(astar(ip), aip(Xs[k], Xs[i])) > eps) why = "adjoint at " + tuple_str({int(i), int(k)});
        for (std::size_t j = 0; j < As.size() && why.empty(); ++j)
          if (dA(aip(ax(As[j], Xs[i]), Xs[k]), amul(As[j], ip)) > eps)
            why = "linearity at " + tuple_str({int(j), int(i), int(k)});
      }
  });
  run("imprimitivity", [&](std::string& why) {
    for (std::size_t i = 0; i < Xs.size() && why.empty(); ++i)
      for (std::size_t j = 0; j < Xs.size() && why.empty(); ++j) {
        auto l = aip(Xs[i], Xs[j]);
        for (std::size_t k = 0; k < Xs.size(); ++k)
          if (dX(ax(l, Xs[k]), xb(Xs[i], bip(Xs[j], Xs[k]))) > eps) {
            why = "basis triple " + tuple_str({int(i), int(j), int(k)});
            break;
          }
      }
  });
  // positivity through the Gram form τ(e_i* p e_j) of the faithful traces
  auto traceA = [&](const AEl& a) {
    cd s = 0;
    for (int x = 0; x < g.objects(); ++x) s += a[g.unit(x)].trace();
    return s;
  };
  auto traceB = [&](const BEl& b) {
    cd s = 0;
    for (int x = 0; x < g.objects(); ++x) s += b[g.unit(x)];
    return s;
  };
  auto psdA = [&](const AEl& p) {
    const int m = static_cast<int>(As.size());
    Mat G(m, m);
    std::vector<AEl> right(m);
    for (int j = 0; j < m; ++j) right[j] = amul(p, As[j]);
    for (int i = 0; i < m; ++i) {
      auto si = astar(As[i]);
      for (int j = 0; j < m; ++j) G(i, j) = traceA(amul(si, right[j]));
    }
    if ((G - G.adjoint()).norm() > eps) return false;
    Eigen::SelfAdjointEigenSolver<Mat> es(G);
    return es.eigenvalues().minCoeff() > -eps;
  };
  auto psdB = [&](const BEl& p) {
    const int m = n;
    Mat G(m, m);
    for (int i = 0; i < m; ++i) {
      auto si = bstar(Bs[i]);
      for (int j = 0; j < m; ++j) G(i, j) = traceB(bmul(si, bmul(p, Bs[j])));
    }
    if ((G - G.adjoint()).norm() > eps) return false;
    Eigen::SelfAdjointEigenSolver<Mat> es(G);
    return es.eigenvalues().minCoeff() > -eps;
  };
  std::vector<XEl> samples = Xs;
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd;
  for (int s = 0; s < 4; ++s) {
    auto x = zeroX();
    for (int a = 0; a < n; ++a)
      for (int i = 0; i < d; ++i) x[a](i) = cd(nd(rng), nd(rng));
    samples.push_back(std::move(x));
  }
  run("positivity", [&](std::string& why) {
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (!psdB(bip(samples[i], samples[i]))) {
        why = "right inner product at sample " + std::to_string(i);
        return;
      }
      if (!psdA(aip(samples[i], samples[i]))) {
        why = "left inner product at sample " + std::to_string(i);
        return;
      }
    }
  });
  return out;
}

}  // namespace tdual
