#include "tdual/cohomology.hpp"

#include <algorithm>
#include <functional>
#include <stdexcept>

namespace tdual {

i64 isotropy_exponent(const FiniteGroupoid& g) {
  i64 e = 1;
  for (int x = 0; x < g.objects(); ++x) e = lcm64(e, static_cast<i64>(isotropy(g, x).size()));
  return e;
}

namespace {

i64 mulq(i64 a, i64 b, i64 q) { return static_cast<i64>((static_cast<__int128>(a) * b) % q); }

// Normalized differential C^k -> C^{k+1} on nondegenerate coordinates.
ModMatrix diff_matrix(const FiniteGroupoid& g, int k, i64 q, const std::vector<std::size_t>& cols,
                      const std::vector<std::size_t>& rows) {
  const auto& nv = g.nerve();
  std::vector<int> pos(nv.count(k), -1);
  for (std::size_t j = 0; j < cols.size(); ++j) pos[cols[j]] = static_cast<int>(j);
  ModMatrix M(static_cast<int>(rows.size()), static_cast<int>(cols.size()), q);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const int* t = nv.tuple(k + 1, rows[i]);
    detail::bar_faces(g, k, t, [&](const int* f, int sign) {
      int j = pos[nv.index(k, f)];
      if (j >= 0) M.at(static_cast<int>(i), j) = mod(M.at(static_cast<int>(i), j) + sign, q);
    });
  }
  return M;
}

// H^n(g; Z/p^a) with explicit coordinates.
struct LocalCohomology {
  i64 p = 2;
  int a = 1;
  i64 q = 2;
  std::vector<std::size_t> cols;  // nondegenerate n-tuples
  LocalSmith sn;                  // Smith form of D_n
  std::vector<int> keep, kexp;    // kernel components and their exponents
  LocalSmith pres;                // Smith form of the presentation of H
  std::vector<int> gens, gexp;    // class generators (rows of pres) and exponents

  std::vector<i64> kernel_coords(const std::vector<i64>& x) const {
    auto y = sn.Vinv.apply(x);
    std::vector<i64> z(keep.size());
    for (std::size_t t = 0; t < keep.size(); ++t) {
      int i = keep[t];
      if (i < sn.rank) {
        i64 d = ipow(p, a - sn.val[i]);
        if (y[i] % d) throw std::invalid_argument("cochain is not closed");
        z[t] = y[i] / d;
      } else {
        z[t] = y[i];
      }
    }
    for (int i = 0; i < sn.rank; ++i)
      if (sn.val[i] == 0 && y[i] % q) throw std::invalid_argument("cochain is not closed");
    return z;
  }
  std::vector<i64> cochain_coords(const std::vector<i64>& z) const {
    std::vector<i64> y(cols.size(), 0);
    for (std::size_t t = 0; t < keep.size(); ++t) {
      int i = keep[t];
      y[i] = i < sn.rank ? mulq(mod(z[t], q), ipow(p, a - sn.val[i]), q) : mod(z[t], q);
    }
    return sn.V.apply(y);
  }
  std::vector<i64> class_coords(const std::vector<i64>& z) const {
    std::vector<i64> out(gens.size());
    if (z.empty()) return out;
    auto u = pres.U.apply(z);
    for (std::size_t t = 0; t < gens.size(); ++t) out[t] = mod(u[gens[t]], ipow(p, gexp[t]));
    return out;
  }
  std::vector<i64> generator(std::size_t t) const {
    std::vector<i64> z(keep.size());
    for (std::size_t i = 0; i < keep.size(); ++i) z[i] = pres.Uinv.at(static_cast<int>(i), gens[t]);
    return cochain_coords(z);
  }
};

LocalCohomology local_cohomology(const FiniteGroupoid& g, int n, i64 p, int a) {
  LocalCohomology L;
  L.p = p;
  L.a = a;
  L.q = ipow(p, a);
  L.cols = nondegenerate(g, n);
  auto rows = nondegenerate(g, n + 1);
  ModMatrix Dn = diff_matrix(g, n, L.q, L.cols, rows);
  L.sn = local_smith(Dn, p, a, false, true);
  for (int i = 0; i < static_cast<int>(L.cols.size()); ++i) {
    int e = i < L.sn.rank ? L.sn.val[i] : a;
    if (e > 0) {
      L.keep.push_back(i);
      L.kexp.push_back(e);
    }
  }
  const int m = static_cast<int>(L.keep.size());
  std::vector<std::vector<i64>> bcols;
  if (n >= 1) {
    auto prev = nondegenerate(g, n - 1);
    ModMatrix Dp = diff_matrix(g, n - 1, L.q, prev, L.cols);
    for (int c = 0; c < Dp.cols; ++c) {
      std::vector<i64> x(Dp.rows);
      for (int r = 0; r < Dp.rows; ++r) x[r] = Dp.at(r, c);
      bcols.push_back(L.kernel_coords(x));
    }
  }
  ModMatrix P(m, static_cast<int>(bcols.size()) + m, L.q);
  for (std::size_t c = 0; c < bcols.size(); ++c)
    for (int r = 0; r < m; ++r) P.at(r, static_cast<int>(c)) = bcols[c][r];
  for (int r = 0; r < m; ++r) P.at(r, static_cast<int>(bcols.size()) + r) = ipow(p, L.kexp[r]) % L.q;
  L.pres = local_smith(P, p, a, true, false);
  for (int j = 0; j < m; ++j) {
    int e = j < L.pres.rank ? L.pres.val[j] : a;
    if (e > 0) {
      L.gens.push_back(j);
      L.gexp.push_back(e);
    }
  }
  return L;
}

// A p-primary part: generators with exponents and a coordinate map.
struct PrimePart {
  i64 p = 2;
  std::vector<int> exps;
  std::vector<std::vector<i64>> gen_values;  // values already at the output modulus
  std::function<std::vector<i64>(const Cochain&)> coords;
};

void assemble(CohomologyGroup& H, std::vector<PrimePart> parts, i64 out_modulus, bool torus, GroupoidPtr g) {
  // order each part by decreasing exponent
  std::size_t k = 0;
  for (auto& pp : parts) {
    std::vector<std::size_t> ord(pp.exps.size());
    for (std::size_t i = 0; i < ord.size(); ++i) ord[i] = i;
    std::stable_sort(ord.begin(), ord.end(), [&](std::size_t x, std::size_t y) { return pp.exps[x] > pp.exps[y]; });
    std::vector<int> e2;
    std::vector<std::vector<i64>> v2;
    for (auto i : ord) {
      e2.push_back(pp.exps[i]);
      v2.push_back(pp.gen_values[i]);
    }
    auto inner = pp.coords;
    pp.coords = [inner, ord](const Cochain& c) {
      auto r = inner(c);
      std::vector<i64> o;
      for (auto i : ord) o.push_back(r[i]);
      return o;
    };
    pp.exps = e2;
    pp.gen_values = v2;
    k = std::max(k, pp.exps.size());
  }
  // factor t (largest first) combines the t-th generator of every prime
  std::vector<i64> dec(k, 1);
  std::vector<Cochain> reps(k, Cochain::zero(g, H.degree, out_modulus, torus));
  for (const auto& pp : parts)
    for (std::size_t t = 0; t < pp.exps.size(); ++t) {
      dec[t] *= ipow(pp.p, pp.exps[t]);
      for (std::size_t i = 0; i < reps[t].values.size(); ++i)
        reps[t].values[i] = (reps[t].values[i] + pp.gen_values[t][i]) % out_modulus;
    }
  H.invariant_factors.assign(dec.rbegin(), dec.rend());
  H.representatives.assign(reps.rbegin(), reps.rend());
  auto shared_parts = std::make_shared<std::vector<PrimePart>>(std::move(parts));
  auto factors = H.invariant_factors;
  // coordinates: CRT over the primes of each factor
  auto fn = [shared_parts, factors, k](const Cochain& c) {
    std::vector<i64> out(k, 0);
    for (const auto& pp : *shared_parts) {
      auto r = pp.coords(c);
      for (std::size_t t = 0; t < r.size(); ++t) {
        std::size_t slot = k - 1 - t;
        i64 d = factors[slot];
        i64 qp = ipow(pp.p, pp.exps[t]);
        i64 cof = d / qp;
        i64 e = mulq(cof, inv_mod(cof % qp, qp), d);
        out[slot] = (out[slot] + mulq(mod(r[t], qp), e, d)) % d;
      }
    }
    return out;
  };
  H.class_fn = fn;
}

}  // namespace

i64 CohomologyGroup::order() const {
  i64 o = 1;
  for (i64 d : invariant_factors) o *= d;
  return o;
}

std::vector<i64> CohomologyGroup::class_of(const Cochain& c) const {
  if (!class_fn) throw std::logic_error("class_of: no coordinate data (several coefficient factors)");
  return class_fn(c);
}

CohomologyGroup cohomology_group(GroupoidPtr gp, int n, const Coefficient& coeff) {
  if (n < 0) throw std::invalid_argument("cohomology_group: negative degree");
  const auto& g = *gp;
  CohomologyGroup H;
  H.degree = n;
  H.coeff = coeff;
  if (coeff.kind == Coefficient::Kind::FiniteAbelian) {
    if (coeff.factors.empty()) throw std::invalid_argument("cohomology_group: no coefficient factors");
    if (coeff.factors.size() > 1) {
      for (i64 f : coeff.factors) {
        auto part = cohomology_group(gp, n, Coefficient::cyclic(f));
        H.components.push_back(part);
      }
      std::vector<std::pair<i64, int>> pe;  // all prime powers
      for (const auto& c : H.components)
        for (i64 d : c.invariant_factors)
          for (auto [p, e] : factorize(d)) pe.push_back({p, e});
      // merge prime powers into invariant factors
      std::vector<i64> primes;
      for (auto [p, e] : pe)
        if (std::find(primes.begin(), primes.end(), p) == primes.end()) primes.push_back(p);
      std::vector<std::vector<int>> per(primes.size());
      for (auto [p, e] : pe) per[std::find(primes.begin(), primes.end(), p) - primes.begin()].push_back(e);
      std::size_t k = 0;
      for (auto& v : per) {
        std::sort(v.rbegin(), v.rend());
        k = std::max(k, v.size());
      }
      std::vector<i64> dec(k, 1);
      for (std::size_t i = 0; i < primes.size(); ++i)
        for (std::size_t t = 0; t < per[i].size(); ++t) dec[t] *= ipow(primes[i], per[i][t]);
      H.invariant_factors.assign(dec.rbegin(), dec.rend());
      for (const auto& c : H.components)
        for (const auto& r : c.representatives) H.representatives.push_back(r);
      H.working_modulus = 0;
      return H;
    }
    const i64 M = coeff.factors[0];
    if (M < 1) throw std::invalid_argument("cohomology_group: coefficient order must be positive");
    H.working_modulus = M;
    std::vector<PrimePart> parts;
    for (auto [p, a] : factorize(M)) {
      auto L = std::make_shared<LocalCohomology>(local_cohomology(g, n, p, a));
      PrimePart pp;
      pp.p = p;
      const i64 q = L->q;
      const i64 cof = M / q;
      const i64 idem = mulq(cof, inv_mod(cof % q, q), M);
      for (std::size_t t = 0; t < L->gens.size(); ++t) {
        pp.exps.push_back(L->gexp[t]);
        auto x = L->generator(t);
        std::vector<i64> vals(g.nerve().count(n), 0);
        for (std::size_t j = 0; j < L->cols.size(); ++j) vals[L->cols[j]] = mulq(x[j], idem, M);
        pp.gen_values.push_back(vals);
      }
      pp.coords = [L, M](const Cochain& c) {
        if (c.modulus != M) throw std::invalid_argument("class_of: modulus mismatch");
        std::vector<i64> x(L->cols.size());
        for (std::size_t j = 0; j < L->cols.size(); ++j) x[j] = mod(c.values[L->cols[j]], L->q);
        return L->class_coords(L->kernel_coords(x));
      };
      parts.push_back(std::move(pp));
    }
    assemble(H, std::move(parts), M, false, gp);
    return H;
  }

  if (coeff.level <= 0) throw std::invalid_argument("cohomology_group: torus level must be positive");
  const i64 Lv = coeff.level;
  const i64 e = isotropy_exponent(g);
  const i64 W = Lv * e;
  H.working_modulus = W;
  std::vector<PrimePart> parts;
  for (auto [p, a] : factorize(W)) {
    int b = 0;
    for (i64 t = Lv; t % p == 0; t /= p) ++b;
    if (b == 0) continue;
    auto A = std::make_shared<LocalCohomology>(local_cohomology(g, n, p, a));
    const i64 q = A->q;
    const i64 qb = ipow(p, b);
    // cocycles mod p^b
    auto rows = nondegenerate(g, n + 1);
    ModMatrix Db = diff_matrix(g, n, qb, A->cols, rows);
    auto sb = local_smith(Db, p, b, false, true);
    std::vector<std::vector<i64>> kgens;
    for (int i = 0; i < static_cast<int>(A->cols.size()); ++i) {
      int v = i < sb.rank ? sb.val[i] : b;
      if (v == 0) continue;
      i64 scale = i < sb.rank ? ipow(p, b - v) : 1;
      std::vector<i64> x(A->cols.size());
      for (std::size_t r = 0; r < x.size(); ++r) x[r] = mulq(sb.V.at(static_cast<int>(r), i), scale, qb);
      kgens.push_back(x);
    }
    const int s = static_cast<int>(kgens.size());
    const int J = static_cast<int>(A->gens.size());
    std::vector<std::vector<i64>> img(s);
    for (int l = 0; l < s; ++l) {
      std::vector<i64> x(A->cols.size());
      for (std::size_t r = 0; r < x.size(); ++r) x[r] = mulq(kgens[l][r], ipow(p, a - b), q);
      img[l] = A->class_coords(A->kernel_coords(x));
    }
    // relations among the images: kernel of [img | diag p^{gexp}]
    ModMatrix Pp(J, s + J, q);
    for (int l = 0; l < s; ++l)
      for (int j = 0; j < J; ++j) Pp.at(j, l) = img[l][j];
    for (int j = 0; j < J; ++j) Pp.at(j, s + j) = ipow(p, A->gexp[j]) % q;
    auto sp = local_smith(Pp, p, a, false, true);
    std::vector<std::vector<i64>> rels;
    for (int i = 0; i < s + J; ++i) {
      int v = i < sp.rank ? sp.val[i] : 0;
      if (i < sp.rank && v == 0) continue;
      i64 scale = i < sp.rank ? ipow(p, a - v) : 1;
      std::vector<i64> r(s);
      for (int l = 0; l < s; ++l) r[l] = mulq(sp.V.at(l, i), scale, q);
      rels.push_back(r);
    }
    ModMatrix K(s, static_cast<int>(rels.size()) + s, q);
    for (std::size_t c = 0; c < rels.size(); ++c)
      for (int l = 0; l < s; ++l) K.at(l, static_cast<int>(c)) = rels[c][l];
    for (int l = 0; l < s; ++l) K.at(l, static_cast<int>(rels.size()) + l) = ipow(p, b) % q;
    auto sk = local_smith(K, p, a, true, false);
    PrimePart pp;
    pp.p = p;
    std::vector<std::vector<i64>> gen_img;  // class coords in A of each S generator
    std::vector<int> gen_exp;
    for (int l = 0; l < s; ++l) {
      int ex = l < sk.rank ? sk.val[l] : a;
      if (ex == 0) continue;
      std::vector<i64> coef(s);
      for (int i = 0; i < s; ++i) coef[i] = sk.Uinv.at(i, l);
      std::vector<i64> vals(g.nerve().count(n), 0);
      std::vector<i64> ai(J, 0);
      for (int i = 0; i < s; ++i) {
        if (!coef[i]) continue;
        for (std::size_t r = 0; r < A->cols.size(); ++r)
          vals[A->cols[r]] = (vals[A->cols[r]] + mulq(coef[i] % qb, kgens[i][r], qb)) % qb;
        for (int j = 0; j < J; ++j) ai[j] = (ai[j] + mulq(coef[i], img[i][j], q)) % q;
      }
      for (auto& v : vals) v = mulq(v, Lv / qb, Lv);  // torus value v / p^b at level L
      pp.exps.push_back(ex);
      pp.gen_values.push_back(vals);
      gen_img.push_back(ai);
      gen_exp.push_back(ex);
    }
    auto Aptr = A;
    auto gexpA = A->gexp;
    pp.coords = [Aptr, gen_img, gen_exp, gexpA, W, p, a](const Cochain& c) {
      if (W % c.modulus) throw std::invalid_argument("class_of: cochain level does not divide the working modulus");
      const i64 q = Aptr->q;
      std::vector<i64> x(Aptr->cols.size());
      for (std::size_t r = 0; r < x.size(); ++r) x[r] = mod(mulq(c.values[Aptr->cols[r]], W / c.modulus, W), q);
      auto v = Aptr->class_coords(Aptr->kernel_coords(x));
      ModLinearSystem sys(q, static_cast<int>(gen_img.size()));
      for (std::size_t j = 0; j < v.size(); ++j) {
        i64 sc = ipow(p, a - gexpA[j]);
        std::vector<std::pair<int, i64>> row;
        for (std::size_t l = 0; l < gen_img.size(); ++l) row.emplace_back(static_cast<int>(l), mulq(gen_img[l][j], sc, q));
        sys.add_equation(row, mulq(v[j], sc, q));
      }
      auto sol = sys.solve();
      if (!sol) throw std::invalid_argument("class_of: cochain is not a torus cocycle at this level");
      std::vector<i64> out(gen_img.size());
      for (std::size_t l = 0; l < out.size(); ++l) out[l] = mod((*sol)[l], ipow(p, gen_exp[l]));
      return out;
    };
    parts.push_back(std::move(pp));
  }
  assemble(H, std::move(parts), Lv, true, gp);
  return H;
}

std::optional<Cochain> torus_coboundary_witness(const Cochain& c) {
  const i64 W = c.modulus * isotropy_exponent(*c.groupoid);
  return coboundary_witness(c.at_level(W));
}

}  // namespace tdual
