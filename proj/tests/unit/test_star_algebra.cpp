#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <set>

#include "doctest.h"
#include "support.hpp"
#include "tdual/cover.hpp"
#include "tdual/morita.hpp"
#include "tdual/star_algebra.hpp"

using namespace tdual;

namespace {

Cochain cochain_from(GroupoidPtr g, i64 level, const std::function<i64(int, int)>& fn) {
  auto c = Cochain::zero(g, 2, level);
  const auto& nv = g->nerve();
  for (std::size_t i = 0; i < nv.count(2); ++i) {
    const int* t = nv.tuple(2, i);
    c.values[i] = mod(fn(t[0], t[1]), level);
  }
  return c;
}

GroupPtr shared(FiniteGroup g) { return std::make_shared<FiniteGroup>(std::move(g)); }

// Heisenberg cocycle on (Z/2)^2 at level 2: σ((a,b),(c,d)) = bc/2.
Cochain heisenberg(GroupoidPtr kg, const FiniteGroup& K) {
  return cochain_from(kg, 2, [&](int x, int y) { return K.residues(x)[1] * K.residues(y)[0]; });
}

// For an abelian group with twist σ: the σ-regular elements (σ(g,h) = σ(h,g) for all h)
// count the blocks, and all blocks share one size.
std::vector<int> abelian_twisted_blocks_oracle(const FiniteGroup& G, const Cochain& s) {
  int regular = 0;
  for (int g = 0; g < G.order; ++g) {
    bool ok = true;
    for (int h = 0; h < G.order && ok; ++h) ok = s({g, h}) == s({h, g});
    regular += ok;
  }
  int size = static_cast<int>(std::lround(std::sqrt(double(G.order) / regular)));
  return std::vector<int>(regular, size);
}

// Character-count oracle for a group with all nonlinear irreducibles of one degree.
std::vector<int> group_blocks_oracle(const FiniteGroup& G) {
  std::set<int> comm{G.id};
  for (int a = 0; a < G.order; ++a)
    for (int b = 0; b < G.order; ++b) comm.insert(G.mul(G.mul(a, b), G.mul(G.inverse(a), G.inverse(b))));
  // close under products
  bool grew = true;
  while (grew) {
    grew = false;
    for (int a : std::vector<int>(comm.begin(), comm.end()))
      for (int b : std::vector<int>(comm.begin(), comm.end())) grew |= comm.insert(G.mul(a, b)).second;
  }
  int linear = G.order / static_cast<int>(comm.size());
  std::set<std::set<int>> classes;
  for (int g = 0; g < G.order; ++g) {
    std::set<int> c;
    for (int h = 0; h < G.order; ++h) c.insert(G.conj(h, g));
    classes.insert(c);
  }
  int rest = static_cast<int>(classes.size()) - linear;
  std::vector<int> out(linear, 1);
  if (rest > 0) {
    int deg = static_cast<int>(std::lround(std::sqrt(double(G.order - linear) / rest)));
    out.insert(out.end(), rest, deg);
  }
  return out;
}

std::vector<int> blocks(const StarAlgebra& a, bool reduce = true) {
  BlockOptions o;
  o.reduce = reduce;
  auto b = block_decomposition(a, o);
  CHECK(b.report.ok());
  return b.sizes;
}

}  // namespace

TEST_CASE("cyclotomic arithmetic") {
  // 1 + ζ3 + ζ3² = 0, ζ4² = -1, ζ8 + ζ8³ = i√2 has square -2
  auto s = Cyclotomic::root(3, 0) + Cyclotomic::root(3, 1) + Cyclotomic::root(3, 2);
  CHECK(s.is_zero());
  CHECK(Cyclotomic::root(4, 2) == Cyclotomic::root(4, 0, -1));
  auto r = Cyclotomic::root(8, 1) + Cyclotomic::root(8, 3);
  CHECK(r * r == Cyclotomic::root(8, 0, -2));
  CHECK(std::abs(r.value() - std::complex<double>(0, std::sqrt(2.0))) < 1e-12);
  CHECK_FALSE(Cyclotomic::root(12, 1).is_zero());
  CHECK(cyclotomic_polynomial(12) == std::vector<i64>{1, 0, -1, 0, 1});
  CHECK(Cyclotomic::root(5, 2).conj() == Cyclotomic::root(5, 3));
}

TEST_CASE("point and matrix-unit algebras") {
  auto p = untwisted_algebra(point_groupoid());
  CHECK(p.dimension() == 1);
  CHECK(blocks(p) == std::vector<int>{1});

  for (int n = 1; n <= 4; ++n) {
    auto g = pair_groupoid(n);
    auto a = untwisted_algebra(g);
    CHECK(check_star_algebra(a).ok());
    // e_ij e_jk = e_ik and e_ij e_lk = 0 for j != l, with e_ij at index i*n+j
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l)
          for (int k = 0; k < n; ++k) {
            auto [prod, ph] = a.product(i * n + j, l * n + k);
            if (j == l) {
              CHECK(prod == i * n + k);
              CHECK(ph == 0);
            } else {
              CHECK(prod == -1);
            }
          }
    CHECK(blocks(a) == std::vector<int>{n});
    CHECK(blocks(a, false) == std::vector<int>{n});
    CHECK(k0(block_decomposition(a)).rank == 1);
  }
}

TEST_CASE("Heisenberg twist on the Klein group") {
  auto K = FiniteGroup::abelian({2, 2});
  auto kg = group_groupoid(K);
  auto s = heisenberg(kg, K);
  auto a = twisted_algebra(s);
  CHECK(a.dimension() == 4);
  CHECK(check_star_algebra(a).ok());
  int x = K.from_residues({1, 0}), y = K.from_residues({0, 1});
  CHECK(equal(a.multiply(a.basis(x), a.basis(y)), scaled(a.multiply(a.basis(y), a.basis(x)), -1)));

  auto tw = block_decomposition(a);
  CHECK(tw.sizes == abelian_twisted_blocks_oracle(K, s));
  CHECK(tw.sizes == std::vector<int>{2});
  auto kt = k0(tw);
  CHECK(kt.rank == 1);
  CHECK(kt.order_unit == std::vector<int>{2});

  auto un = block_decomposition(untwisted_algebra(kg));
  CHECK(un.sizes == std::vector<int>{1, 1, 1, 1});
  CHECK(k0(un).rank == 4);
}

TEST_CASE("group algebras against character counts") {
  for (auto G : {FiniteGroup::cyclic(4), FiniteGroup::cyclic(6), FiniteGroup::abelian({2, 2}), FiniteGroup::quaternion(),
                 FiniteGroup::dihedral(4), FiniteGroup::dihedral(3)}) {
    auto a = untwisted_algebra(group_groupoid(G));
    auto expect = group_blocks_oracle(G);
    CHECK(blocks(a) == expect);
    CHECK(blocks(a, false) == expect);
  }
}

TEST_CASE("twisted abelian group algebras against the regular-element oracle") {
  std::mt19937_64 rng(11);
  auto Z = FiniteGroup::abelian({2, 4});
  auto zg = group_groupoid(Z);
  for (int trial = 0; trial < 6; ++trial) {
    // bilinear cocycles a1*b2*k/4 plus a random coboundary
    int k = trial % 4;
    auto bil = cochain_from(zg, 4, [&](int x, int y) { return 2 * Z.residues(x)[0] * Z.residues(y)[1] * k % 4; });
    auto b = random_cochain(zg, 1, 4, rng);
    auto s = bil + differential(b);
    auto a = twisted_algebra(s);
    CHECK(blocks(a) == abelian_twisted_blocks_oracle(Z, s));
  }
}

TEST_CASE("component reduction agrees with the regular method") {
  std::mt19937_64 rng(5);
  std::vector<GroupoidPtr> gs{pair_groupoid(3), cech_groupoid({2, {{0, 1}, {1}}}),
                              group_groupoid(FiniteGroup::dihedral(4))};
  for (const auto& act : testsupport::all_actions()) gs.push_back(crossed_product(*act));
  auto mob = testsupport::z4_mobius();
  gs.push_back(imprimitivity_data(mob.G, mob.N, mob.rho_bar).H);
  for (const auto& g : gs) {
    auto b = random_cochain(g, 1, 6, rng);
    auto a = twisted_algebra(differential(b));
    auto r = block_decomposition(a);
    BlockOptions o;
    o.reduce = false;
    auto full = block_decomposition(a, o);
    CHECK(r.sizes == full.sizes);
    CHECK(r.center_dimension == full.center_dimension);
    CHECK(full.report.ok());
  }
}

TEST_CASE("block decomposition is reproducible and reports its seed") {
  auto a = untwisted_algebra(group_groupoid(FiniteGroup::dihedral(5)));
  BlockOptions o;
  o.seed = 42;
  o.reduce = false;
  auto b1 = block_decomposition(a, o), b2 = block_decomposition(a, o);
  CHECK(b1.sizes == b2.sizes);
  CHECK(b1.seed == 42);
  CHECK(b1.max_residual < 1e-6);
  bool seed_listed = false;
  for (const auto& c : b1.report.checks) seed_listed |= c.detail.find("seed 42") != std::string::npos;
  CHECK(seed_listed);
}

TEST_CASE("refining Z/2 by doubling its object keeps the block count") {
  auto z2 = group_groupoid(FiniteGroup::cyclic(2));
  auto r = refine(z2, {{0}, {0}});
  CHECK(r.groupoid->arrows() == 8);
  auto before = blocks(untwisted_algebra(z2));
  auto after = blocks(untwisted_algebra(r.groupoid));
  CHECK(before.size() == after.size());
  CHECK(after == std::vector<int>{2, 2});
}

TEST_CASE("block counts agree across standard Morita equivalences") {
  for (const auto& fx : {testsupport::z4_mobius(), testsupport::z4_trivial(), testsupport::q8_center()}) {
    StandardData d;
    d.base = fx.rho_bar.source;
    d.group = fx.G;
    d.normal = fx.N;
    d.rho_bar = fx.rho_bar;
    for (auto kind : {StandardKind::Imprimitivity, StandardKind::Iota, StandardKind::Kappa, StandardKind::BundleQuotient}) {
      auto eq = standard_equivalence(kind, d);
      auto l = blocks(untwisted_algebra(eq.bimodule.left));
      auto r = blocks(untwisted_algebra(eq.bimodule.right));
      CHECK(l.size() == r.size());
    }
  }
}

TEST_CASE("gauge by a 1-cochain is an explicit isomorphism") {
  std::mt19937_64 rng(3);
  auto K = FiniteGroup::abelian({2, 2});
  auto kg = group_groupoid(K);
  auto s = heisenberg(kg, K).at_level(4);
  auto b = random_cochain(kg, 1, 4, rng);
  auto gi = gauge_isomorphism(s, b);
  CHECK(gi.report.ok());
  CHECK(blocks(gi.source) == blocks(gi.target));

  auto pg = pair_groupoid(3);
  auto gp = gauge_isomorphism(Cochain::zero(pg, 2, 5), random_cochain(pg, 1, 5, rng));
  CHECK(gp.report.ok());
  CHECK(blocks(gp.target) == std::vector<int>{3});
}

TEST_CASE("Pontryagin duality over the point is the discrete Fourier transform") {
  auto Z2 = shared(FiniteGroup::cyclic(2));
  auto pt = point_groupoid();
  PontryaginData pd{pt, Z2, {0}, std::vector<int>(pt->nerve().count(2), 0), Cochain::zero(pt, 2, 1)};
  auto pdual = pontryagin_dualize(pd);
  CHECK(pdual.report.ok());
  // pointwise algebra on Z/2 against convolution on the dual
  CHECK(pdual.bundle.groupoid->objects() == 2);
  CHECK(pdual.gerbe->objects() == 1);
  auto f0 = pdual.fourier(0), f1 = pdual.fourier(1);
  CHECK(equal(f0, {{0, Cyclotomic::root(2, 0)}, {1, Cyclotomic::root(2, 0)}}));
  CHECK(equal(f1, {{0, Cyclotomic::root(2, 0)}, {1, Cyclotomic::root(2, 1)}}));
  CHECK(blocks(pdual.primal) == blocks(pdual.dual));
}

TEST_CASE("a twisted groupoid algebra sits inside its Pontryagin dual gerbe algebra") {
  // G = Z/2 with trivial ρ and ν; f the Heisenberg class read in the dual of Z/2
  auto K = FiniteGroup::abelian({2, 2});
  auto kg = group_groupoid(K);
  auto f = heisenberg(kg, K);
  auto Z2 = shared(FiniteGroup::cyclic(2));
  std::vector<int> fv(f.values.begin(), f.values.end());
  PontryaginData pd{kg, Z2, std::vector<int>(4, 0), fv, Cochain::zero(kg, 2, 2)};
  auto d = pontryagin_dualize(pd);
  CHECK(d.report.ok());
  auto sub = twisted_algebra(kg, f, d.level);
  // arrows (1,γ) of the bundle sit at 4 + γ
  for (int x = 0; x < 4; ++x)
    for (int y = 0; y < 4; ++y) {
      auto [p, k] = d.primal.product(4 + x, 4 + y);
      auto [q, kk] = sub.product(x, y);
      CHECK(p == 4 + q);
      CHECK(k == kk);
    }
  CHECK(blocks(d.primal) == blocks(d.dual));
}

TEST_CASE("gauge transforms of Pontryagin data") {
  std::mt19937_64 rng(17);
  auto G = shared(FiniteGroup::cyclic(4));
  auto pg = pair_groupoid(2);
  // the Z/4 Mobius transition as a homomorphism into G
  std::vector<int> rho{0, 1, 3, 0};
  PontryaginData pd{pg, G, rho, std::vector<int>(pg->nerve().count(2), 0), Cochain::zero(pg, 2, 4)};
  CHECK(check_pontryagin_data(pd).ok());

  auto same = gauge_transform(pd, {0, 0, 0, 0}, {0, 0}, Cochain::zero(pg, 2, 4));
  CHECK(same.rho == pd.rho);
  CHECK(same.f == pd.f);
  CHECK(same.nu.is_zero());

  auto base = pontryagin_dualize(pd);
  CHECK(base.report.ok());
  for (int trial = 0; trial < 5; ++trial) {
    std::uniform_int_distribution<int> u(0, 3);
    std::vector<int> alpha(4), beta{u(rng), u(rng)};
    for (int a = 0; a < 4; ++a) alpha[a] = pg->is_unit(a) ? 0 : u(rng);
    auto c = differential(random_cochain(pg, 1, 8, rng));
    auto moved = gauge_transform(pd, alpha, beta, c);
    CHECK(check_pontryagin_data(moved).ok());
    auto dual = pontryagin_dualize(moved);
    CHECK(dual.report.ok());
    CHECK(blocks(dual.primal) == blocks(base.primal));
    CHECK(blocks(dual.dual) == blocks(base.dual));
  }
}

TEST_CASE("Pontryagin data with both rho and f nontrivial") {
  // start from ρ trivial, f a coboundary-free class on the Klein group, then move ρ by a gauge
  auto K = FiniteGroup::abelian({2, 2});
  auto kg = group_groupoid(K);
  auto f = heisenberg(kg, K);
  auto G = shared(FiniteGroup::cyclic(2));
  std::vector<int> fv(f.values.begin(), f.values.end());
  PontryaginData pd{kg, G, {0, 0, 0, 0}, fv, Cochain::zero(kg, 2, 2)};
  std::mt19937_64 rng(23);
  auto c = cochain_from(kg, 4, [&](int x, int y) { return 2 * K.residues(x)[0] * K.residues(y)[1]; });
  auto moved = gauge_transform(pd, {0, 1, 1, 0}, {1}, c);
  CHECK(check_pontryagin_data(moved).ok());
  auto d = pontryagin_dualize(moved);
  CHECK(d.report.ok());
}

TEST_CASE("broken Pontryagin data is rejected") {
  auto G = shared(FiniteGroup::cyclic(2));
  auto K = FiniteGroup::abelian({2, 2});
  auto kg = group_groupoid(K);
  // ρ the first coordinate and f the Heisenberg class: δν = 0 cannot match <f, ρ>
  auto f = heisenberg(kg, K);
  std::vector<int> rho(4);
  for (int a = 0; a < 4; ++a) rho[a] = K.residues(a)[0];
  std::vector<int> fv(f.values.begin(), f.values.end());
  PontryaginData pd{kg, G, rho, fv, Cochain::zero(kg, 2, 2)};
  auto rep = check_pontryagin_data(pd);
  CHECK_FALSE(rep.ok());
  CHECK_THROWS_AS(pontryagin_dualize(pd), std::invalid_argument);
}

TEST_CASE("Hilbert bimodule of a unitary assignment") {
  using Mat = Eigen::MatrixXcd;
  SUBCASE("scalar identity") {
    auto g = pair_groupoid(2);
    std::vector<Mat> T(4, Mat::Identity(1, 1));
    auto h = hilbert_bimodule_check(g, T, 1, 1);
    CHECK(h.report.ok());
    REQUIRE(h.sigma_cochain.has_value());
    CHECK(h.sigma_cochain->is_zero());
  }
  SUBCASE("Pauli matrices on the Klein group") {
    auto K = FiniteGroup::abelian({2, 2});
    auto kg = group_groupoid(K);
    Mat X(2, 2), Zm(2, 2);
    X << 0, 1, 1, 0;
    Zm << 1, 0, 0, -1;
    CHECK((X * Zm + Zm * X).norm() == 0);  // anticommute
    std::vector<Mat> T(4);
    T[K.from_residues({0, 0})] = Mat::Identity(2, 2);
    T[K.from_residues({1, 0})] = X;
    T[K.from_residues({0, 1})] = Zm;
    T[K.from_residues({1, 1})] = X * Zm;
    auto h = hilbert_bimodule_check(kg, T, 2, 2);
    INFO(h.report.render());
    CHECK(h.report.ok());
    REQUIRE(h.sigma_cochain.has_value());
    auto s = *h.sigma_cochain;
    int x = K.from_residues({1, 0}), y = K.from_residues({0, 1});
    CHECK(mod(s({x, y}) - s({y, x}), 2) == 1);
    CHECK(blocks(twisted_algebra(s)) == std::vector<int>{2});
  }
  SUBCASE("random unitaries on the pair groupoid give a coboundary") {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> nd;
    const int n = 3, d = 2, L = 12;
    std::vector<Mat> U(n);
    for (auto& u : U) {
      Mat m(d, d);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) m(i, j) = {nd(rng), nd(rng)};
      Eigen::HouseholderQR<Mat> qr(m);
      u = qr.householderQ();
    }
    auto g = pair_groupoid(n);
    std::vector<Mat> T(n * n);
    std::uniform_int_distribution<int> ph(0, L - 1);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double t = i == j ? 0 : 2 * std::numbers::pi * ph(rng) / L;
        T[i * n + j] = std::polar(1.0, t) * U[i] * U[j].adjoint();
      }
    auto h = hilbert_bimodule_check(g, T, d, L);
    INFO(h.report.render());
    CHECK(h.report.ok());
    REQUIRE(h.sigma_cochain.has_value());
    CHECK(blocks(twisted_algebra(*h.sigma_cochain)) == blocks(untwisted_algebra(g)));
  }
  SUBCASE("non-unital or non-projective assignments are refused") {
    auto g = pair_groupoid(2);
    std::vector<Mat> T(4, Mat::Identity(2, 2));
    T[0] = -Mat::Identity(2, 2);
    CHECK_FALSE(hilbert_bimodule_check(g, T, 2).report.ok());
    Mat X(2, 2), H(2, 2);
    X << 0, 1, 1, 0;
    H << 1, 1, 1, -1;
    H /= std::sqrt(2.0);
    auto kg = group_groupoid(FiniteGroup::abelian({2, 2}));
    std::vector<Mat> T2{Mat::Identity(2, 2), X, H, X * H};
    auto rep = hilbert_bimodule_check(kg, T2, 2).report;
    CHECK_FALSE(rep.ok());
    CHECK(rep.checks.back().id == "sigma.scalar");
  }
}

TEST_CASE("non-closed twists are rejected naming a triple") {
  auto kg = group_groupoid(FiniteGroup::cyclic(3));
  auto s = Cochain::zero(kg, 2, 3);
  s.set({1, 1}, 1);
  CHECK_THROWS_WITH_AS(twisted_algebra(s), doctest::Contains("triple"), std::invalid_argument);
}
