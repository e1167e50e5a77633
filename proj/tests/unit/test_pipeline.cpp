#include <algorithm>
#include <random>
#include <set>

#include "../oracles.hpp"
#include "doctest.h"
#include "support.hpp"
#include "tdual/cohomology.hpp"
#include "tdual/cover.hpp"
#include "tdual/pipeline.hpp"

using namespace tdual;
using namespace testsupport;
using oracles::conjugacy_classes;
using oracles::regular_class_count;

namespace {

BundleGerbeData gerbe_of(const BundleFixture& f, i64 level, const std::string& name) {
  return make_bundle_gerbe(f.G, f.N, f.rho_bar.source, f.rho_bar.map, level, name);
}

const Check* find_check(const Report& r, const std::string& id) {
  for (const auto& c : r.checks)
    if (c.id == id) return &c;
  return nullptr;
}

bool has_prefix(const Report& r, const std::string& prefix) {
  for (const auto& c : r.checks)
    if (c.id.rfind(prefix, 0) == 0) return true;
  return false;
}

// Klein four-group over the point with the bilinear (Heisenberg) β.
BundleGerbeData klein_heisenberg() {
  auto G = std::make_shared<FiniteGroup>(FiniteGroup::abelian({2, 2}));
  auto b = make_bundle_gerbe(G, whole_group(G), point_groupoid(), {0}, 2, "klein-heisenberg");
  set_constant_beta(b, bilinear_group_cocycle(*G, 0, 1, 2));
  return b;
}

// Q8 over two charts with β = δa for a random normalized a.
BundleGerbeData q8_with_beta(std::uint64_t seed) {
  auto b = gerbe_of(q8_center(), 4, "q8-center");
  std::mt19937_64 rng(seed);
  auto gg = group_groupoid(*b.group);
  auto a = random_cochain(gg, 1, 4, rng);
  auto w = differential(a);
  std::vector<i64> omega(b.group->order * b.group->order);
  for (int x = 0; x < b.group->order; ++x)
    for (int y = 0; y < b.group->order; ++y) omega[x * b.group->order + y] = w({x, y});
  set_constant_beta(b, omega);
  return b;
}

// λ̄(γ) = φ_{sγ} - φ_{rγ} restricted to N, from the (1,0) cochain c(g,(t,x)) = <φ_x, g>.
void add_chart_characters(BundleGerbeData& b, const std::vector<int>& phi_by_object) {
  DualGroup pg(*b.group);
  const i64 L = b.level();
  auto t = TotalCochain::zero(b.action, 1, L);
  const int nobj = b.base()->objects();
  const int nb = b.bundle.groupoid->objects();
  for (int g = 0; g < b.group->order; ++g)
    for (int o = 0; o < nb; ++o) t.parts[1].set({g}, o, mod((L / pg.exponent) * pg.pairing(phi_by_object[o % nobj], g), L));
  add_total_coboundary(b, t);
}

}  // namespace

TEST_CASE("normal subgroups against subset enumeration") {
  for (auto G : {FiniteGroup::dihedral(4), FiniteGroup::quaternion(), FiniteGroup::abelian({2, 2}), FiniteGroup::dihedral(3)}) {
    auto gp = std::make_shared<FiniteGroup>(G);
    std::set<std::vector<int>> oracle;
    for (int mask = 1; mask < (1 << G.order); ++mask) {
      std::vector<int> s;
      for (int i = 0; i < G.order; ++i)
        if (mask >> i & 1) s.push_back(i);
      bool closed = std::find(s.begin(), s.end(), G.id) != s.end();
      for (int a : s)
        for (int c : s) closed = closed && (mask >> G.mul(a, c) & 1);
      bool normal = closed;
      for (int a : s)
        for (int g = 0; g < G.order; ++g) normal = normal && (mask >> G.conj(g, a) & 1);
      if (normal) oracle.insert(s);
    }
    std::set<std::vector<int>> got;
    for (const auto& n : normal_subgroups(gp)) got.insert(n.elements);
    CHECK(got == oracle);
  }
}

TEST_CASE("bilinear group cocycle") {
  auto K = FiniteGroup::abelian({2, 2});
  auto w = bilinear_group_cocycle(K, 0, 1, 2);
  auto gg = group_groupoid(K);
  Cochain c = Cochain::zero(gg, 2, 2);
  for (int x = 0; x < 4; ++x)
    for (int y = 0; y < 4; ++y) c.set({x, y}, w[x * 4 + y]);
  CHECK(differential(c).is_zero());
  CHECK_FALSE(torus_coboundary_witness(c).has_value());
  CHECK_THROWS_AS(bilinear_group_cocycle(FiniteGroup::abelian({2, 4}), 0, 1, 1), std::invalid_argument);
  CHECK_THROWS_AS(bilinear_group_cocycle(FiniteGroup::quaternion(), 0, 1, 2), std::invalid_argument);
}

TEST_CASE("bundle gerbe input validation") {
  auto b = gerbe_of(z4_mobius(), 4, "mobius");
  CHECK(check_bundle_gerbe(b).ok());
  auto broken = b;
  broken.cocycle.sigma.values[5] = 1;
  CHECK_FALSE(check_bundle_gerbe(broken).ok());
  CHECK_THROWS_AS(imprimitivity(broken), std::invalid_argument);
  auto f = z4_mobius();
  CHECK_THROWS_AS(make_bundle_gerbe(f.G, f.N, f.rho_bar.source, {0, 7, 0, 0}, 4), std::invalid_argument);
  auto G = std::make_shared<FiniteGroup>(FiniteGroup::dihedral(3));
  CHECK_THROWS_AS(make_bundle_gerbe(G, make_subgroup(G, {0, 3}), point_groupoid(), {0}, 2), std::invalid_argument);
}

TEST_CASE("imprimitivity with N = G is the G-gerbe") {
  for (auto G : {FiniteGroup::cyclic(4), FiniteGroup::quaternion(), FiniteGroup::dihedral(3)}) {
    auto gp = std::make_shared<FiniteGroup>(G);
    auto f = bundle_over_two_charts(G, [&] {
      std::vector<int> all(G.order);
      for (int i = 0; i < G.order; ++i) all[i] = i;
      return all;
    }(), 0);
    auto b = gerbe_of(f, 4, "whole");
    auto imp = imprimitivity(b);
    INFO(imp.report.render());
    CHECK(imp.report.ok());
    CHECK(imp.data.K->arrows() == G.order * 4);
    CHECK(int(imp.report.blocks.at("K").size()) == conjugacy_classes(G));
    CHECK(int(imp.report.blocks.at("H").size()) == conjugacy_classes(G));
  }
}

TEST_CASE("imprimitivity on the Z/4 Mobius fixture") {
  auto b = gerbe_of(z4_mobius(), 4, "mobius");
  std::mt19937_64 rng(7);
  auto t = random_total(b.action, 1, 4, rng);
  t.parts[1] = EqCochain::zero(b.action, 1, 0, 4);
  add_total_coboundary(b, t);
  add_chart_characters(b, {0, 1});
  CHECK(check_bundle_gerbe(b).ok());
  CHECK_FALSE(b.cocycle.lambda.is_zero());
  auto imp = imprimitivity(b);
  INFO(imp.report.render());
  CHECK(imp.report.ok());
  REQUIRE(imp.dual_actions.has_value());
  CHECK(imp.dual_actions->report.ok());

  // χ = ι*ψ evaluated through ι(k) = (κ(k), (e, base k))
  const auto& d = imp.data;
  const int nb = b.base()->arrows(), nbund = d.bundle.groupoid->arrows();
  const int qid = d.quotient.group->id;
  auto iota = [&](int k) { return d.k_to_group.map[k] * nbund + qid * nb + d.k_to_base[k]; };
  const auto& K = *d.K;
  for (int k1 = 0; k1 < K.arrows(); ++k1)
    for (int k2 : K.into(K.src(k1))) CHECK(imp.chi({k1, k2}) == imp.psi({iota(k1), iota(k2)}));

  CHECK(int(imp.report.blocks.at("H").size()) == regular_class_count(imp.psi));
  CHECK(int(imp.report.blocks.at("K").size()) == regular_class_count(imp.chi));
}

TEST_CASE("imprimitivity on the Q8 fixture with nontrivial beta") {
  auto b = q8_with_beta(3);
  CHECK_FALSE(b.cocycle.beta.is_zero());
  CHECK(check_bundle_gerbe(b).ok());
  for (bool fibred : {false, true}) {
    auto bb = b;
    bb.force_fibred = fibred;
    auto imp = imprimitivity(bb);
    INFO(imp.report.render());
    CHECK(imp.report.ok());
    CHECK(imp.data.fibred == fibred);
    CHECK_FALSE(imp.dual_actions.has_value());
    CHECK(int(imp.report.blocks.at("H").size()) == regular_class_count(imp.psi));
    CHECK(int(imp.report.blocks.at("K").size()) == regular_class_count(imp.chi));
    CHECK(imp.report.blocks.at("H").size() == imp.report.blocks.at("K").size());
  }
}

TEST_CASE("classical dual of the trivial bundle is trivial") {
  auto b = gerbe_of(z4_trivial(), 4, "trivial");
  auto c = classical_tdualize(b);
  INFO(c.report.render());
  CHECK(c.report.ok());
  CHECK(c.dual.quotient.group->order == 2);
  for (int v : c.dual.rho_bar.map) CHECK(v == c.dual.quotient.group->id);
  CHECK(c.dual.cocycle.lambda.is_zero());
  CHECK(torus_coboundary_witness(c.dual.cocycle.sigma).has_value());
}

TEST_CASE("classical dual of the Z/4 Mobius fixture") {
  auto b = gerbe_of(z4_mobius(), 4, "mobius");
  auto c = classical_tdualize(b);
  INFO(c.report.render());
  CHECK(c.report.ok());
  const auto& d = c.dual;
  // λ̄ ≡ 1: dual transition trivial, the dual bundle a disconnected double cover
  for (int v : c.lambda_bar) CHECK(v == 0);
  for (int v : d.rho_bar.map) CHECK(v == d.quotient.group->id);
  int ncomp = 0;
  object_components(*d.bundle.groupoid, &ncomp);
  CHECK(ncomp == 2);
  CHECK(d.bundle.groupoid->objects() == 4);

  // σ∨(φ,γ1,γ2) = <φ, δρ̃(γ1,γ2)> with φ the restriction of the Ĝ label to N
  auto dr = delta_rho(b.base(), b.normal, *c.steps.data.lift);
  const auto& D = *d.bundle.groupoid;
  const int nb = b.base()->arrows();
  DualGroup pg(*d.group);
  bool phase_seen = false;
  for (int a1 = 0; a1 < D.arrows(); ++a1)
    for (int a2 : D.into(D.src(a1))) {
      int q = a1 / nb;
      int n = b.normal.elements[dr.sig(a1 % nb, a2 % nb)];
      i64 expect = mod(pg.pairing(d.quotient.rep[q], n), 4);
      CHECK(d.cocycle.sigma({a1, a2}) == expect);
      phase_seen = phase_seen || expect != 0;
    }
  CHECK(phase_seen);
  CHECK(c.report.blocks.at("H").size() == c.report.blocks.at("K").size());
  CHECK(c.report.blocks.at("K") == c.report.blocks.at("dual"));
  CHECK(int(c.report.blocks.at("dual").size()) == regular_class_count(d.cocycle.sigma));
}

TEST_CASE("classical dual with nontrivial lambda-bar") {
  auto b = gerbe_of(z4_mobius(), 4, "mobius");
  add_chart_characters(b, {0, 1});
  auto c = classical_tdualize(b);
  INFO(c.report.render());
  CHECK(c.report.ok());
  // λ̄(0 <- 1) = φ_1 - φ_0 restricted to N = {0,2}: the nontrivial character
  CHECK(c.lambda_bar[1] != 0);
  CHECK(c.lambda_bar[0] == 0);
  CHECK(c.dual.rho_bar.map[1] != c.dual.quotient.group->id);
  CHECK(c.report.blocks.at("dual").size() == c.report.blocks.at("H").size());
}

TEST_CASE("classical dual refuses nonabelian, beta and bad levels") {
  CHECK_THROWS_AS(classical_tdualize(gerbe_of(q8_center(), 4, "q8")), std::invalid_argument);
  CHECK_THROWS_AS(classical_tdualize(klein_heisenberg()), std::invalid_argument);
  CHECK_THROWS_AS(classical_tdualize(gerbe_of(z4_mobius(), 2, "mobius")), std::invalid_argument);
  auto fib = gerbe_of(z4_mobius(), 4, "mobius");
  fib.force_fibred = true;
  CHECK_THROWS_AS(classical_tdualize(fib), std::invalid_argument);
}

TEST_CASE("double dual recovers the input up to witnesses") {
  std::vector<BundleGerbeData> inputs;
  inputs.push_back(gerbe_of(z4_mobius(), 4, "mobius"));
  inputs.push_back(gerbe_of(z4_trivial(), 4, "trivial"));
  inputs.push_back(gerbe_of(bundle_over_two_charts(FiniteGroup::cyclic(9), {0, 3, 6}, 1), 9, "z9"));
  auto lam = gerbe_of(z4_mobius(), 4, "mobius-lambda");
  add_chart_characters(lam, {0, 1});
  inputs.push_back(lam);
  for (const auto& b : inputs) {
    auto dd = classical_double_dual(b);
    INFO(dd.report.render());
    CHECK(dd.report.ok());
    CHECK(dd.gerbe_witness.has_value());
    CHECK(dd.crossed_witness.has_value());
    CHECK(dd.transition_witness.size() == std::size_t(b.base()->objects()));
  }
}

TEST_CASE("nonabelian dual with N trivial is the base") {
  auto K4 = FiniteGroup::abelian({2, 2});
  auto base = group_groupoid(K4);
  auto G = std::make_shared<FiniteGroup>(FiniteGroup::cyclic(4));
  auto b = make_bundle_gerbe(G, trivial_subgroup(G), base, std::vector<int>(4, 0), 2, "n-trivial");
  // σ pulled back from a Heisenberg cocycle on the base along the bundle projection
  auto w = bilinear_group_cocycle(K4, 0, 1, 2);
  const auto& E = *b.bundle.groupoid;
  const auto& nv = E.nerve();
  for (std::size_t i = 0; i < nv.count(2); ++i) {
    const int* t = nv.tuple(2, i);
    b.cocycle.sigma.values[i] = w[(t[0] % 4) * 4 + t[1] % 4];
  }
  REQUIRE(check_bundle_gerbe(b).ok());
  auto nd = nonabelian_tdualize(b);
  INFO(nd.report.render());
  CHECK(nd.report.ok());
  CHECK(nd.gerbe->arrows() == base->arrows());
  CHECK(nd.gerbe->objects() == base->objects());
  for (int x = 0; x < 4; ++x)
    for (int y = 0; y < 4; ++y) CHECK(nd.chi({x, y}) == w[x * 4 + y]);
  CHECK(nd.report.blocks.at("K") == std::vector<int>{2});
}

TEST_CASE("nonabelian and classical agree on the abelian fixture") {
  auto b = gerbe_of(z4_mobius(), 4, "mobius");
  add_chart_characters(b, {0, 1});
  auto nd = nonabelian_tdualize(b);
  auto c = classical_tdualize(b);
  CHECK(nd.report.ok());
  const auto& K1 = *nd.gerbe;
  const auto& K2 = *c.steps.data.K;
  CHECK(K1.arrows() == K2.arrows());
  auto t1 = K1.tables();
  auto t2 = K2.tables();
  CHECK(t1.compose == t2.compose);
  CHECK(nd.chi == c.steps.chi);
  // the Fourier-side twist pulls back to χ + δb under (n,γ) -> (n,γ)
  const int nb = b.base()->arrows();
  GroupoidHom h{nd.gerbe, c.fourier.gerbe, std::vector<int>(K1.arrows())};
  for (int k = 0; k < K1.arrows(); ++k) h.map[k] = c.n_normal_form[k / nb] * nb + k % nb;
  CHECK(check_functorial(h).ok());
  const i64 l = lcm64(c.fourier.tau.modulus, 4);
  CHECK(pullback(h, c.fourier.tau).at_level(l) == (nd.chi + differential(c.gauge)).at_level(l));
}

TEST_CASE("Mackey obstruction") {
  SUBCASE("classical fixture is trivial everywhere") {
    auto m = mackey_obstruction(gerbe_of(z4_mobius(), 4, "mobius"));
    CHECK(m.trivial);
    CHECK(m.report.ok());
    CHECK(m.points.size() == 2);
    for (const auto& p : m.points) CHECK(p.witness.has_value());
  }
  SUBCASE("Klein Heisenberg is nontrivial") {
    auto m = mackey_obstruction(klein_heisenberg());
    CHECK(m.report.ok());
    CHECK_FALSE(m.trivial);
    REQUIRE(m.points.size() == 1);
    CHECK_FALSE(m.points[0].witness.has_value());
    bool nonzero = false;
    for (auto v : m.points[0].class_coordinates) nonzero = nonzero || v != 0;
    CHECK(nonzero);
    // independent certificate: the twisted Klein algebra is a single block
    CHECK(regular_class_count(m.points[0].restricted) == 1);
  }
  SUBCASE("verdict invariant under gauge transformations") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 4; ++trial) {
      auto b = klein_heisenberg();
      add_total_coboundary(b, random_total(b.action, 1, 2, rng));
      REQUIRE(check_bundle_gerbe(b).ok());
      CHECK_FALSE(mackey_obstruction(b).trivial);
      auto q = q8_with_beta(100 + trial);
      add_total_coboundary(q, random_total(q.action, 1, 4, rng));
      CHECK(mackey_obstruction(q).trivial);
    }
  }
  SUBCASE("verdict invariant under refinement") {
    auto ref = refine(point_groupoid(), {{0}, {0}, {0}});
    auto G = std::make_shared<FiniteGroup>(FiniteGroup::abelian({2, 2}));
    auto b = make_bundle_gerbe(G, whole_group(G), ref.groupoid, std::vector<int>(ref.groupoid->arrows(), 0), 2, "refined");
    set_constant_beta(b, bilinear_group_cocycle(*G, 0, 1, 2));
    auto m = mackey_obstruction(b);
    CHECK(m.points.size() == 3);
    for (const auto& p : m.points) CHECK_FALSE(p.trivial);
  }
}

TEST_CASE("fiber analysis") {
  SUBCASE("untwisted Z/2 fiber is commutative") {
    auto nd = nonabelian_tdualize(gerbe_of(z4_mobius(), 4, "mobius"));
    auto f = fiber_analysis(nd, 0);
    INFO(f.report.render());
    CHECK(f.report.ok());
    CHECK(f.essential);
    CHECK(f.blocks == std::vector<int>{1, 1});
    CHECK(f.untwisted_blocks == std::vector<int>{1, 1});
  }
  SUBCASE("Klein Heisenberg fiber is a single 2x2 block") {
    auto nd = nonabelian_tdualize(klein_heisenberg());
    auto f = fiber_analysis(nd, 0);
    INFO(f.report.render());
    CHECK(f.report.ok());
    CHECK(f.blocks == std::vector<int>{2});
    CHECK(f.untwisted_blocks == std::vector<int>{1, 1, 1, 1});
    CHECK(int(f.blocks.size()) == regular_class_count(f.group_twist));
  }
  SUBCASE("untwisted Z/4 fiber") {
    auto G = std::make_shared<FiniteGroup>(FiniteGroup::cyclic(4));
    auto nd = nonabelian_tdualize(make_bundle_gerbe(G, whole_group(G), point_groupoid(), {0}, 4, "z4-point"));
    auto f = fiber_analysis(nd, 0);
    CHECK(f.report.ok());
    CHECK(f.blocks == std::vector<int>{1, 1, 1, 1});
  }
  SUBCASE("Q8 center fiber with coboundary beta stays commutative") {
    auto nd = nonabelian_tdualize(q8_with_beta(5));
    auto f = fiber_analysis(nd, 1);
    INFO(f.report.render());
    CHECK(f.report.ok());
    CHECK(int(f.blocks.size()) == regular_class_count(f.group_twist));
    CHECK(f.blocks == f.untwisted_blocks);
  }
  SUBCASE("points over a Cech cover") {
    CoveredBase cb{1, {{0}, {0}}};
    auto base = cech_groupoid(cb);
    auto G = std::make_shared<FiniteGroup>(FiniteGroup::abelian({2, 2}));
    auto b = make_bundle_gerbe(G, whole_group(G), base, std::vector<int>(base->arrows(), 0), 2, "cech");
    set_constant_beta(b, bilinear_group_cocycle(*G, 0, 1, 2));
    auto f = fiber_analysis(nonabelian_tdualize(b), 0);
    CHECK(f.report.ok());
    CHECK(f.fiber->objects() == 2);
    CHECK(f.blocks == std::vector<int>{2});
    CHECK_THROWS_AS(fiber_analysis(nonabelian_tdualize(b), 1), std::invalid_argument);
  }
  SUBCASE("invalid point") {
    auto nd = nonabelian_tdualize(gerbe_of(z4_mobius(), 4, "mobius"));
    CHECK_THROWS_AS(fiber_analysis(nd, 2), std::invalid_argument);
    CHECK_THROWS_AS(fiber_analysis(nd, -1), std::invalid_argument);
  }
}

TEST_CASE("Takai reconstruction") {
  SUBCASE("trivial data") {
    auto G = std::make_shared<FiniteGroup>(FiniteGroup::cyclic(2));
    auto nd = nonabelian_tdualize(make_bundle_gerbe(G, whole_group(G), point_groupoid(), {0}, 2, "z2-point"));
    auto r = takai_reconstruct(nd);
    INFO(r.render());
    CHECK(r.ok());
  }
  SUBCASE("Z/4 round trip") {
    auto b = gerbe_of(z4_mobius(), 4, "mobius");
    std::mt19937_64 rng(21);
    add_total_coboundary(b, random_total(b.action, 1, 4, rng));
    add_chart_characters(b, {1, 2});
    REQUIRE(check_bundle_gerbe(b).ok());
    auto r = takai_reconstruct(nonabelian_tdualize(b));
    INFO(r.render());
    CHECK(r.ok());
    CHECK(has_prefix(r.checks, "takai.second."));
    CHECK(has_prefix(r.checks, "module.morita."));
    REQUIRE(find_check(r.checks, "takai.subequivalence"));
    CHECK(find_check(r.checks, "takai.subequivalence")->ok);
    CHECK(r.blocks.at("induced").size() == r.blocks.at("input").size());
    CHECK(r.blocks.at("crossed-induced").size() == r.blocks.at("crossed").size());
  }
  SUBCASE("missing provenance") {
    auto nd = nonabelian_tdualize(gerbe_of(z4_mobius(), 4, "mobius"));
    nd.source.reset();
    CHECK_THROWS_AS(takai_reconstruct(nd), std::invalid_argument);
    CHECK_THROWS_AS(mackey_obstruction(nd), std::invalid_argument);
  }
}

TEST_CASE("Takai reconstruction on Q8 with beta") {
  auto r = takai_reconstruct(nonabelian_tdualize(q8_with_beta(9)));
  INFO(r.render());
  CHECK(r.ok());
  CHECK(has_prefix(r.checks, "takai.second."));
  CHECK(r.blocks.at("module").size() == r.blocks.at("input").size());
}

TEST_CASE("K-theory degree shift is never claimed") {
  auto b = gerbe_of(z4_mobius(), 4, "mobius");
  auto c = classical_tdualize(b);
  CHECK_THROWS_AS(claim_k_degree_shift(c.report, *b.group), std::logic_error);
  try {
    claim_k_degree_shift(c.report, *b.group);
  } catch (const std::logic_error& e) {
    CHECK(std::string(e.what()).find("Connes-Thom") != std::string::npos);
  }
  bool noted = false;
  for (const auto& n : c.report.notes) noted = noted || n.find("degree shift not asserted") != std::string::npos;
  CHECK(noted);
}

TEST_CASE("reports render deterministically") {
  auto b = gerbe_of(z4_mobius(), 4, "mobius");
  auto r1 = classical_tdualize(b).report.render();
  auto r2 = classical_tdualize(b).report.render();
  CHECK(r1 == r2);
  CHECK(r1.find("PASS") != std::string::npos);
  CHECK(r1.find("seed 1") != std::string::npos);
}
