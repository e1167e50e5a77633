#include "doctest.h"
#include "support.hpp"
#include "tdual/cohomology.hpp"
#include "tdual/morita.hpp"

using namespace tdual;
using namespace testsupport;

namespace {

bool has_vacuous(const Report& r) {
  int n = 0;
  for (const auto& c : r.checks)
    if (c.detail == "vacuous (finite)") ++n;
  return n == 2;
}

const Check* find_check(const Report& r, const std::string& id) {
  for (const auto& c : r.checks)
    if (c.id == id) return &c;
  return nullptr;
}

StandardData data_of(const BundleFixture& f) {
  StandardData d;
  d.base = f.rho_bar.source;
  d.group = f.G;
  d.normal = f.N;
  d.rho_bar = f.rho_bar;
  return d;
}

// Arrow map of an isomorphism between groupoids with trivial isotropy,
// determined by an object bijection.
GroupoidHom iso_from_objects(GroupoidPtr a, GroupoidPtr b, const std::vector<int>& f) {
  GroupoidHom h{a, b, std::vector<int>(a->arrows(), -1)};
  for (int x = 0; x < a->arrows(); ++x)
    for (int y : b->into(f[a->dst(x)]))
      if (b->src(y) == f[a->src(x)]) h.map[x] = y;
  return h;
}

}  // namespace

TEST_CASE("identity bimodule verifies and lists vacuous conditions") {
  for (auto g : {point_groupoid(), pair_groupoid(3), group_groupoid(FiniteGroup::quaternion())}) {
    auto r = verify_bimodule(identity_bimodule(g));
    CHECK(r.ok());
    CHECK(has_vacuous(r));
  }
}

TEST_CASE("isotropy bimodule for Z/4 over {0,2}") {
  auto G = std::make_shared<FiniteGroup>(FiniteGroup::cyclic(4));
  auto iso = isotropy_equivalence(make_subgroup(G, {0, 2}));
  CHECK(iso.crossed->arrows() == 8);
  CHECK(iso.crossed->objects() == 2);
  CHECK(verify_bimodule(iso.bimodule).ok());
}

TEST_CASE("non-free action is reported with a witness pair") {
  auto L = group_groupoid(FiniteGroup::cyclic(2));
  auto R = point_groupoid();
  auto b = make_bimodule(
      L, R, 1, {0}, {0}, [](int, int p) { return p; }, [](int p, int) { return p; }, "collapsed");
  auto r = verify_bimodule(b);
  CHECK_FALSE(r.ok());
  auto c = find_check(r, "left.free");
  REQUIRE(c != nullptr);
  CHECK_FALSE(c->ok);
  CHECK(c->detail.find("arrows 0 and 1") != std::string::npos);
}

TEST_CASE("bimodules of homomorphisms") {
  SUBCASE("identity") {
    auto g = pair_groupoid(2);
    GroupoidHom id{g, g, {0, 1, 2, 3}};
    auto hb = from_homomorphism(id);
    CHECK(hb.essential);
    CHECK(hb.bimodule.carrier == 4);
    for (int x = 0; x < 2; ++x) CHECK(hb.points[hb.bimodule.left_section[x]] == std::pair<int, int>{x, g->unit(x)});
  }
  SUBCASE("gluing morphism of a refinement") {
    auto g = group_groupoid(FiniteGroup::cyclic(2));
    auto ref = refine(g, {{0}, {0}});
    auto hb = from_homomorphism(GroupoidHom{ref.groupoid, g, ref.gluing});
    CHECK(hb.essential);
  }
  SUBCASE("constant map to the point") {
    auto g = group_groupoid(FiniteGroup::cyclic(2));
    auto hb = from_homomorphism(GroupoidHom{g, point_groupoid(), {0, 0}});
    CHECK_FALSE(hb.essential);
    CHECK_FALSE(find_check(hb.report, "left.free")->ok);
  }
}

TEST_CASE("standard equivalences on the bundle fixtures") {
  for (auto f : {z4_mobius(), z4_trivial(), q8_center()}) {
    for (bool fibred : {false, true}) {
      auto d = data_of(f);
      d.force_fibred = fibred;
      for (auto kind : {StandardKind::Iota, StandardKind::Kappa, StandardKind::BundleQuotient,
                        StandardKind::Imprimitivity, StandardKind::Isotropy}) {
        auto e = standard_equivalence(kind, d);
        INFO(f.G->name << " " << to_string(kind) << (fibred ? " fibred" : ""));
        CHECK(e.report.ok());
        if (kind == StandardKind::Iota || kind == StandardKind::Imprimitivity)
          CHECK(e.variant == (fibred ? "fibred" : "lift"));
      }
    }
  }
}

TEST_CASE("imprimitivity on Q8 over its center has the expected sizes") {
  auto f = q8_center();
  auto d = imprimitivity_data(f.G, f.N, f.rho_bar);
  CHECK(d.H->arrows() == 8 * 16);
  CHECK(d.K->arrows() == 2 * 4);
  CHECK(d.bimodule.carrier == 8 * 4);
  CHECK(verify_bimodule(d.bimodule).ok());
  CHECK(check_functorial(d.iota).ok());
}

TEST_CASE("kappa with N = G is the quotient onto the base") {
  auto f = bundle_over_two_charts(FiniteGroup::cyclic(4), {0, 1, 2, 3}, 0);
  auto e = standard_equivalence(StandardKind::Kappa, data_of(f));
  CHECK(e.report.ok());
  CHECK(e.hom->target->arrows() == 4);
}

TEST_CASE("refinement and quotient kinds") {
  StandardData d;
  d.base = pair_groupoid(2);
  d.cover = {{0, 1}, {1}};
  CHECK(standard_equivalence(StandardKind::Refinement, d).report.ok());

  auto Z2 = std::make_shared<FiniteGroup>(FiniteGroup::cyclic(2));
  d.free_action = make_action(Z2, unit_groupoid(4), {0, 1, 2, 3, 1, 0, 3, 2});
  CHECK(standard_equivalence(StandardKind::Quotient, d).report.ok());
  d.free_action = trivial_action(Z2, unit_groupoid(2));
  CHECK_FALSE(standard_equivalence(StandardKind::Quotient, d).report.ok());
}

TEST_CASE("Takai equivalence is equivariant while the embedding is not") {
  for (auto a : all_actions()) {
    auto t = takai_equivalence(*a);
    INFO(a->target->name);
    CHECK(t.report.ok());
    CHECK_FALSE(t.phi_equivariant);
    auto lc = crossed_product(*t.bimodule.gleft);
    auto rc = crossed_product(*t.bimodule.gright);
    CHECK(verify_bimodule(crossed_product_bimodule(t.bimodule, lc, rc)).ok());
  }
  auto G = std::make_shared<FiniteGroup>(FiniteGroup::trivial());
  auto t = takai_equivalence(trivial_action(G, pair_groupoid(2)));
  CHECK(t.report.ok());
  CHECK(t.phi_equivariant);
  CHECK(t.induced.groupoid->arrows() == 4);
}

TEST_CASE("Z/2 over the point: the induced groupoid is a pair groupoid") {
  auto G = std::make_shared<FiniteGroup>(FiniteGroup::cyclic(2));
  auto t = takai_equivalence(trivial_action(G, point_groupoid()));
  CHECK(t.induced.groupoid->arrows() == 4);
  CHECK(t.induced.groupoid->objects() == 2);
  CHECK(t.report.ok());
}

TEST_CASE("Mobius and trivial bundles with translation actions") {
  auto mob = principal_bundle(z4_mobius().rho_bar);
  auto tri = principal_bundle(z4_trivial().rho_bar);
  // objects (t,x) at 2t+x; swap inside one component only
  auto phi = iso_from_objects(mob.groupoid, tri.groupoid, {0, 2, 3, 1});
  REQUIRE(check_functorial(phi).ok());
  auto hb = from_homomorphism(phi);
  REQUIRE(hb.essential);
  auto b = hb.bimodule;
  b.gleft = mob.translation;
  b.gright = tri.translation;
  const int n = b.carrier;
  b.gcarrier.resize(2 * n);
  for (int g = 0; g < 2; ++g)
    for (int p = 0; p < n; ++p) {
      auto [x, eta] = hb.points[p];
      int gx = mob.translation.act_obj(g, x), geta = tri.translation.act(g, eta);
      int q = -1;
      for (int r = 0; r < n; ++r)
        if (hb.points[r] == std::pair<int, int>{gx, geta}) q = r;
      b.gcarrier[g * n + p] = q < 0 ? p : q;
    }
  CHECK_FALSE(equivariant_check(b).ok());
  // the two bundles are nevertheless equivariantly isomorphic over a point
  CHECK(find_isomorphism(*mob.groupoid, *tri.groupoid, 64, &mob.translation, &tri.translation).has_value());
}

TEST_CASE("twisted extension bimodules") {
  SUBCASE("trivial twists give the product bimodule") {
    auto g = std::shared_ptr<const FiniteGroupoid>(pair_groupoid(2));
    auto P = std::make_shared<Bimodule>(identity_bimodule(g));
    auto cx = BimoduleComplex::make(P, 2);
    auto z = Cochain::zero(g, 2, 4);
    MoritaWitness w{cx->zero(1, 0, 4), cx->zero(0, 1, 4)};
    auto tb = twisted_extension_bimodule(*P, w, z, z);
    CHECK(tb.bimodule.carrier == 16);
    CHECK(verify_bimodule(tb.bimodule).ok());
    CHECK(check_central(tb).ok());
  }
  SUBCASE("refinement with a pulled-back cocycle") {
    auto K = FiniteGroup::abelian({2, 2});
    auto g = group_groupoid(K);
    auto ref = refine(g, {{0}, {0}});
    auto P = std::make_shared<Bimodule>(ref.bimodule);
    Cochain chi = Cochain::zero(g, 2, 2);
    for (int x = 0; x < 4; ++x)
      for (int y = 0; y < 4; ++y) chi.set({x, y}, K.residues(x)[0] * K.residues(y)[1]);
    auto psi = pullback(GroupoidHom{ref.groupoid, g, ref.gluing}, chi);
    // P is (original, refined): twists go on left = original, right = refined
    auto cx = BimoduleComplex::make(P, 3);
    auto w = cohomologous_witness(chi, psi, cx);
    REQUIRE(w.has_value());
    auto tb = twisted_extension_bimodule(*P, *w, chi, psi);
    CHECK(verify_bimodule(tb.bimodule).ok());
    CHECK(check_central(tb).ok());

    auto broken = *w;
    broken.mu.values[0] = mod(broken.mu.values[0] + 1, 2);
    bool named = false;
    try {
      twisted_extension_bimodule(*P, broken, chi, psi);
    } catch (const std::invalid_argument& e) {
      named = std::string(e.what()).find("witness equation fails at") != std::string::npos;
    }
    CHECK(named);
  }
  SUBCASE("transported witness for a homomorphism bimodule") {
    auto K = FiniteGroup::abelian({2, 2});
    auto g = group_groupoid(K);
    auto ref = refine(g, {{0}, {0}, {0}});
    GroupoidHom glue{ref.groupoid, g, ref.gluing};
    auto hb = from_homomorphism(glue);
    std::mt19937_64 rng(7);
    Cochain chi = differential(random_cochain(g, 1, 4, rng));
    for (int x = 0; x < 4; ++x)
      for (int y = 0; y < 4; ++y) chi.set({x, y}, mod(chi({x, y}) + 2 * K.residues(x)[0] * K.residues(y)[1], 4));
    auto psi = pullback(glue, chi);
    std::vector<int> theta(hb.bimodule.carrier);
    for (int p = 0; p < hb.bimodule.carrier; ++p) theta[p] = hb.points[p].second;
    GroupoidHom id{g, g, {0, 1, 2, 3}};
    auto w = transported_witness(hb.bimodule, theta, glue, id, chi);
    CHECK_FALSE(witness_violation(hb.bimodule, w, psi, chi).has_value());
    auto tb = twisted_extension_bimodule(hb.bimodule, w, psi, chi);
    CHECK(verify_bimodule(tb.bimodule).ok());
  }
}

TEST_CASE("twisted Takai bimodules and the subequivalence") {
  for (auto a : all_actions()) {
    auto t = takai_equivalence(*a);
    auto C = crossed_product(*a);
    auto H2 = cohomology_group(C, 2, Coefficient::torus(4));
    std::mt19937_64 rng(11);
    Cochain chi = differential(random_cochain(C, 1, 4, rng));
    if (!H2.representatives.empty()) chi = chi + H2.representatives.front().at_level(4);
    INFO(a->target->name);
    auto tt = twisted_takai(t, C, chi);
    CHECK(tt.report.ok());
    for (const auto& v : tt.report.violations()) MESSAGE(v);
  }
}
