#include "doctest.h"
#include "tdual/bicomplex.hpp"
#include "tdual/cover.hpp"

using namespace tdual;

namespace {

Cochain heisenberg(GroupoidPtr g, i64 level) {
  // x0*y1 on (Z/2)^2, values at the given even level
  const auto K = FiniteGroup::abelian({2, 2});
  Cochain s = Cochain::zero(g, 2, level, true);
  for (int x = 0; x < 4; ++x)
    for (int y = 0; y < 4; ++y) s.set({x, y}, K.residues(x)[0] * K.residues(y)[1] * (level / 2));
  return s;
}

std::vector<std::shared_ptr<const Bimodule>> sample_bimodules() {
  std::vector<std::shared_ptr<const Bimodule>> out;
  out.push_back(std::make_shared<Bimodule>(identity_bimodule(group_groupoid(FiniteGroup::abelian({2, 2})))));
  out.push_back(std::make_shared<Bimodule>(identity_bimodule(pair_groupoid(3))));
  out.push_back(std::make_shared<Bimodule>(refine(group_groupoid(FiniteGroup::cyclic(3)), {{0}, {0}}).bimodule));
  out.push_back(std::make_shared<Bimodule>(refine(pair_groupoid(2), {{0, 1}, {1}}).bimodule));
  return out;
}

}  // namespace

TEST_CASE("bimodule differentials square to zero and commute") {
  std::mt19937_64 rng(3);
  for (auto& P : sample_bimodules()) {
    auto cx = BimoduleComplex::make(P, 3);
    for (int j = 0; j <= 1; ++j)
      for (int i = 0; i + j <= 1; ++i) {
        auto f = cx->random(j, i, 10, rng);
        CHECK(cx->delta_left(cx->delta_left(f)).is_zero());
        CHECK(cx->delta_right(cx->delta_right(f)).is_zero());
        CHECK(cx->delta_left(cx->delta_right(f)) == cx->delta_right(cx->delta_left(f)));
      }
  }
}

TEST_CASE("augmentations are chain maps") {
  std::mt19937_64 rng(4);
  for (auto& P : sample_bimodules()) {
    auto cx = BimoduleComplex::make(P, 3);
    for (int d = 0; d <= 2; ++d) {
      auto a = random_cochain(P->left, d, 6, rng);
      CHECK(cx->augment_left(differential(a)) == cx->delta_left(cx->augment_left(a)));
      auto b = random_cochain(P->right, d, 6, rng);
      CHECK(cx->augment_right(differential(b)) == cx->delta_right(cx->augment_right(b)));
      CHECK(cx->delta_right(cx->augment_left(a)).is_zero());
    }
  }
}

TEST_CASE("identity bimodule: augmentation is injective") {
  auto g = group_groupoid(FiniteGroup::cyclic(4));
  auto cx = BimoduleComplex::make(std::make_shared<Bimodule>(identity_bimodule(g)), 3);
  std::mt19937_64 rng(9);
  for (int rep = 0; rep < 10; ++rep) {
    auto a = random_cochain(g, 2, 4, rng);
    if (a.is_zero()) continue;
    CHECK(!cx->augment_left(a).is_zero());
  }
}

TEST_CASE("witness solver") {
  auto g = group_groupoid(FiniteGroup::abelian({2, 2}));
  auto cx = BimoduleComplex::make(std::make_shared<Bimodule>(identity_bimodule(g)), 2);
  auto zero = Cochain::zero(g, 2, 4, true);
  auto w0 = cohomologous_witness(zero, zero, cx);
  REQUIRE(w0);
  CHECK(witness_residual(*w0, zero, zero).ok());

  auto h = heisenberg(g, 2);
  REQUIRE(differential(h).is_zero());
  CHECK(!cohomologous_witness(Cochain::zero(g, 2, 2, true), h, cx));
  auto w = cohomologous_witness(h, h, cx);
  REQUIRE(w);
  CHECK(witness_residual(*w, h, h).ok());
  // a cohomologous pair: differs by a coboundary
  std::mt19937_64 rng(2);
  auto b = random_cochain(g, 1, 2, rng);
  auto h2 = h + differential(b);
  auto w2 = cohomologous_witness(h, h2, cx);
  REQUIRE(w2);
  CHECK(witness_residual(*w2, h, h2).ok());
}

TEST_CASE("refinement: a cocycle and its pullback are cohomologous") {
  auto g = group_groupoid(FiniteGroup::abelian({2, 2}));
  auto R = refine(g, {{0}, {0}, {0}});
  auto cx = BimoduleComplex::make(std::make_shared<Bimodule>(R.bimodule), 2);
  auto h = heisenberg(g, 4);
  GroupoidHom glue{R.groupoid, g, R.gluing};
  auto pulled = pullback(glue, h);
  auto w = cohomologous_witness(h, pulled, cx);
  REQUIRE(w);
  CHECK(witness_residual(*w, h, pulled).ok());
  CHECK(!cohomologous_witness(h, Cochain::zero(R.groupoid, 2, 4, true), cx));
}
