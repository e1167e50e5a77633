#pragma once
// Small actions used across unit tests.

#include <memory>
#include <vector>

#include "tdual/equivariant.hpp"

namespace testsupport {

using namespace tdual;

// Z/2 swapping the two objects of the pair groupoid.
inline ActionPtr swap_pair() {
  auto G = std::make_shared<FiniteGroup>(FiniteGroup::cyclic(2));
  auto H = pair_groupoid(2);
  std::vector<int> act(2 * 4);
  for (int a = 0; a < 4; ++a) {
    act[a] = a;
    int i = a / 2, j = a % 2;
    act[4 + a] = (1 - i) * 2 + (1 - j);
  }
  return std::make_shared<GroupAction>(make_action(G, H, act));
}

// Z/2 exchanging the factors of (Z/2)^2 viewed as a one-object groupoid.
inline ActionPtr flip_klein() {
  auto G = std::make_shared<FiniteGroup>(FiniteGroup::cyclic(2));
  auto K = FiniteGroup::abelian({2, 2});
  auto H = group_groupoid(K);
  std::vector<int> act(2 * 4);
  for (int a = 0; a < 4; ++a) {
    act[a] = a;
    auto r = K.residues(a);
    act[4 + a] = K.from_residues({r[1], r[0]});
  }
  return std::make_shared<GroupAction>(make_action(G, H, act));
}

// Z/3 rotating three unit objects.
inline ActionPtr rotate_units() {
  auto G = std::make_shared<FiniteGroup>(FiniteGroup::cyclic(3));
  auto H = unit_groupoid(3);
  std::vector<int> act(3 * 3);
  for (int g = 0; g < 3; ++g)
    for (int x = 0; x < 3; ++x) act[g * 3 + x] = (x + g) % 3;
  return std::make_shared<GroupAction>(make_action(G, H, act));
}

// Z/4 acting on the pair groupoid on 2 objects through Z/4 -> Z/2.
inline ActionPtr z4_on_pair() {
  auto G = std::make_shared<FiniteGroup>(FiniteGroup::cyclic(4));
  auto H = pair_groupoid(2);
  std::vector<int> act(4 * 4);
  for (int g = 0; g < 4; ++g)
    for (int a = 0; a < 4; ++a) {
      int i = a / 2, j = a % 2;
      act[g * 4 + a] = g % 2 ? (1 - i) * 2 + (1 - j) : a;
    }
  return std::make_shared<GroupAction>(make_action(G, H, act));
}

// Trivial action of Z/2 on Z/3.
inline ActionPtr trivial_on_z3() {
  auto G = std::make_shared<FiniteGroup>(FiniteGroup::cyclic(2));
  return std::make_shared<GroupAction>(trivial_action(G, group_groupoid(FiniteGroup::cyclic(3))));
}

inline std::vector<ActionPtr> all_actions() {
  return {swap_pair(), flip_klein(), rotate_units(), z4_on_pair(), trivial_on_z3()};
}

struct BundleFixture {
  GroupPtr G;
  Subgroup N;
  QuotientGroup Q;
  GroupValuedHom rho_bar;
};

// G ⊃ N over the two-chart point cover (pair groupoid on 2 objects) with
// transition t in G/N on the arrow 0 <- 1 (and t^-1 on 1 <- 0).
inline BundleFixture bundle_over_two_charts(FiniteGroup g, std::vector<int> n_elems, int t_ambient) {
  BundleFixture f;
  f.G = std::make_shared<FiniteGroup>(std::move(g));
  f.N = make_subgroup(f.G, std::move(n_elems));
  f.Q = quotient(f.N);
  int t = f.Q.proj[t_ambient];
  f.rho_bar.source = pair_groupoid(2);
  f.rho_bar.target = f.Q.group;
  f.rho_bar.map = {f.Q.group->id, t, f.Q.group->inverse(t), f.Q.group->id};
  return f;
}

inline BundleFixture z4_mobius() { return bundle_over_two_charts(FiniteGroup::cyclic(4), {0, 2}, 1); }
inline BundleFixture z4_trivial() { return bundle_over_two_charts(FiniteGroup::cyclic(4), {0, 2}, 0); }
// Q8 with N = {±1}, transition the class of i.
inline BundleFixture q8_center() { return bundle_over_two_charts(FiniteGroup::quaternion(), {0, 1}, 2); }

}  // namespace testsupport
