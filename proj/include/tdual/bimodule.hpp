#pragma once
// Finite two-sided modules: a carrier with moment maps to a left and a right
// groupoid and sparse action tables.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tdual/groupoid.hpp"

namespace tdual {

struct Bimodule {
  GroupoidPtr left;
  GroupoidPtr right;
  int carrier = 0;
  std::vector<int> lmoment;  // carrier -> left objects
  std::vector<int> rmoment;  // carrier -> right objects
  // lact[loff[p] + left->rank_from(g)] = g.p  for s(g) = lmoment[p]
  std::vector<int> loff, lact;
  // ract[roff[p] + right->rank_into(h)] = p.h  for r(h) = rmoment[p]
  std::vector<int> roff, ract;

  // Optional equivariance data: a group acting on both groupoids and the carrier.
  std::optional<GroupAction> gleft;
  std::optional<GroupAction> gright;
  std::vector<int> gcarrier;  // [g * carrier + p]

  // Optional section of the left moment map (left object -> carrier).
  std::vector<int> left_section;
  std::string name;

  int left_act(int g, int p) const {
    if (left->src(g) != lmoment[p]) return -1;
    return lact[loff[p] + left->rank_from(g)];
  }
  int right_act(int p, int h) const {
    if (right->dst(h) != rmoment[p]) return -1;
    return ract[roff[p] + right->rank_into(h)];
  }
  bool equivariant_data() const { return gleft.has_value() && gright.has_value() && !gcarrier.empty(); }
  int gact(int g, int p) const { return gcarrier[std::size_t(g) * carrier + p]; }
};

/// Fills action tables by calling the rules on every admissible pair.
Bimodule make_bimodule(GroupoidPtr left, GroupoidPtr right, int carrier, std::vector<int> lmoment,
                       std::vector<int> rmoment, const std::function<int(int, int)>& left_rule,
                       const std::function<int(int, int)>& right_rule, std::string name = {});

/// The groupoid over itself with carrier its arrows.
Bimodule identity_bimodule(GroupoidPtr g);

/// Swaps the roles of the two sides (carrier unchanged, actions inverted).
Bimodule opposite(const Bimodule& p);

}  // namespace tdual
