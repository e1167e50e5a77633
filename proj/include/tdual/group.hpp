#pragma once
// Finite groups as dense multiplication tables, subgroups, quotients and
// Pontryagin duals of abelian groups.

#include <memory>
#include <string>
#include <vector>

#include "tdual/report.hpp"

namespace tdual {

struct FiniteGroup {
  int order = 1;
  std::vector<int> mult{0};  // mult[a*order + b] = ab
  std::vector<int> inv{0};
  int id = 0;
  // Invariant factors when the group is abelian and elements are mixed-radix
  // residue tuples (first factor most significant). Empty otherwise.
  std::vector<int> factors;
  std::string name;

  int mul(int a, int b) const { return mult[std::size_t(a) * order + b]; }
  int inverse(int a) const { return inv[a]; }
  int conj(int g, int n) const { return mul(mul(g, n), inv[g]); }  // g n g^-1
  bool is_abelian() const;
  int element_order(int g) const;
  int exponent() const;
  std::vector<int> residues(int g) const;
  int from_residues(const std::vector<int>& r) const;

  static FiniteGroup trivial();
  static FiniteGroup cyclic(int n);
  static FiniteGroup abelian(const std::vector<int>& factors);
  static FiniteGroup quaternion();
  static FiniteGroup dihedral(int n);  // order 2n
  static FiniteGroup from_table(int order, std::vector<int> mult, std::vector<int> factors = {});
};

using GroupPtr = std::shared_ptr<const FiniteGroup>;

Report validate_group(const FiniteGroup& g);

FiniteGroup direct_product(const FiniteGroup& a, const FiniteGroup& b);

/// A subgroup given by an element subset, with its own abstract group structure.
struct Subgroup {
  GroupPtr ambient;
  std::vector<int> elements;  // sorted; embedding of the abstract group
  std::vector<int> index_of;  // ambient element -> subgroup index or -1
  GroupPtr group;             // abstract group, elements follow `elements`
  bool normal = false;

  bool contains(int g) const { return index_of[g] >= 0; }
};

/// Builds the subgroup on `elements`; throws if not closed under products.
Subgroup make_subgroup(GroupPtr g, std::vector<int> elements);
Subgroup center(GroupPtr g);
Subgroup whole_group(GroupPtr g);
Subgroup trivial_subgroup(GroupPtr g);

struct QuotientGroup {
  GroupPtr group;          // G/N
  std::vector<int> proj;   // G -> G/N
  std::vector<int> rep;    // least-index coset representative
  int ambient_id = 0;
};

/// Quotient by a normal subgroup; throws if not normal.
QuotientGroup quotient(const Subgroup& n);

/// Relabels an abelian group as a product of cyclic groups: returns the
/// relabelled group and the map old element -> new element.
std::pair<FiniteGroup, std::vector<int>> abelian_normal_form(const FiniteGroup& g);

/// Characters of an abelian group with factors n_i, labelled by residue tuples.
struct DualGroup {
  std::vector<int> factors;
  int exponent = 1;
  int order = 1;

  explicit DualGroup(const FiniteGroup& g);
  /// <phi, g> = value / exponent  (mod 1).
  int pairing(int phi, int g) const;
  FiniteGroup as_group() const { return FiniteGroup::abelian(factors); }
};

}  // namespace tdual
