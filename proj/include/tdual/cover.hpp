#pragma once
// Covered spaces, Čech groupoids, refinements and point restrictions.

#include <vector>

#include "tdual/bimodule.hpp"
#include "tdual/groupoid.hpp"

namespace tdual {

struct CoveredBase {
  int base_points = 0;
  std::vector<std::vector<int>> cover;
};

struct Refinement {
  GroupoidPtr groupoid;
  std::vector<std::pair<int, int>> objects;  // refined object -> (member, original object)
  std::vector<int> gluing;                   // refined arrow -> original arrow
  Bimodule bimodule;                         // left: original, right: refined
};

/// Objects (i,m) for m in U_i, arrows (i,j,m) for m in U_i ∩ U_j.
GroupoidPtr cech_groupoid(const CoveredBase& cb);

/// Refinement of g along a cover of its objects, with the equivalence bimodule.
Refinement refine(GroupoidPtr g, std::vector<std::vector<int>> cover);

/// Full subgroupoid on the objects assigned to base point m.
GroupoidPtr restrict_to_point(const FiniteGroupoid& g, int m);

}  // namespace tdual
