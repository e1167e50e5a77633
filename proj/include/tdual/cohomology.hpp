#pragma once
// Cohomology of finite groupoids with constant coefficients, computed from
// local Smith forms of the normalized bar differentials.

#include <functional>
#include <memory>
#include <vector>

#include "tdual/cochain.hpp"

namespace tdual {

struct Coefficient {
  enum class Kind { FiniteAbelian, Torus };
  Kind kind = Kind::Torus;
  std::vector<i64> factors;  // finite-abelian: invariant factors
  i64 level = 0;             // torus: denominator bound L

  static Coefficient cyclic(i64 n) { return {Kind::FiniteAbelian, {n}, 0}; }
  static Coefficient finite(std::vector<i64> f) { return {Kind::FiniteAbelian, std::move(f), 0}; }
  static Coefficient torus(i64 level) { return {Kind::Torus, {}, level}; }
};

/// Lcm of the isotropy group orders.
i64 isotropy_exponent(const FiniteGroupoid& g);

struct CohomologyGroup {
  int degree = 0;
  Coefficient coeff;
  std::vector<i64> invariant_factors;  // d1 | d2 | ..., each > 1
  std::vector<Cochain> representatives;  // one closed cochain per factor
  // working modulus for coboundaries (torus: L * isotropy exponent)
  i64 working_modulus = 1;

  i64 order() const;
  /// Coordinates of a closed cochain against the representatives.
  std::vector<i64> class_of(const Cochain& c) const;

  std::function<std::vector<i64>(const Cochain&)> class_fn;
  std::vector<CohomologyGroup> components;  // per factor, for several finite factors
};

/// H^n(g; coeff). Torus classes at level L are read inside the Z/(L e)
/// cohomology, e the isotropy exponent, so coboundaries of finer cochains count.
CohomologyGroup cohomology_group(GroupoidPtr g, int n, const Coefficient& coeff);

/// Whether a closed torus cochain is a coboundary of some circle-valued
/// cochain (searched at its level times the isotropy exponent).
std::optional<Cochain> torus_coboundary_witness(const Cochain& c);

}  // namespace tdual
