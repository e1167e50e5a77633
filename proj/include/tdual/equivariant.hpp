#pragma once
// Equivariant cochains C^p(G; C^q(H)) for a finite group acting on a finite
// groupoid, the total complex and the chain map into the crossed product.

#include <memory>
#include <random>
#include <vector>

#include "tdual/cochain.hpp"
#include "tdual/report.hpp"

namespace tdual {

using ActionPtr = std::shared_ptr<const GroupAction>;

/// Bidegree (p,q) cochain: values[gtuple * |H_q| + t], gtuple in mixed radix
/// with the first group element most significant.
struct EqCochain {
  ActionPtr action;
  int p = 0, q = 0;
  i64 modulus = 1;
  std::vector<i64> values;

  static EqCochain zero(ActionPtr a, int p, int q, i64 modulus);
  std::size_t groupoid_count() const;
  std::size_t group_count() const;
  i64 at(const std::vector<int>& g, std::size_t t) const;
  void set(const std::vector<int>& g, std::size_t t, i64 v);
  /// The q-cochain on H attached to a tuple of group elements.
  Cochain slice(const std::vector<int>& g) const;
  bool normalized() const;
  bool is_zero() const;
  EqCochain operator+(const EqCochain& o) const;
  EqCochain operator-(const EqCochain& o) const;
  bool operator==(const EqCochain& o) const { return p == o.p && q == o.q && values == o.values; }
};

/// A degree-n element of the total complex: parts[p] has bidegree (p, n-p).
struct TotalCochain {
  ActionPtr action;
  int degree = 0;
  i64 modulus = 1;
  std::vector<EqCochain> parts;

  static TotalCochain zero(ActionPtr a, int n, i64 modulus);
  bool is_zero() const;
};

/// Group-cohomology differential on the G-module C^q(H), (g.f)(h) = f(g^-1 h).
EqCochain group_differential(const EqCochain& c);
/// Groupoid differential applied slice-wise.
EqCochain groupoid_differential(const EqCochain& c);
/// D = d + (-1)^p delta.
TotalCochain total_differential(const TotalCochain& t);

EqCochain random_eq_cochain(ActionPtr a, int p, int q, i64 modulus, std::mt19937_64& rng);
TotalCochain random_total(ActionPtr a, int n, i64 modulus, std::mt19937_64& rng);

/// Torus-valued equivariant 2-cochain (sigma, lambda, beta) at a common level.
struct EquivariantCocycle {
  ActionPtr action;
  Cochain sigma;     // degree 2 on H
  EqCochain lambda;  // bidegree (1,1)
  EqCochain beta;    // bidegree (2,0)

  TotalCochain total() const;
};

/// Trivial lambda and beta.
EquivariantCocycle untwisted_equivariant(ActionPtr a, const Cochain& sigma);
/// Slot-by-slot check of D(sigma, lambda, beta) = 0.
Report check_equivariant_cocycle(const EquivariantCocycle& c);

/// F: tot K -> C(G ⋉ H). `crossed` must be crossed_product(*t.action).
Cochain chain_map_F(const TotalCochain& t, GroupoidPtr crossed);

/// chi((g1,h1),(g2,g1^-1 h2)) = sigma(h1,h2) + lambda(g1,h2) + beta(g1,g2,s h2).
Cochain crossed_twist(const EquivariantCocycle& c, GroupoidPtr crossed);

}  // namespace tdual
