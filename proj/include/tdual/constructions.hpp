#pragma once
// Derived groupoids: crossed products, principal bundles, extensions by
// nonabelian cocycles, fibred-product gerbes and induced Takai groupoids.

#include <optional>
#include <string>
#include <vector>

#include "tdual/group.hpp"
#include "tdual/groupoid.hpp"
#include "tdual/report.hpp"

namespace tdual {

/// Homomorphism from a groupoid into a group, arrow -> element.
struct GroupValuedHom {
  GroupoidPtr source;
  GroupPtr target;
  std::vector<int> map;
};

/// Homomorphism between groupoids, arrow -> arrow.
struct GroupoidHom {
  GroupoidPtr source;
  GroupoidPtr target;
  std::vector<int> map;
};

Report check_functorial(const GroupValuedHom& h);
Report check_functorial(const GroupoidHom& h);
GroupoidHom compose_hom(const GroupoidHom& second, const GroupoidHom& first);

/// Cocycle pair (sigma, tau) for the constant bundle of groups with fiber N.
struct NonabelianCocycle {
  GroupoidPtr groupoid;
  GroupPtr fiber;
  std::vector<int> sigma;  // indexed by composable pair (nerve degree 2)
  std::vector<int> tau;    // tau[arrow * |N| + n] = tau(arrow)(n)

  int sig(int a, int b) const;
  int t(int a, int n) const { return tau[std::size_t(a) * fiber->order + n]; }
};

Report check_nonabelian_cocycle(const NonabelianCocycle& c);
/// sigma with trivial tau (abelian fiber acting trivially).
NonabelianCocycle central_cocycle(GroupoidPtr g, GroupPtr fiber, std::vector<int> sigma);

/// Arrows of the crossed product G ⋉ 𝒢: (g, γ) at index g*|𝒢₁| + γ.
GroupoidPtr crossed_product(const GroupAction& a);

struct PrincipalBundle {
  GroupoidPtr groupoid;     // objects (g,x) at g*|𝒢₀|+x, arrows (g,γ) at g*|𝒢₁|+γ
  GroupAction translation;  // k.(g,γ) = (kg,γ)
};

PrincipalBundle principal_bundle(const GroupValuedHom& rho);

/// Arrows (n,γ) at index n*|𝒢₁| + γ with the twisted multiplication.
GroupoidPtr extension(const NonabelianCocycle& c);

/// (σ,τ) = (δρ̃, ad ρ̃) for a unit-normalized map ρ̃ : 𝒢₁ → G landing in N.
NonabelianCocycle delta_rho(GroupoidPtr g, const Subgroup& n, const std::vector<int>& rho_tilde);

struct FibredGerbe {
  GroupoidPtr groupoid;                     // arrows (g,γ) with gN = ρ̄(γ)
  std::vector<std::pair<int, int>> arrows;  // index -> (g, γ)
  std::vector<int> index;                   // [g*|𝒢₁| + γ] -> arrow or -1
  // extension arrow (n,γ) -> fibred arrow (nρ̃(γ),γ), when a lift was supplied
  std::optional<std::vector<int>> from_extension;
};

FibredGerbe fibred_gerbe(const Subgroup& n, const QuotientGroup& q, const GroupValuedHom& rho_bar,
                         const std::vector<int>* lift = nullptr);

/// Least-index coset representatives with units sent to the identity.
std::vector<int> canonical_lift(const GroupValuedHom& rho_bar, const QuotientGroup& q);
/// Every unit-normalized lift, up to `limit`.
std::vector<std::vector<int>> all_lifts(const GroupValuedHom& rho_bar, const QuotientGroup& q, std::size_t limit);

struct InducedTakai {
  GroupoidPtr groupoid;     // arrows (g,h,γ) at (g*|G|+h)*|ℋ₁|+γ, objects (g,x) at g*|ℋ₀|+x
  GroupAction translation;  // k.(g,h,γ) = (kg,h,γ)
  GroupoidHom embedding;    // γ -> (1,1,γ)
};

InducedTakai induced_takai(const GroupAction& a);

}  // namespace tdual
