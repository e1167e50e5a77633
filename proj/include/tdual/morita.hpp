#pragma once
// Morita equivalences between finite groupoids: bimodule verification,
// bimodules of homomorphisms, the standard catalogue, equivariance and
// twisted (extension) bimodules.

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tdual/bicomplex.hpp"
#include "tdual/bimodule.hpp"
#include "tdual/cochain.hpp"
#include "tdual/constructions.hpp"
#include "tdual/cover.hpp"
#include "tdual/report.hpp"

namespace tdual {

/// Unital, associative, commuting actions respecting moments; both actions
/// free; both quotient maps bijective. Properness and local triviality are
/// listed as vacuous.
Report verify_bimodule(const Bimodule& P);

struct HomBimodule {
  GroupoidHom phi;
  Bimodule bimodule;                        // left: phi.source, right: phi.target
  std::vector<std::pair<int, int>> points;  // carrier -> (x, η) with r(η) = φ(x)
  Report report;
  bool essential = false;
};

/// P_φ = 𝒢₀ ×_{ℋ₀} ℋ₁ with γ.(x,η) = (rγ, φ(γ)η) and (x,η).η' = (x,ηη').
HomBimodule from_homomorphism(const GroupoidHom& phi);

/// Collapses each connected component to a point.
GroupoidHom component_quotient(GroupoidPtr g);

/// G acting on a groupoid through a quotient map G -> Q.
GroupAction inflate_action(const GroupAction& a, GroupPtr big, const std::vector<int>& proj);

/// G ⋉ G/N with the isotropy bimodule G between it and N.
struct IsotropyEquivalence {
  GroupoidPtr crossed;  // G ⋉ (G/N as a space)
  GroupoidPtr fiber;    // N as a one-object groupoid
  Bimodule bimodule;
};
IsotropyEquivalence isotropy_equivalence(const Subgroup& n);

/// Data of the bundle imprimitivity: ℋ = G ⋉ (G/N ⋊ 𝒢) and 𝒦 the N-gerbe
/// (extension by δρ̃, or the fibred product when no lift is used).
struct ImprimitivityData {
  GroupPtr group;
  Subgroup normal;
  QuotientGroup quotient;
  GroupValuedHom rho_bar;
  std::optional<std::vector<int>> lift;
  PrincipalBundle bundle;    // G/N ⋊ 𝒢 with the G/N translation
  GroupAction g_action;      // G acting on the bundle through G -> G/N
  GroupoidPtr H;             // crossed product, arrows (g,(t,γ))
  GroupoidPtr K;             // extension or fibred gerbe
  GroupValuedHom k_to_group; // (n,γ) -> nρ̃(γ), or (g,γ) -> g
  std::vector<int> k_to_base;  // K arrow -> 𝒢 arrow
  GroupoidHom iota;          // K -> H
  Bimodule bimodule;         // P = G × 𝒢₁, left H, right K
  bool fibred = false;
};

/// Builds the data; with no lift supplied the canonical lift is used unless
/// `force_fibred` is set.
ImprimitivityData imprimitivity_data(GroupPtr G, const Subgroup& N, const GroupValuedHom& rho_bar,
                                     std::optional<std::vector<int>> lift = std::nullopt,
                                     bool force_fibred = false);

enum class StandardKind { Refinement, Quotient, Iota, Kappa, BundleQuotient, Imprimitivity, Isotropy };

StandardKind standard_kind_from_string(const std::string& s);
std::string to_string(StandardKind k);

struct StandardData {
  GroupoidPtr base;                        // 𝒢
  std::vector<std::vector<int>> cover;     // refinement
  GroupPtr group;                          // G
  std::optional<Subgroup> normal;          // N
  std::optional<GroupValuedHom> rho_bar;   // 𝒢 -> G/N
  std::optional<std::vector<int>> lift;
  std::optional<GroupAction> free_action;  // quotient: N acting freely on a unit groupoid
  bool force_fibred = false;
};

struct StandardEquivalence {
  StandardKind kind;
  Bimodule bimodule;
  std::optional<GroupoidHom> hom;  // when the bimodule is P_φ
  Report report;
  std::string variant;  // "lift" or "fibred" where relevant
};

StandardEquivalence standard_equivalence(StandardKind kind, const StandardData& data);

/// g(γ p η) = g(γ) g(p) g(η) on every admissible triple; throws when the
/// bimodule carries no group actions.
Report equivariant_check(const Bimodule& P);

/// Moves a bimodule with G-actions to the crossed products:
/// (g,γ).(g',p) = (gg', γ.(g p)),  (g',p).(g'',η) = (g'g'', p.(g' η)).
/// Carrier (g',p) at g'*|P| + p.
Bimodule crossed_product_bimodule(const Bimodule& P, GroupoidPtr left_crossed, GroupoidPtr right_crossed);

/// Witness data as plain functions of (left arrow, carrier) and (carrier, right arrow).
struct WitnessFns {
  std::function<i64(int, int)> mu;
  std::function<i64(int, int)> nu;
};

WitnessFns witness_fns(const MoritaWitness& w);

/// First violated witness equation, if any, by exhaustive enumeration.
std::optional<std::string> witness_violation(const Bimodule& P, const WitnessFns& w, const Cochain& psi,
                                             const Cochain& chi);

/// Witness built from a carrier map Θ into a twisted groupoid (𝒜, c) with
/// Θ(γp) = A(γ)Θ(p) and Θ(pk) = Θ(p)B(k): μ(γ,p) = c(Aγ, Θp), ν(p,k) = c(Θp, Bk).
/// Here ψ = A*c and χ = B*c. Throws when Θ fails the identities.
WitnessFns transported_witness(const Bimodule& P, const std::vector<int>& theta, const GroupoidHom& A,
                               const GroupoidHom& B, const Cochain& c);

struct TwistedBimodule {
  GroupoidPtr left_ext;   // Z/L ⋊^ψ left, arrows (m,h) at m*|left| + h
  GroupoidPtr right_ext;  // Z/L ⋊^χ right
  Bimodule bimodule;      // carrier (m,p) at m*|P| + p
  i64 level = 1;
};

/// Carrier M × P with (m1,h)(m2,p) = (m1+m2+μ(h,p), hp) and
/// (m1,p)(m2,k) = (m1+m2+ν(p,k), pk). Throws naming the first violated
/// witness equation.
TwistedBimodule twisted_extension_bimodule(const Bimodule& P, const WitnessFns& w, const Cochain& psi,
                                           const Cochain& chi, bool check_witness = true);
TwistedBimodule twisted_extension_bimodule(const Bimodule& P, const MoritaWitness& w, const Cochain& psi,
                                           const Cochain& chi);

/// The central copy of Z/L acts identically from both sides.
Report check_central(const TwistedBimodule& tb);

/// The Takai equivalence between ℋ and G ⋊_q (G ⋉ ℋ).
struct TakaiEquivalence {
  InducedTakai induced;
  HomBimodule hom;   // P_φ, left ℋ, right induced
  Bimodule bimodule; // P_φ with G-actions g.(1,h,γ) = (1,gh,gγ)
  bool phi_equivariant = false;
  Report report;
};

TakaiEquivalence takai_equivalence(const GroupAction& a);

/// Group homomorphism (g,h,γ) -> (h,γ) from the induced groupoid onto G ⋉ ℋ.
GroupoidHom takai_projection(const InducedTakai& t, GroupoidPtr crossed);

/// Twisted Takai duality for a cocycle χ on G ⋉ ℋ (level L):
///   first:  Z/L ⋊^χ' induced  ~  Z/L ⋊^σ ℋ, σ = χ restricted to ℋ,
///   second: Z/L ⋊^χ'' (G ⋉ induced)  ~  Z/L ⋊^χ (G ⋉ ℋ),
/// with χ' and χ'' pulled back along the projections, and the first
/// recovered inside the second over the identity of G.
struct TwistedTakai {
  GroupoidPtr crossed;          // G ⋉ ℋ
  Cochain chi, sigma, chi_induced, chi_crossed_induced;
  Bimodule first_plain;         // left induced, right ℋ
  TwistedBimodule first;
  GroupoidPtr crossed_induced;  // G ⋉ induced
  Bimodule second_plain;        // carrier (g,p) at g*|first| + p
  std::optional<TwistedBimodule> second;
  Report report;
};

TwistedTakai twisted_takai(const TakaiEquivalence& t, GroupoidPtr crossed, const Cochain& chi,
                           bool build_second = true);

/// Ĝ-actions for abelian G at level L: shifts by <φ,g> on the extension
/// Z/L ⋊^ψ (G ⋉ ...) given g(arrow) for arrows of the underlying groupoid.
GroupAction dual_shift_action(GroupPtr dual_group, const DualGroup& pairing, GroupoidPtr ext, int base_arrows,
                              i64 level, const std::function<int(int)>& group_part);

}  // namespace tdual
