#pragma once
// End-to-end duality procedures on G-equivariant gerbes over generalized
// principal G/N-bundles: imprimitivity, classical and nonabelian
// T-dualization, Takai reconstruction, Mackey obstruction and fibers.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "tdual/equivariant.hpp"
#include "tdual/morita.hpp"
#include "tdual/star_algebra.hpp"

namespace tdual {

/// (G/N ⋊_ρ̄ 𝒢, (σ,λ,β)) with G acting through G -> G/N by translation.
struct BundleGerbeData {
  std::string name;
  GroupPtr group;
  Subgroup normal;
  QuotientGroup quotient;
  GroupValuedHom rho_bar;  // 𝒢 -> quotient.group
  PrincipalBundle bundle;  // objects (t,x) at t*|𝒢₀|+x
  ActionPtr action;        // G on bundle.groupoid
  EquivariantCocycle cocycle;
  std::optional<std::vector<int>> lift;
  bool force_fibred = false;

  i64 level() const { return cocycle.sigma.modulus; }
  GroupoidPtr base() const { return rho_bar.source; }
};

/// Trivial cocycle at level L. `transition` uses the labels of quotient(N).
BundleGerbeData make_bundle_gerbe(GroupPtr G, const Subgroup& N, GroupoidPtr base, const std::vector<int>& transition,
                                  i64 level, std::string name = {});

/// ρ̄ functorial and (σ,λ,β) equivariantly closed.
Report check_bundle_gerbe(const BundleGerbeData& b);

/// β(g1,g2,x) = ω(g1,g2) for a normalized 2-cocycle ω on G (by pair g1*|G|+g2).
void set_constant_beta(BundleGerbeData& b, const std::vector<i64>& omega);

/// ω(g,h) = g_i h_j · L / gcd(n_i, n_j) on an abelian group in residue form.
std::vector<i64> bilinear_group_cocycle(const FiniteGroup& G, int i, int j, i64 level);

/// Adds D of a total 1-cochain (a gauge transformation of the class).
void add_total_coboundary(BundleGerbeData& b, const TotalCochain& c);

/// Normal subgroups of a small group, by closure of at most two generators.
std::vector<Subgroup> normal_subgroups(GroupPtr G);

struct PipelineOptions {
  BlockOptions blocks;
  bool compute_blocks = true;
  bool build_second_takai = true;
};

/// Named groupoid produced by a step, with its twist.
struct Artifact {
  std::string step;
  std::string role;
  std::string groupoid;
  int objects = 0;
  int arrows = 0;
  i64 level = 0;
  std::string twist;
};

struct DualityReport {
  std::string kind;
  std::string subject;
  std::vector<Artifact> artifacts;
  Report checks;
  std::map<std::string, std::vector<int>> blocks;
  std::map<std::string, int> k0_ranks;
  std::vector<std::string> notes;
  std::uint64_t seed = 0;
  i64 level = 0;

  bool ok() const { return checks.ok(); }
  std::string render() const;
};

/// The K-theory degree shift needs a Connes–Thom hypothesis that finite
/// groups fail; always throws std::logic_error naming the group.
[[noreturn]] void claim_k_degree_shift(const DualityReport& r, const FiniteGroup& G);

/// Ĝ-actions (abelian G) on both twisted extensions and on the carrier.
struct DualActions {
  GroupPtr dual_group;
  Bimodule bimodule;  // twisted bimodule with gleft, gright, gcarrier
  Report report;
};

struct Imprimitivity {
  ImprimitivityData data;
  Cochain psi;  // on data.H
  Cochain chi;  // on data.K, ι*ψ
  TwistedBimodule twisted;
  std::optional<DualActions> dual_actions;
  DualityReport report;
};

/// (ℋ,ψ) ~ (𝒦,χ) with ψ = F(σ,λ,β), χ = ι*ψ and the twisted bimodule over P = G × 𝒢₁.
Imprimitivity imprimitivity(const BundleGerbeData& b, const PipelineOptions& opt = {});

/// Right 𝒦-module G × 𝒦₀ with (g,x)·k = (g κ(k), s k), κ = k_to_group.
struct CanonicalModule {
  GroupValuedHom kappa;
  Bimodule module;  // left: G as a one-object groupoid, right: 𝒦
  Report report;
};

CanonicalModule canonical_module(const ImprimitivityData& d);

struct NonabelianDual {
  std::shared_ptr<const BundleGerbeData> source;
  Imprimitivity imp;
  GroupoidPtr gerbe;  // 𝒦
  Cochain chi;        // ι*ψ
  CanonicalModule module;
  DualityReport report;
};

NonabelianDual nonabelian_tdualize(const BundleGerbeData& b, const PipelineOptions& opt = {});

struct ClassicalDual {
  BundleGerbeData dual;           // (N̂ ⋊_λ̄ 𝒢, (σ∨, ρ, 1)) over Ĝ
  Imprimitivity steps;            // Steps 1-2
  std::vector<int> lambda_bar;    // 𝒢 arrow -> N̂ (residue labels of the normal form of N)
  std::vector<int> n_normal_form; // N label -> residue label
  PontryaginDual fourier;         // Step 3 on (𝒢, N̂, -λ̄, δρ, ν)
  Cochain gauge;                  // b(n,γ) = <λ̄(γ), n> on 𝒦
  DualityReport report;
};

/// Throws std::invalid_argument for nonabelian G, nontrivial β or a level
/// not divisible by the exponent of G.
ClassicalDual classical_tdualize(const BundleGerbeData& b, const PipelineOptions& opt = {});

struct DoubleDual {
  ClassicalDual first;
  ClassicalDual second;
  std::vector<int> transition_witness;  // 𝒢₀ -> quotient of the double dual
  std::optional<Cochain> gerbe_witness; // σ - Φ*σ∨∨ = δb
  std::optional<Cochain> crossed_witness;
  DualityReport report;
};

DoubleDual classical_double_dual(const BundleGerbeData& b, const PipelineOptions& opt = {});

/// Both twisted Takai bimodules on (bundle, G, ψ), the subequivalence, and
/// the groupoid induced by the canonical module of the dual recovered as a
/// twisted Morita equivalence with the input.
DualityReport takai_reconstruct(const NonabelianDual& dual, const PipelineOptions& opt = {});

struct MackeyPoint {
  int object = 0;
  Cochain restricted;  // on N as a one-object groupoid
  bool trivial = false;
  std::optional<Cochain> witness;
  std::vector<i64> class_coordinates;
};

struct MackeyObstruction {
  std::vector<MackeyPoint> points;  // one per object of 𝒢
  bool trivial = true;
  DualityReport report;
};

MackeyObstruction mackey_obstruction(const NonabelianDual& dual);
MackeyObstruction mackey_obstruction(const BundleGerbeData& b);

struct FiberAnalysis {
  int point = 0;
  GroupoidPtr fiber;        // 𝒦 restricted to the objects over the point
  Cochain fiber_twist;
  GroupoidPtr group;        // N as a one-object groupoid
  Cochain group_twist;      // φ*χ
  std::vector<int> blocks;  // of C*(N, φ*χ)
  std::vector<int> untwisted_blocks;
  bool essential = false;
  DualityReport report;
};

/// Objects over base point m (or object m when 𝒢 carries no base points).
FiberAnalysis fiber_analysis(const NonabelianDual& dual, int m, const PipelineOptions& opt = {});

}  // namespace tdual
