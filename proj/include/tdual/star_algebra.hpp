#pragma once
// Twisted groupoid *-algebras with exact structure constants, their centers
// and Wedderburn blocks, K0, Pontryagin/Fourier duality and the Hilbert
// bimodule of a projective unitary assignment.

#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tdual/cochain.hpp"
#include "tdual/constructions.hpp"
#include "tdual/cyclotomic.hpp"
#include "tdual/groupoid.hpp"
#include "tdual/report.hpp"

namespace tdual {

/// Sparse element Σ c_a δ_a with exact coefficients.
using AlgebraElement = std::map<int, Cyclotomic>;

/// C*(𝒢, σ) on the δ-basis: δ_a δ_b = ζ^{σ(a,b)} δ_{ab} with ζ = exp(2πi/level),
/// δ_a* = ζ^{-σ(a⁻¹,a)} δ_{a⁻¹}.
struct StarAlgebra {
  GroupoidPtr groupoid;
  i64 level = 1;
  std::vector<i64> twist;  // by nerve index of composable pairs

  int dimension() const { return groupoid->arrows(); }
  i64 phase(int a, int b) const;
  /// (ab, exponent), or (-1, 0) when a and b are not composable.
  std::pair<int, i64> product(int a, int b) const;
  std::pair<int, i64> star(int a) const;

  AlgebraElement basis(int a, i64 k = 0) const;
  AlgebraElement multiply(const AlgebraElement& x, const AlgebraElement& y) const;
  AlgebraElement adjoint(const AlgebraElement& x) const;
  /// Σ_x δ_{1_x} corrected by the twist on units.
  AlgebraElement unit() const;
};

bool equal(const AlgebraElement& x, const AlgebraElement& y);
AlgebraElement scaled(const AlgebraElement& x, i64 s);
AlgebraElement plus(const AlgebraElement& x, const AlgebraElement& y);

/// Throws naming a failing triple when σ is not closed.
StarAlgebra twisted_algebra(const Cochain& sigma);
StarAlgebra twisted_algebra(GroupoidPtr g, const Cochain& sigma, i64 level);
StarAlgebra untwisted_algebra(GroupoidPtr g);

/// Associativity on basis triples, involution an anti-automorphism with *² = id.
Report check_star_algebra(const StarAlgebra& a);

/// Central element Σ ζ^k δ_a with pairwise distinct arrows.
struct CentralElement {
  std::vector<std::pair<int, i64>> terms;
};

/// Exact basis of the center. The commutation equations with each δ_η only
/// relate two coefficients by a root of unity or force one to vanish, so the
/// solution space splits over the classes they connect.
std::vector<CentralElement> center_basis(const StarAlgebra& a);

struct BlockOptions {
  std::uint64_t seed = 1;
  double tolerance = 1e-9;
  double gap_ratio = 1e3;
  int attempts = 8;
  bool reduce = true;  // split over components and work on isotropy algebras
};

struct BlockDecomposition {
  std::vector<int> sizes;  // sorted
  int center_dimension = 0;
  std::uint64_t seed = 0;
  int attempts = 0;
  std::string method;
  double max_residual = 0;  // worst distance of n² to an integer
  Report report;
};

/// Wedderburn block sizes; throws std::runtime_error when the spectral split
/// stays ambiguous after all attempts.
BlockDecomposition block_decomposition(const StarAlgebra& a, const BlockOptions& opt = {});

struct K0Group {
  int rank = 0;
  std::vector<int> order_unit;
  std::string positive_cone;
};

K0Group k0(const BlockDecomposition& b);

/// δ_γ -> ζ^{-b(γ)} δ_γ from C*(𝒢,σ) onto C*(𝒢,σ+δb), checked on all basis pairs.
struct GaugeIsomorphism {
  StarAlgebra source;
  StarAlgebra target;
  std::vector<i64> phase;
  Report report;
};

GaugeIsomorphism gauge_isomorphism(const Cochain& sigma, const Cochain& b);

/// Pontryagin duality data over an abelian group G given in residue form.
struct PontryaginData {
  GroupoidPtr groupoid;
  GroupPtr group;
  std::vector<int> rho;  // arrow -> G, a homomorphism
  std::vector<int> f;    // composable pair -> Ĝ (character index), closed
  Cochain nu;            // torus 2-cochain

  int f_at(int a, int b) const;
};

/// ρ, f closed and δν(γ1,γ2,γ3) = -<f(γ2,γ3), ρ(γ1)>.
Report check_pontryagin_data(const PontryaginData& pd);

struct PontryaginDual {
  PrincipalBundle bundle;   // G ⋊_ρ 𝒢, arrows (g,γ) at g*|𝒢₁|+γ
  Cochain sigma;            // ν(γ1,γ2) + <f(γ1,γ2), g>
  GroupPtr dual_group;      // Ĝ with the residue labelling of characters
  GroupoidPtr gerbe;        // Ĝ ⋊^f 𝒢, arrows (φ,γ) at φ*|𝒢₁|+γ
  Cochain tau;              // ν(γ1,γ2) + <φ2, ρ(γ1)>
  StarAlgebra primal;
  StarAlgebra dual;         // products carry the measure 1/|G|
  i64 level = 1;
  int group_order = 1;
  Report report;

  /// ℱ(δ_(g,γ)) = Σ_φ <φ,g>⁻¹ δ_(φ,γ).
  AlgebraElement fourier(int arrow) const;
  AlgebraElement fourier(const AlgebraElement& x) const;
  /// |G|·ℱ⁻¹(δ_(φ,γ)) = Σ_g <φ,g> δ_(g,γ).
  AlgebraElement inverse_fourier_scaled(int arrow) const;
};

/// Builds both twisted groupoids and verifies ℱ exactly: multiplicative
/// against the dual measure, *-preserving, invertible, and exchanging
/// translation with dual translation.
PontryaginDual pontryagin_dualize(const PontryaginData& pd);

/// (ρ+δβ, f+δα, ν') with ν'(γ1,γ2) = c + ν - <f(γ1,γ2), β(rγ1)> + <α(γ2), ρ'(γ1)>.
PontryaginData gauge_transform(const PontryaginData& pd, const std::vector<int>& alpha,
                               const std::vector<int>& beta, const Cochain& c);

/// Hilbert bimodule over C_c(𝒢₁; C^d) between the section algebra of ad T
/// and C*(𝒢, σ) with σ = (δT)⁻¹, checked on the δ-basis.
struct HilbertBimoduleCheck {
  Report report;
  std::vector<std::complex<double>> sigma;  // by composable pair
  std::optional<Cochain> sigma_cochain;      // when σ takes values in μ_level
};

HilbertBimoduleCheck hilbert_bimodule_check(GroupoidPtr g, const std::vector<Eigen::MatrixXcd>& T, int d,
                                            i64 level = 0, double tolerance = 1e-9);

}  // namespace tdual
