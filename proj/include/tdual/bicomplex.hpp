#pragma once
// Double complex of a bimodule P between a left groupoid H and a right
// groupoid K: cochains on tuples (h_1..h_j, p, k_1..k_i) with s(h_j) = l(p)
// and r(k_1) = r(p), constant coefficients Z/M acted on trivially.

#include <cstdint>
#include <functional>
#include <string>
#include <memory>
#include <optional>
#include <random>
#include <unordered_map>
#include <vector>

#include "tdual/bimodule.hpp"
#include "tdual/cochain.hpp"

namespace tdual {

struct BiCell {
  std::size_t h;  // nerve index in H at the left degree (object index when 0)
  int p;
  std::size_t k;  // nerve index in K at the right degree (object index when 0)
};

class BimoduleComplex;

/// Element of C^{j,i}: j arrows of the left groupoid, i of the right one.
struct BiCochain {
  std::shared_ptr<const BimoduleComplex> complex;
  int hdeg = 0, kdeg = 0;
  i64 modulus = 1;
  std::vector<i64> values;  // aligned with complex->cells(hdeg, kdeg)

  bool is_zero() const;
  BiCochain operator+(const BiCochain& o) const;
  BiCochain operator-(const BiCochain& o) const;
  bool operator==(const BiCochain& o) const { return hdeg == o.hdeg && kdeg == o.kdeg && values == o.values; }
};

class BimoduleComplex : public std::enable_shared_from_this<BimoduleComplex> {
 public:
  static std::shared_ptr<const BimoduleComplex> make(std::shared_ptr<const Bimodule> P, int max_degree = 3);

  const Bimodule& bimodule() const { return *P_; }
  const std::vector<BiCell>& cells(int hdeg, int kdeg) const;
  /// Position of a cell, or -1 when not admissible.
  long position(int hdeg, int kdeg, std::size_t h, int p, std::size_t k) const;

  BiCochain zero(int hdeg, int kdeg, i64 modulus) const;
  BiCochain random(int hdeg, int kdeg, i64 modulus, std::mt19937_64& rng) const;
  /// Differential along the left groupoid: C^{j,i} -> C^{j+1,i}.
  BiCochain delta_left(const BiCochain& f) const;
  /// Differential along the right groupoid: C^{j,i} -> C^{j,i+1}.
  BiCochain delta_right(const BiCochain& f) const;
  /// C^j(H) -> C^{j,0} through the left moment map.
  BiCochain augment_left(const Cochain& c) const;
  /// C^i(K) -> C^{0,i} through the right moment map.
  BiCochain augment_right(const Cochain& c) const;
  /// Cell has a unit entry on either side.
  bool degenerate(int hdeg, int kdeg, const BiCell& c) const;
  /// Faces of a cell of C^{hdeg+1,kdeg} (resp. C^{hdeg,kdeg+1}) as positions
  /// in C^{hdeg,kdeg} with signs.
  void left_faces(int hdeg, int kdeg, const BiCell& c, const std::function<void(long, int)>& emit) const;
  void right_faces(int hdeg, int kdeg, const BiCell& c, const std::function<void(long, int)>& emit) const;
  std::string describe(int hdeg, int kdeg, const BiCell& c) const;

 private:
  std::shared_ptr<const Bimodule> P_;
  int maxd_ = 3;
  std::vector<std::vector<std::vector<BiCell>>> cells_;
  std::vector<std::vector<std::unordered_map<std::uint64_t, long>>> pos_;
  std::uint64_t key(int hdeg, int kdeg, std::size_t h, int p, std::size_t k) const;
  void check_degrees(int hdeg, int kdeg) const;
};

/// mu on (h, p) and nu on (p, k): the data of a twisted bimodule.
struct MoritaWitness {
  BiCochain mu;  // C^{1,0}
  BiCochain nu;  // C^{0,1}
};

/// Solves, over Z/M with M the common modulus of psi and chi,
///   mu(h2,p) - mu(h1h2,p) + mu(h1,h2p) = psi(h1,h2)
///   nu(pk1,k2) - nu(p,k1k2) + nu(p,k1) = chi(k1,k2)
///   mu(h,pk) - mu(h,p) = nu(hp,k) - nu(p,k)
/// with normalized unknowns; nullopt certifies that no solution exists.
std::optional<MoritaWitness> cohomologous_witness(const Cochain& psi, const Cochain& chi,
                                                  std::shared_ptr<const BimoduleComplex> cx);

/// Residuals of the three witness equations; empty entries mean satisfied.
struct WitnessResidual {
  long left_failures = 0, right_failures = 0, mixed_failures = 0;
  std::vector<std::string> first;
  bool ok() const { return left_failures == 0 && right_failures == 0 && mixed_failures == 0; }
};
WitnessResidual witness_residual(const MoritaWitness& w, const Cochain& psi, const Cochain& chi);

}  // namespace tdual
