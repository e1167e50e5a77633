#pragma once
// Exact arithmetic in Z[ζ_M].

#include <complex>
#include <vector>

#include "tdual/modarith.hpp"

namespace tdual {

/// Coefficients of Φ_M, lowest degree first.
const std::vector<i64>& cyclotomic_polynomial(i64 m);

/// Σ c_k ζ^k with k in [0, M); equality is decided modulo Φ_M.
class Cyclotomic {
 public:
  explicit Cyclotomic(i64 m = 1) : m_(m), c_(static_cast<std::size_t>(m), 0) {}
  static Cyclotomic root(i64 m, i64 k, i64 coeff = 1);

  i64 modulus() const { return m_; }
  Cyclotomic& add_root(i64 k, i64 coeff = 1);
  Cyclotomic& operator+=(const Cyclotomic& o);
  Cyclotomic& operator-=(const Cyclotomic& o);
  Cyclotomic operator+(const Cyclotomic& o) const { return Cyclotomic(*this) += o; }
  Cyclotomic operator-(const Cyclotomic& o) const { return Cyclotomic(*this) -= o; }
  Cyclotomic operator*(const Cyclotomic& o) const;
  Cyclotomic times_root(i64 k) const;
  Cyclotomic scaled(i64 s) const;
  Cyclotomic conj() const;

  /// Reduced coefficients modulo Φ_M (length φ(M)).
  std::vector<i64> reduced() const;
  bool is_zero() const;
  bool operator==(const Cyclotomic& o) const { return (*this - o).is_zero(); }
  std::complex<double> value() const;

 private:
  i64 m_;
  std::vector<i64> c_;
};

}  // namespace tdual
