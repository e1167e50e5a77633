#pragma once
// Integer and modular arithmetic: residues, local Smith forms over Z/p^e,
// and a sparse linear solver over Z/M.

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace tdual {

using i64 = std::int64_t;

i64 mod(i64 a, i64 m);
i64 gcd64(i64 a, i64 b);
i64 lcm64(i64 a, i64 b);
/// Inverse of a modulo m; a must be a unit.
i64 inv_mod(i64 a, i64 m);
/// Prime factorization as (p, e) pairs in increasing p.
std::vector<std::pair<i64, int>> factorize(i64 n);
i64 ipow(i64 b, int e);

/// Dense matrix with entries reduced modulo `modulus`.
struct ModMatrix {
  int rows = 0;
  int cols = 0;
  i64 modulus = 1;
  std::vector<i64> a;

  ModMatrix() = default;
  ModMatrix(int r, int c, i64 m) : rows(r), cols(c), modulus(m), a(std::size_t(r) * c, 0) {}
  static ModMatrix identity(int n, i64 m);
  i64& at(int i, int j) { return a[std::size_t(i) * cols + j]; }
  i64 at(int i, int j) const { return a[std::size_t(i) * cols + j]; }
  ModMatrix operator*(const ModMatrix& o) const;
  std::vector<i64> apply(const std::vector<i64>& x) const;
};

/// Smith form over the local ring Z/p^e: U * A * V = D with D diagonal and
/// diagonal entries exactly p^{val[i]} for i < rank.
struct LocalSmith {
  i64 p = 2;
  int e = 1;
  i64 q = 2;
  int rank = 0;
  std::vector<int> val;  // length rank
  ModMatrix U, Uinv, V, Vinv;
};

/// Computes the local Smith form. Transforms are tracked when requested.
LocalSmith local_smith(const ModMatrix& A, i64 p, int e, bool want_u = true, bool want_v = true);

/// p-adic valuation of x modulo p^e (returns e for x == 0).
int valuation(i64 x, i64 p, int e);

/// Sparse system  sum_j c_j x_j = b  (mod M).
class ModLinearSystem {
 public:
  ModLinearSystem(i64 modulus, int unknowns);
  void add_equation(const std::vector<std::pair<int, i64>>& row, i64 rhs);
  int unknowns() const { return n_; }
  std::size_t equations() const { return rows_.size(); }
  i64 modulus() const { return m_; }
  /// A particular solution, or nullopt when the system is inconsistent.
  std::optional<std::vector<i64>> solve() const;

 private:
  i64 m_;
  int n_;
  std::vector<std::vector<std::pair<int, i64>>> rows_;
  std::vector<i64> rhs_;
  std::optional<std::vector<i64>> solve_prime_power(i64 p, int e) const;
};

}  // namespace tdual
