#pragma once
// Cochains on the nerve of a finite groupoid with values in Z/M, read either
// as a finite cyclic group or as the M-torsion of the circle (value k/M).

#include <cstdint>
#include <initializer_list>
#include <optional>
#include <random>
#include <vector>

#include "tdual/constructions.hpp"
#include "tdual/groupoid.hpp"
#include "tdual/modarith.hpp"

namespace tdual {

struct Cochain {
  GroupoidPtr groupoid;
  int degree = 0;
  i64 modulus = 1;
  bool torus = false;
  std::vector<i64> values;  // indexed by nerve index at `degree`

  static Cochain zero(GroupoidPtr g, int degree, i64 modulus, bool torus = true);
  i64 at(const int* tuple) const;
  i64 operator()(std::initializer_list<int> t) const { return at(t.begin()); }
  void set(std::initializer_list<int> t, i64 v);
  bool is_zero() const;
  /// Vanishes whenever some argument is a unit (degree >= 1).
  bool normalized() const;
  /// Same torus values at a finer level; `m` must be a multiple of modulus.
  Cochain at_level(i64 m) const;
  Cochain operator+(const Cochain& o) const;
  Cochain operator-(const Cochain& o) const;
  Cochain scaled(i64 k) const;
  bool operator==(const Cochain& o) const { return degree == o.degree && modulus == o.modulus && values == o.values; }
};

/// Bar differential with trivial coefficient action.
Cochain differential(const Cochain& c);

/// (φ*c)(γ1,...,γk) = c(φγ1,...,φγk).
Cochain pullback(const GroupoidHom& phi, const Cochain& c);

/// Standard gauge making a closed 2-cochain vanish on units.
Cochain normalize_cocycle(const Cochain& c);

/// Uniformly random normalized cochain.
Cochain random_cochain(GroupoidPtr g, int degree, i64 modulus, std::mt19937_64& rng, bool torus = true);

/// Solves δb = c for a (degree-1)-cochain b at the modulus of c.
std::optional<Cochain> coboundary_witness(const Cochain& c);

namespace detail {

// Faces of the bar differential: for a (k+1)-tuple t, calls emit(face, sign)
// with the k-tuple of each face. For k = 0 the faces are objects.
template <class F>
void bar_faces(const FiniteGroupoid& g, int k, const int* t, F&& emit) {
  if (k == 0) {
    int x = g.src(t[0]);
    emit(&x, 1);
    int y = g.dst(t[0]);
    emit(&y, -1);
    return;
  }
  int buf[16];
  emit(t + 1, 1);
  for (int i = 1; i <= k; ++i) {
    int w = 0;
    for (int j = 0; j < k + 1; ++j) {
      if (j == i - 1) {
        buf[w++] = g.compose(t[j], t[j + 1]);
        ++j;
      } else {
        buf[w++] = t[j];
      }
    }
    emit(buf, (i % 2) ? -1 : 1);
  }
  emit(t, ((k + 1) % 2) ? -1 : 1);
}

}  // namespace detail

/// Nondegenerate tuples (no unit entries) at degree k >= 1; objects at k = 0.
std::vector<std::size_t> nondegenerate(const FiniteGroupoid& g, int k);

}  // namespace tdual
