#include "tdual/modarith.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace tdual {

namespace {

i64 mulmod(i64 a, i64 b, i64 m) { return static_cast<i64>((static_cast<__int128>(a) * b) % m); }

}  // namespace

i64 mod(i64 a, i64 m) {
  i64 r = a % m;
  return r < 0 ? r + m : r;
}

i64 gcd64(i64 a, i64 b) { return std::gcd(a < 0 ? -a : a, b < 0 ? -b : b); }

i64 lcm64(i64 a, i64 b) {
  if (a == 0 || b == 0) return 0;
  return a / gcd64(a, b) * b;
}

i64 inv_mod(i64 a, i64 m) {
  // extended Euclid on (a mod m, m)
  i64 old_r = mod(a, m), rr = m, old_s = 1, s = 0;
  while (rr != 0) {
    i64 qt = old_r / rr;
    i64 t = old_r - qt * rr;
    old_r = rr;
    rr = t;
    t = old_s - qt * s;
    old_s = s;
    s = t;
  }
  if (old_r != 1 && m != 1) throw std::invalid_argument("inv_mod: not a unit");
  return mod(old_s, m);
}

std::vector<std::pair<i64, int>> factorize(i64 n) {
  std::vector<std::pair<i64, int>> out;
  for (i64 p = 2; p * p <= n; ++p) {
    int e = 0;
    while (n % p == 0) {
      n /= p;
      ++e;
    }
    if (e) out.emplace_back(p, e);
  }
  if (n > 1) out.emplace_back(n, 1);
  return out;
}

i64 ipow(i64 b, int e) {
  i64 r = 1;
  while (e-- > 0) r *= b;
  return r;
}

int valuation(i64 x, i64 p, int e) {
  x = mod(x, ipow(p, e));
  if (x == 0) return e;
  int v = 0;
  while (x % p == 0) {
    x /= p;
    ++v;
  }
  return v;
}

ModMatrix ModMatrix::identity(int n, i64 m) {
  ModMatrix I(n, n, m);
  for (int i = 0; i < n; ++i) I.at(i, i) = 1 % m;
  return I;
}

ModMatrix ModMatrix::operator*(const ModMatrix& o) const {
  ModMatrix r(rows, o.cols, modulus);
  for (int i = 0; i < rows; ++i)
    for (int k = 0; k < cols; ++k) {
      i64 v = at(i, k);
      if (!v) continue;
      for (int j = 0; j < o.cols; ++j) r.at(i, j) = (r.at(i, j) + mulmod(v, o.at(k, j), modulus)) % modulus;
    }
  return r;
}

std::vector<i64> ModMatrix::apply(const std::vector<i64>& x) const {
  std::vector<i64> y(rows, 0);
  for (int i = 0; i < rows; ++i) {
    i64 s = 0;
    for (int j = 0; j < cols; ++j) s = (s + mulmod(at(i, j), mod(x[j], modulus), modulus)) % modulus;
    y[i] = s;
  }
  return y;
}

LocalSmith local_smith(const ModMatrix& A, i64 p, int e, bool want_u, bool want_v) {
  LocalSmith S;
  S.p = p;
  S.e = e;
  S.q = ipow(p, e);
  const i64 q = S.q;
  const int m = A.rows, n = A.cols;
  ModMatrix W(m, n, q);
  for (std::size_t k = 0; k < A.a.size(); ++k) W.a[k] = mod(A.a[k], q);
  if (want_u) {
    S.U = ModMatrix::identity(m, q);
    S.Uinv = ModMatrix::identity(m, q);
  }
  if (want_v) {
    S.V = ModMatrix::identity(n, q);
    S.Vinv = ModMatrix::identity(n, q);
  }
  int t = 0;
  while (t < std::min(m, n)) {
    int bi = -1, bj = -1, bv = e;
    for (int i = t; i < m && bv > 0; ++i)
      for (int j = t; j < n; ++j) {
        i64 x = W.at(i, j);
        if (!x) continue;
        int v = valuation(x, p, e);
        if (v < bv) {
          bv = v;
          bi = i;
          bj = j;
          if (v == 0) break;
        }
      }
    if (bi < 0) break;
    if (bi != t) {
      for (int j = 0; j < n; ++j) std::swap(W.at(t, j), W.at(bi, j));
      if (want_u) {
        for (int j = 0; j < m; ++j) std::swap(S.U.at(t, j), S.U.at(bi, j));
        for (int i = 0; i < m; ++i) std::swap(S.Uinv.at(i, t), S.Uinv.at(i, bi));
      }
    }
    if (bj != t) {
      for (int i = 0; i < m; ++i) std::swap(W.at(i, t), W.at(i, bj));
      if (want_v) {
        for (int i = 0; i < n; ++i) std::swap(S.V.at(i, t), S.V.at(i, bj));
        for (int j = 0; j < n; ++j) std::swap(S.Vinv.at(t, j), S.Vinv.at(bj, j));
      }
    }
    const i64 pv = ipow(p, bv);
    const i64 w = W.at(t, t) / pv;
    const i64 winv = inv_mod(w, q);
    for (int j = 0; j < n; ++j) W.at(t, j) = mulmod(W.at(t, j), winv, q);
    if (want_u) {
      for (int j = 0; j < m; ++j) S.U.at(t, j) = mulmod(S.U.at(t, j), winv, q);
      for (int i = 0; i < m; ++i) S.Uinv.at(i, t) = mulmod(S.Uinv.at(i, t), w, q);
    }
    for (int i = t + 1; i < m; ++i) {
      i64 x = W.at(i, t);
      if (!x) continue;
      i64 c = x / pv;
      for (int j = t; j < n; ++j) W.at(i, j) = mod(W.at(i, j) - mulmod(c, W.at(t, j), q), q);
      if (want_u) {
        for (int j = 0; j < m; ++j) S.U.at(i, j) = mod(S.U.at(i, j) - mulmod(c, S.U.at(t, j), q), q);
        for (int r = 0; r < m; ++r) S.Uinv.at(r, t) = (S.Uinv.at(r, t) + mulmod(c, S.Uinv.at(r, i), q)) % q;
      }
    }
    for (int j = t + 1; j < n; ++j) {
      i64 x = W.at(t, j);
      if (!x) continue;
      i64 c = x / pv;
      W.at(t, j) = 0;
      if (want_v) {
        for (int r = 0; r < n; ++r) S.V.at(r, j) = mod(S.V.at(r, j) - mulmod(c, S.V.at(r, t), q), q);
        for (int k = 0; k < n; ++k) S.Vinv.at(t, k) = (S.Vinv.at(t, k) + mulmod(c, S.Vinv.at(j, k), q)) % q;
      }
    }
    S.val.push_back(bv);
    ++t;
  }
  S.rank = t;
  return S;
}

ModLinearSystem::ModLinearSystem(i64 modulus, int unknowns) : m_(modulus), n_(unknowns) {
  if (modulus < 1) throw std::invalid_argument("ModLinearSystem: modulus must be positive");
}

void ModLinearSystem::add_equation(const std::vector<std::pair<int, i64>>& row, i64 rhs) {
  std::vector<std::pair<int, i64>> r;
  r.reserve(row.size());
  for (auto [j, c] : row) {
    if (j < 0 || j >= n_) throw std::out_of_range("ModLinearSystem: unknown index");
    r.emplace_back(j, c);
  }
  std::sort(r.begin(), r.end());
  std::vector<std::pair<int, i64>> merged;
  for (auto& [j, c] : r) {
    if (!merged.empty() && merged.back().first == j)
      merged.back().second += c;
    else
      merged.emplace_back(j, c);
  }
  rows_.push_back(std::move(merged));
  rhs_.push_back(rhs);
}

namespace {

using Row = std::vector<std::pair<int, i64>>;

// Dense echelon solve over Z/p^e with full pivoting on minimal valuation.
std::optional<std::vector<i64>> dense_local_solve(std::vector<std::vector<i64>> A, std::vector<i64> b, int ncols,
                                                  i64 p, int e) {
  const i64 q = ipow(p, e);
  const int m = static_cast<int>(A.size());
  std::vector<int> colperm(ncols);
  std::iota(colperm.begin(), colperm.end(), 0);
  std::vector<int> pv_of_row;
  int t = 0;
  for (; t < std::min(m, ncols); ++t) {
    int bi = -1, bj = -1, bv = e;
    for (int i = t; i < m && bv > 0; ++i)
      for (int j = t; j < ncols; ++j) {
        i64 x = A[i][colperm[j]];
        if (!x) continue;
        int v = valuation(x, p, e);
        if (v < bv) {
          bv = v;
          bi = i;
          bj = j;
          if (!v) break;
        }
      }
    if (bi < 0) break;
    std::swap(A[t], A[bi]);
    std::swap(b[t], b[bi]);
    std::swap(colperm[t], colperm[bj]);
    const int c = colperm[t];
    const i64 pv = ipow(p, bv);
    const i64 w = A[t][c] / pv;
    const i64 winv = inv_mod(w, q);
    for (int j = 0; j < ncols; ++j) A[t][j] = mulmod(A[t][j], winv, q);
    b[t] = mulmod(b[t], winv, q);
    for (int i = t + 1; i < m; ++i) {
      i64 x = A[i][c];
      if (!x) continue;
      i64 f = x / pv;
      for (int j = 0; j < ncols; ++j)
        if (A[t][j]) A[i][j] = mod(A[i][j] - mulmod(f, A[t][j], q), q);
      b[i] = mod(b[i] - mulmod(f, b[t], q), q);
    }
    pv_of_row.push_back(bv);
  }
  for (int i = t; i < m; ++i)
    if (mod(b[i], q) != 0) return std::nullopt;
  std::vector<i64> x(ncols, 0);
  for (int r = t - 1; r >= 0; --r) {
    const int c = colperm[r];
    const int v = pv_of_row[r];
    const i64 pv = ipow(p, v);
    i64 s = b[r];
    for (int j = r + 1; j < ncols; ++j) {
      int cj = colperm[j];
      if (A[r][cj] && x[cj]) s = mod(s - mulmod(A[r][cj], x[cj], q), q);
    }
    if (valuation(s, p, e) < v) return std::nullopt;
    x[c] = mod(s / pv, q);
  }
  return x;
}

}  // namespace

std::optional<std::vector<i64>> ModLinearSystem::solve_prime_power(i64 p, int e) const {
  const i64 q = ipow(p, e);
  std::vector<int> pivot_of(n_, -1);
  std::vector<Row> prow;
  std::vector<i64> prhs;
  std::vector<int> pvar;
  std::vector<std::vector<int>> occ(n_);
  std::vector<Row> deferred;
  std::vector<i64> drhs;

  std::vector<i64> acc(n_, 0);
  std::vector<char> touched(n_, 0);
  std::vector<int> tlist;

  auto reduce = [&](const Row& row, i64 rhs, Row& out, i64& out_rhs) {
    tlist.clear();
    i64 r = mod(rhs, q);
    auto add = [&](int j, i64 c) {
      if (!touched[j]) {
        touched[j] = 1;
        tlist.push_back(j);
      }
      acc[j] = mod(acc[j] + c, q);
    };
    for (auto [j, c] : row) {
      c = mod(c, q);
      if (!c) continue;
      int pr = pivot_of[j];
      if (pr < 0) {
        add(j, c);
      } else {
        for (auto [k, d] : prow[pr])
          if (k != j) add(k, mod(-mulmod(c, d, q), q));
        r = mod(r - mulmod(c, prhs[pr], q), q);
      }
    }
    out.clear();
    std::sort(tlist.begin(), tlist.end());
    for (int j : tlist) {
      if (acc[j]) out.emplace_back(j, acc[j]);
      acc[j] = 0;
      touched[j] = 0;
    }
    out_rhs = r;
  };

  Row red;
  for (std::size_t k = 0; k < rows_.size(); ++k) {
    i64 r;
    reduce(rows_[k], rhs_[k], red, r);
    if (red.empty()) {
      if (r != 0) return std::nullopt;
      continue;
    }
    int pick = -1;
    for (std::size_t t = 0; t < red.size(); ++t)
      if (red[t].second % p != 0) {
        pick = static_cast<int>(t);
        break;
      }
    if (pick < 0) {
      deferred.push_back(red);
      drhs.push_back(r);
      continue;
    }
    const int v = red[pick].first;
    const i64 inv = inv_mod(red[pick].second, q);
    for (auto& [j, c] : red) c = mulmod(c, inv, q);
    r = mulmod(r, inv, q);
    const int id = static_cast<int>(prow.size());
    // eliminate v from existing pivot rows
    for (int other : occ[v]) {
      Row& R = prow[other];
      auto it = std::lower_bound(R.begin(), R.end(), std::make_pair(v, i64(-1)));
      if (it == R.end() || it->first != v) continue;
      i64 c = it->second;
      Row merged;
      merged.reserve(R.size() + red.size());
      std::size_t a = 0, b = 0;
      while (a < R.size() || b < red.size()) {
        if (b >= red.size() || (a < R.size() && R[a].first < red[b].first)) {
          merged.push_back(R[a++]);
        } else if (a >= R.size() || red[b].first < R[a].first) {
          i64 val = mod(-mulmod(c, red[b].second, q), q);
          if (val) merged.emplace_back(red[b].first, val);
          ++b;
        } else {
          i64 val = mod(R[a].second - mulmod(c, red[b].second, q), q);
          if (val) merged.emplace_back(R[a].first, val);
          ++a;
          ++b;
        }
      }
      prhs[other] = mod(prhs[other] - mulmod(c, r, q), q);
      R.swap(merged);
      for (auto [j, cc] : R)
        if (j != pvar[other]) occ[j].push_back(other);
    }
    occ[v].clear();
    pivot_of[v] = id;
    for (auto [j, c] : red)
      if (j != v) occ[j].push_back(id);
    prow.push_back(red);
    prhs.push_back(r);
    pvar.push_back(v);
  }

  std::vector<i64> x(n_, 0);
  if (!deferred.empty()) {
    std::vector<int> freecol(n_, -1);
    std::vector<int> cols;
    std::vector<Row> dred;
    std::vector<i64> dr;
    for (std::size_t k = 0; k < deferred.size(); ++k) {
      Row out;
      i64 r;
      reduce(deferred[k], drhs[k], out, r);
      if (out.empty()) {
        if (r != 0) return std::nullopt;
        continue;
      }
      for (auto [j, c] : out)
        if (freecol[j] < 0) {
          freecol[j] = static_cast<int>(cols.size());
          cols.push_back(j);
        }
      dred.push_back(std::move(out));
      dr.push_back(r);
    }
    if (!dred.empty()) {
      std::vector<std::vector<i64>> A(dred.size(), std::vector<i64>(cols.size(), 0));
      for (std::size_t i = 0; i < dred.size(); ++i)
        for (auto [j, c] : dred[i]) A[i][freecol[j]] = c;
      auto sol = dense_local_solve(std::move(A), dr, static_cast<int>(cols.size()), p, e);
      if (!sol) return std::nullopt;
      for (std::size_t k = 0; k < cols.size(); ++k) x[cols[k]] = (*sol)[k];
    }
  }
  for (std::size_t id = 0; id < prow.size(); ++id) {
    i64 s = prhs[id];
    for (auto [j, c] : prow[id])
      if (j != pvar[id] && x[j]) s = mod(s - mulmod(c, x[j], q), q);
    x[pvar[id]] = s;
  }
  return x;
}

std::optional<std::vector<i64>> ModLinearSystem::solve() const {
  if (m_ == 1) return std::vector<i64>(n_, 0);
  std::vector<i64> x(n_, 0);
  for (auto [p, e] : factorize(m_)) {
    const i64 q = ipow(p, e);
    auto part = solve_prime_power(p, e);
    if (!part) return std::nullopt;
    const i64 cof = m_ / q;
    const i64 k = mulmod(cof, inv_mod(cof % q, q), m_);
    for (int j = 0; j < n_; ++j) x[j] = (x[j] + mulmod((*part)[j], k, m_)) % m_;
  }
  return x;
}

}  // namespace tdual
