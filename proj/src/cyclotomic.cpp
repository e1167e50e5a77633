#include "tdual/cyclotomic.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace tdual {

namespace {

std::vector<i64> poly_divide_exact(std::vector<i64> num, const std::vector<i64>& den) {
  // den is monic
  const long dn = static_cast<long>(den.size());
  std::vector<i64> q(num.size() - den.size() + 1, 0);
  for (long i = static_cast<long>(num.size()) - 1; i >= dn - 1; --i) {
    const i64 c = num[i];
    q[i - dn + 1] = c;
    if (c != 0)
      for (long j = 0; j < dn; ++j) num[i - dn + 1 + j] -= c * den[j];
  }
  for (long i = 0; i + 1 < dn; ++i)
    if (num[i] != 0) throw std::logic_error("cyclotomic polynomial division left a remainder");
  return q;
}

}  // namespace

const std::vector<i64>& cyclotomic_polynomial(i64 m) {
  static std::mutex mu;
  static std::map<i64, std::vector<i64>> cache;
  {
    std::lock_guard lk(mu);
    auto it = cache.find(m);
    if (it != cache.end()) return it->second;
  }
  if (m < 1) throw std::invalid_argument("cyclotomic_polynomial: modulus must be positive");
  std::vector<i64> p(static_cast<std::size_t>(m) + 1, 0);
  p[0] = -1;
  p[m] = 1;
  for (i64 d = 1; d < m; ++d)
    if (m % d == 0) p = poly_divide_exact(p, cyclotomic_polynomial(d));
  std::lock_guard lk(mu);
  return cache.emplace(m, std::move(p)).first->second;
}

Cyclotomic Cyclotomic::root(i64 m, i64 k, i64 coeff) {
  Cyclotomic z(m);
  z.add_root(k, coeff);
  return z;
}

Cyclotomic& Cyclotomic::add_root(i64 k, i64 coeff) {
  c_[static_cast<std::size_t>(mod(k, m_))] += coeff;
  return *this;
}

Cyclotomic& Cyclotomic::operator+=(const Cyclotomic& o) {
  if (o.m_ != m_) throw std::invalid_argument("Cyclotomic: modulus mismatch");
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
  return *this;
}

Cyclotomic& Cyclotomic::operator-=(const Cyclotomic& o) {
  if (o.m_ != m_) throw std::invalid_argument("Cyclotomic: modulus mismatch");
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
  return *this;
}

Cyclotomic Cyclotomic::operator*(const Cyclotomic& o) const {
  if (o.m_ != m_) throw std::invalid_argument("Cyclotomic: modulus mismatch");
  Cyclotomic r(m_);
  for (i64 i = 0; i < m_; ++i) {
    if (c_[i] == 0) continue;
    for (i64 j = 0; j < m_; ++j)
      if (o.c_[j] != 0) r.c_[(i + j) % m_] += c_[i] * o.c_[j];
  }
  return r;
}

Cyclotomic Cyclotomic::times_root(i64 k) const {
  Cyclotomic r(m_);
  for (i64 i = 0; i < m_; ++i) r.c_[mod(i + k, m_)] = c_[i];
  return r;
}

Cyclotomic Cyclotomic::scaled(i64 s) const {
  Cyclotomic r(*this);
  for (auto& x : r.c_) x *= s;
  return r;
}

Cyclotomic Cyclotomic::conj() const {
  Cyclotomic r(m_);
  for (i64 i = 0; i < m_; ++i) r.c_[mod(-i, m_)] = c_[i];
  return r;
}

std::vector<i64> Cyclotomic::reduced() const {
  const auto& phi = cyclotomic_polynomial(m_);
  const std::size_t deg = phi.size() - 1;
  std::vector<i64> r = c_;
  for (std::size_t i = r.size(); i-- > deg;) {
    i64 c = r[i];
    if (c == 0) continue;
    for (std::size_t j = 0; j <= deg; ++j) r[i - deg + j] -= c * phi[j];
  }
  r.resize(deg);
  return r;
}

bool Cyclotomic::is_zero() const {
  for (i64 x : reduced())
    if (x != 0) return false;
  return true;
}

std::complex<double> Cyclotomic::value() const {
  std::complex<double> s = 0;
  for (i64 i = 0; i < m_; ++i)
    if (c_[i] != 0) s += double(c_[i]) * std::polar(1.0, 2 * std::numbers::pi * double(i) / double(m_));
  return s;
}

}  // namespace tdual
