#include "tdual/bicomplex.hpp"

#include <stdexcept>

namespace tdual {

namespace {

std::size_t block_count(const FiniteGroupoid& g, int d) {
  return d == 0 ? static_cast<std::size_t>(g.objects()) : g.nerve().count(d);
}

void require_same(const BiCochain& a, const BiCochain& b) {
  if (a.hdeg != b.hdeg || a.kdeg != b.kdeg || a.modulus != b.modulus)
    throw std::invalid_argument("bimodule cochains: shape mismatch");
}

}  // namespace

bool BiCochain::is_zero() const {
  for (i64 v : values)
    if (v) return false;
  return true;
}

BiCochain BiCochain::operator+(const BiCochain& o) const {
  require_same(*this, o);
  BiCochain c = *this;
  for (std::size_t i = 0; i < values.size(); ++i) c.values[i] = (values[i] + o.values[i]) % modulus;
  return c;
}

BiCochain BiCochain::operator-(const BiCochain& o) const {
  require_same(*this, o);
  BiCochain c = *this;
  for (std::size_t i = 0; i < values.size(); ++i) c.values[i] = mod(values[i] - o.values[i], modulus);
  return c;
}

std::shared_ptr<const BimoduleComplex> BimoduleComplex::make(std::shared_ptr<const Bimodule> P, int max_degree) {
  auto cx = std::shared_ptr<BimoduleComplex>(new BimoduleComplex());
  cx->P_ = P;
  cx->maxd_ = max_degree;
  const auto& H = *P->left;
  const auto& K = *P->right;
  // left tuples grouped by the source of their last arrow, right tuples by
  // the target of their first
  std::vector<std::vector<std::vector<std::size_t>>> hend(max_degree + 1), kstart(max_degree + 1);
  for (int d = 0; d <= max_degree; ++d) {
    hend[d].assign(H.objects(), {});
    kstart[d].assign(K.objects(), {});
    for (std::size_t t = 0; t < block_count(H, d); ++t) {
      int x = d == 0 ? static_cast<int>(t) : H.src(H.nerve().tuple(d, t)[d - 1]);
      hend[d][x].push_back(t);
    }
    for (std::size_t t = 0; t < block_count(K, d); ++t) {
      int y = d == 0 ? static_cast<int>(t) : K.dst(K.nerve().tuple(d, t)[0]);
      kstart[d][y].push_back(t);
    }
  }
  cx->cells_.assign(max_degree + 1, std::vector<std::vector<BiCell>>(max_degree + 1));
  cx->pos_.assign(max_degree + 1, std::vector<std::unordered_map<std::uint64_t, long>>(max_degree + 1));
  for (int j = 0; j <= max_degree; ++j)
    for (int i = 0; j + i <= max_degree; ++i) {
      auto& cells = cx->cells_[j][i];
      for (int p = 0; p < P->carrier; ++p)
        for (auto h : hend[j][P->lmoment[p]])
          for (auto k : kstart[i][P->rmoment[p]]) {
            cx->pos_[j][i][cx->key(j, i, h, p, k)] = static_cast<long>(cells.size());
            cells.push_back({h, p, k});
          }
    }
  return cx;
}

std::uint64_t BimoduleComplex::key(int hdeg, int kdeg, std::size_t h, int p, std::size_t k) const {
  (void)hdeg;
  const std::uint64_t nk = block_count(*P_->right, kdeg);
  return (static_cast<std::uint64_t>(h) * P_->carrier + p) * nk + k;
}

void BimoduleComplex::check_degrees(int hdeg, int kdeg) const {
  if (hdeg < 0 || kdeg < 0 || hdeg + kdeg > maxd_)
    throw std::out_of_range("bimodule complex: bidegree outside the materialized range");
}

const std::vector<BiCell>& BimoduleComplex::cells(int hdeg, int kdeg) const {
  check_degrees(hdeg, kdeg);
  return cells_[hdeg][kdeg];
}

long BimoduleComplex::position(int hdeg, int kdeg, std::size_t h, int p, std::size_t k) const {
  check_degrees(hdeg, kdeg);
  auto it = pos_[hdeg][kdeg].find(key(hdeg, kdeg, h, p, k));
  return it == pos_[hdeg][kdeg].end() ? -1 : it->second;
}

BiCochain BimoduleComplex::zero(int hdeg, int kdeg, i64 modulus) const {
  BiCochain c;
  c.complex = shared_from_this();
  c.hdeg = hdeg;
  c.kdeg = kdeg;
  c.modulus = modulus;
  c.values.assign(cells(hdeg, kdeg).size(), 0);
  return c;
}

bool BimoduleComplex::degenerate(int hdeg, int kdeg, const BiCell& c) const {
  const auto& H = *P_->left;
  const auto& K = *P_->right;
  if (hdeg > 0) {
    const int* t = H.nerve().tuple(hdeg, c.h);
    for (int i = 0; i < hdeg; ++i)
      if (H.is_unit(t[i])) return true;
  }
  if (kdeg > 0) {
    const int* t = K.nerve().tuple(kdeg, c.k);
    for (int i = 0; i < kdeg; ++i)
      if (K.is_unit(t[i])) return true;
  }
  return false;
}

BiCochain BimoduleComplex::random(int hdeg, int kdeg, i64 modulus, std::mt19937_64& rng) const {
  BiCochain c = zero(hdeg, kdeg, modulus);
  std::uniform_int_distribution<i64> dist(0, modulus - 1);
  const auto& cs = cells(hdeg, kdeg);
  for (std::size_t i = 0; i < cs.size(); ++i)
    if (!degenerate(hdeg, kdeg, cs[i])) c.values[i] = dist(rng);
  return c;
}

void BimoduleComplex::left_faces(int j, int i, const BiCell& c, const std::function<void(long, int)>& emit) const {
  const auto& H = *P_->left;
  const auto& hn = H.nerve();
  const int* t = hn.tuple(j + 1, c.h);
  int buf[16];
  auto at = [&](std::size_t h, int p) {
    long pos = position(j, i, h, p, c.k);
    if (pos < 0) throw std::logic_error("bimodule complex: inadmissible face");
    return pos;
  };
  // drop h_1
  emit(at(j == 0 ? static_cast<std::size_t>(P_->lmoment[c.p]) : hn.index(j, t + 1), c.p), 1);
  for (int n = 1; n <= j; ++n) {
    int w = 0;
    for (int m = 0; m <= j; ++m) {
      if (m == n - 1) {
        buf[w++] = H.compose(t[m], t[m + 1]);
        ++m;
      } else {
        buf[w++] = t[m];
      }
    }
    emit(at(hn.index(j, buf), c.p), n % 2 ? -1 : 1);
  }
  // h_{j+1} acts on p
  int q = P_->left_act(t[j], c.p);
  emit(at(j == 0 ? static_cast<std::size_t>(H.dst(t[0])) : hn.index(j, t), q), (j + 1) % 2 ? -1 : 1);
}

void BimoduleComplex::right_faces(int j, int i, const BiCell& c, const std::function<void(long, int)>& emit) const {
  const auto& K = *P_->right;
  const auto& kn = K.nerve();
  const int* t = kn.tuple(i + 1, c.k);
  int buf[16];
  auto at = [&](int p, std::size_t k) {
    long pos = position(j, i, c.h, p, k);
    if (pos < 0) throw std::logic_error("bimodule complex: inadmissible face");
    return pos;
  };
  // p k_1
  int q = P_->right_act(c.p, t[0]);
  emit(at(q, i == 0 ? static_cast<std::size_t>(K.src(t[0])) : kn.index(i, t + 1)), 1);
  for (int n = 1; n <= i; ++n) {
    int w = 0;
    for (int m = 0; m <= i; ++m) {
      if (m == n - 1) {
        buf[w++] = K.compose(t[m], t[m + 1]);
        ++m;
      } else {
        buf[w++] = t[m];
      }
    }
    emit(at(c.p, kn.index(i, buf)), n % 2 ? -1 : 1);
  }
  // drop k_{i+1}
  emit(at(c.p, i == 0 ? static_cast<std::size_t>(K.dst(t[0])) : kn.index(i, t)), (i + 1) % 2 ? -1 : 1);
}

BiCochain BimoduleComplex::delta_left(const BiCochain& f) const {
  BiCochain out = zero(f.hdeg + 1, f.kdeg, f.modulus);
  const auto& cs = cells(f.hdeg + 1, f.kdeg);
  for (std::size_t n = 0; n < cs.size(); ++n) {
    i64 s = 0;
    left_faces(f.hdeg, f.kdeg, cs[n], [&](long pos, int sign) { s += sign * f.values[pos]; });
    out.values[n] = mod(s, f.modulus);
  }
  return out;
}

BiCochain BimoduleComplex::delta_right(const BiCochain& f) const {
  BiCochain out = zero(f.hdeg, f.kdeg + 1, f.modulus);
  const auto& cs = cells(f.hdeg, f.kdeg + 1);
  for (std::size_t n = 0; n < cs.size(); ++n) {
    i64 s = 0;
    right_faces(f.hdeg, f.kdeg, cs[n], [&](long pos, int sign) { s += sign * f.values[pos]; });
    out.values[n] = mod(s, f.modulus);
  }
  return out;
}

BiCochain BimoduleComplex::augment_left(const Cochain& c) const {
  if (c.groupoid.get() != P_->left.get()) throw std::invalid_argument("augment_left: cochain lives on another groupoid");
  BiCochain out = zero(c.degree, 0, c.modulus);
  const auto& cs = cells(c.degree, 0);
  for (std::size_t n = 0; n < cs.size(); ++n)
    out.values[n] = c.degree == 0 ? c.values[P_->lmoment[cs[n].p]] : c.values[cs[n].h];
  return out;
}

BiCochain BimoduleComplex::augment_right(const Cochain& c) const {
  if (c.groupoid.get() != P_->right.get()) throw std::invalid_argument("augment_right: cochain lives on another groupoid");
  BiCochain out = zero(0, c.degree, c.modulus);
  const auto& cs = cells(0, c.degree);
  for (std::size_t n = 0; n < cs.size(); ++n)
    out.values[n] = c.degree == 0 ? c.values[P_->rmoment[cs[n].p]] : c.values[cs[n].k];
  return out;
}

std::string BimoduleComplex::describe(int hdeg, int kdeg, const BiCell& c) const {
  std::string s = "(";
  if (hdeg > 0) {
    const int* t = P_->left->nerve().tuple(hdeg, c.h);
    for (int i = 0; i < hdeg; ++i) s += "h" + std::to_string(t[i]) + ",";
  }
  s += "p" + std::to_string(c.p);
  if (kdeg > 0) {
    const int* t = P_->right->nerve().tuple(kdeg, c.k);
    for (int i = 0; i < kdeg; ++i) s += ",k" + std::to_string(t[i]);
  }
  return s + ")";
}

std::optional<MoritaWitness> cohomologous_witness(const Cochain& psi, const Cochain& chi,
                                                  std::shared_ptr<const BimoduleComplex> cx) {
  if (psi.degree != 2 || chi.degree != 2) throw std::invalid_argument("cohomologous_witness: degree-2 cochains expected");
  if (psi.modulus != chi.modulus) throw std::invalid_argument("cohomologous_witness: cochains at different levels");
  if (!differential(psi).is_zero() || !differential(chi).is_zero())
    throw std::invalid_argument("cohomologous_witness: cochains are not closed");
  const i64 M = psi.modulus;
  const auto& mucells = cx->cells(1, 0);
  const auto& nucells = cx->cells(0, 1);
  std::vector<long> muvar(mucells.size(), -1), nuvar(nucells.size(), -1);
  int nv = 0;
  for (std::size_t i = 0; i < mucells.size(); ++i)
    if (!cx->degenerate(1, 0, mucells[i])) muvar[i] = nv++;
  for (std::size_t i = 0; i < nucells.size(); ++i)
    if (!cx->degenerate(0, 1, nucells[i])) nuvar[i] = nv++;
  ModLinearSystem sys(M, nv);
  auto psi_t = cx->augment_left(psi);
  auto chi_t = cx->augment_right(chi);
  std::vector<std::pair<int, i64>> row;
  auto push = [&](const std::vector<long>& var) {
    return [&row, &var](long pos, int sign) {
      if (var[pos] >= 0) row.emplace_back(static_cast<int>(var[pos]), sign);
    };
  };
  const auto& c20 = cx->cells(2, 0);
  for (std::size_t n = 0; n < c20.size(); ++n) {
    row.clear();
    cx->left_faces(1, 0, c20[n], push(muvar));
    sys.add_equation(row, psi_t.values[n]);
  }
  const auto& c02 = cx->cells(0, 2);
  for (std::size_t n = 0; n < c02.size(); ++n) {
    row.clear();
    cx->right_faces(0, 1, c02[n], push(nuvar));
    sys.add_equation(row, chi_t.values[n]);
  }
  const auto& c11 = cx->cells(1, 1);
  for (std::size_t n = 0; n < c11.size(); ++n) {
    row.clear();
    cx->right_faces(1, 0, c11[n], push(muvar));
    cx->left_faces(0, 1, c11[n], push(nuvar));
    sys.add_equation(row, 0);
  }
  auto sol = sys.solve();
  if (!sol) return std::nullopt;
  MoritaWitness w{cx->zero(1, 0, M), cx->zero(0, 1, M)};
  for (std::size_t i = 0; i < mucells.size(); ++i)
    if (muvar[i] >= 0) w.mu.values[i] = (*sol)[muvar[i]];
  for (std::size_t i = 0; i < nucells.size(); ++i)
    if (nuvar[i] >= 0) w.nu.values[i] = (*sol)[nuvar[i]];
  return w;
}

WitnessResidual witness_residual(const MoritaWitness& w, const Cochain& psi, const Cochain& chi) {
  const auto& cx = *w.mu.complex;
  WitnessResidual r;
  auto l = cx.delta_left(w.mu) - cx.augment_left(psi);
  auto rr = cx.delta_right(w.nu) - cx.augment_right(chi);
  auto m = cx.delta_right(w.mu) + cx.delta_left(w.nu);
  auto scan = [&](const BiCochain& c, long& count, const char* what) {
    const auto& cs = cx.cells(c.hdeg, c.kdeg);
    for (std::size_t i = 0; i < c.values.size(); ++i)
      if (c.values[i]) {
        if (count++ == 0) r.first.push_back(std::string(what) + " fails at " + cx.describe(c.hdeg, c.kdeg, cs[i]));
      }
  };
  scan(l, r.left_failures, "left equation");
  scan(rr, r.right_failures, "right equation");
  scan(m, r.mixed_failures, "commutation equation");
  return r;
}

}  // namespace tdual
