#include "tdual/groupoid.hpp"

#include <algorithm>
#include <atomic>
#include <deque>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace tdual {

namespace {
constexpr int kMaxNerveDegree = 8;

std::string tuple_str(std::initializer_list<int> v) {
  std::ostringstream os;
  os << "(";
  bool first = true;
  for (int x : v) {
    os << (first ? "" : ",") << x;
    first = false;
  }
  os << ")";
  return os.str();
}
}  // namespace

// ---------------------------------------------------------------- Nerve

void Nerve::ensure(int k) const {
  if (k <= built_.load(std::memory_order_acquire)) return;
  if (k > kMaxNerveDegree) throw std::out_of_range("nerve degree too large");
  std::lock_guard<std::mutex> lock(mu_);
  if (counts_.empty()) {
    start_.resize(kMaxNerveDegree + 1);
    flat_.resize(kMaxNerveDegree + 1);
    counts_.reserve(kMaxNerveDegree + 1);
    counts_.push_back(g_.objects());
    counts_.push_back(g_.arrows());
    flat_[1].resize(g_.arrows());
    std::iota(flat_[1].begin(), flat_[1].end(), 0);
  }
  while (static_cast<int>(counts_.size()) <= k) {
    const int lvl = static_cast<int>(counts_.size());
    const std::size_t prev = counts_[lvl - 1];
    auto& st = start_[lvl];
    auto& fl = flat_[lvl];
    st.resize(prev + 1);
    std::size_t total = 0;
    for (std::size_t p = 0; p < prev; ++p) {
      st[p] = total;
      int last = flat_[lvl - 1][p * (lvl - 1) + (lvl - 2)];
      total += g_.into(g_.src(last)).size();
    }
    st[prev] = total;
    fl.resize(total * lvl);
    std::size_t idx = 0;
    for (std::size_t p = 0; p < prev; ++p) {
      const int* pt = &flat_[lvl - 1][p * (lvl - 1)];
      int last = pt[lvl - 2];
      for (int c : g_.into(g_.src(last))) {
        std::copy(pt, pt + lvl - 1, &fl[idx * lvl]);
        fl[idx * lvl + lvl - 1] = c;
        ++idx;
      }
    }
    counts_.push_back(total);
  }
  built_.store(static_cast<int>(counts_.size()) - 1, std::memory_order_release);
}

std::size_t Nerve::count(int k) const {
  ensure(k);
  return counts_[k];
}

const int* Nerve::tuple(int k, std::size_t idx) const {
  ensure(k);
  return &flat_[k][idx * k];
}

std::size_t Nerve::index(int k, const int* t) const {
  if (k == 0) return static_cast<std::size_t>(t[0]);
  ensure(k);
  std::size_t idx = static_cast<std::size_t>(t[0]);
  for (int i = 2; i <= k; ++i) idx = start_[i][idx] + g_.rank_into(t[i - 1]);
  return idx;
}

std::size_t Nerve::extend(int k, std::size_t prefix, int last) const {
  ensure(k);
  return start_[k][prefix] + g_.rank_into(last);
}

// ---------------------------------------------------------------- FiniteGroupoid

const Nerve& FiniteGroupoid::nerve() const {
  std::call_once(nerve_once_, [this] { nerve_ = std::make_unique<Nerve>(*this); });
  return *nerve_;
}

void FiniteGroupoid::index() {
  const int na = arrows();
  from_.assign(n_obj_, {});
  into_.assign(n_obj_, {});
  rank_from_.assign(na, 0);
  rank_into_.assign(na, 0);
  for (int a = 0; a < na; ++a) {
    rank_from_[a] = static_cast<int>(from_[src_[a]].size());
    from_[src_[a]].push_back(a);
    rank_into_[a] = static_cast<int>(into_[dst_[a]].size());
    into_[dst_[a]].push_back(a);
  }
  cbase_.assign(n_obj_ + 1, 0);
  for (int x = 0; x < n_obj_; ++x) cbase_[x + 1] = cbase_[x] + from_[x].size() * into_[x].size();
  comp_.assign(cbase_[n_obj_], -1);
}

GroupoidPtr FiniteGroupoid::build(int objects, std::vector<int> src, std::vector<int> dst, std::vector<int> unit,
                                  std::vector<int> inv, const std::function<int(int, int)>& comp,
                                  std::vector<int> point_of, int base_points, std::string name) {
  auto g = std::shared_ptr<FiniteGroupoid>(new FiniteGroupoid());
  g->n_obj_ = objects;
  g->src_ = std::move(src);
  g->dst_ = std::move(dst);
  g->unit_ = std::move(unit);
  g->inv_ = std::move(inv);
  g->point_of_ = std::move(point_of);
  g->base_points_ = base_points;
  g->name = std::move(name);
  g->index();
  for (int x = 0; x < objects; ++x)
    for (int a : g->from_[x])
      for (int b : g->into_[x])
        g->comp_[g->cbase_[x] + std::size_t(g->rank_from_[a]) * g->into_[x].size() + g->rank_into_[b]] = comp(a, b);
  return g;
}

GroupoidPtr FiniteGroupoid::from_tables(const GroupoidTables& t, std::string name) {
  const int na = static_cast<int>(t.arrows.size());
  auto bad = [](const std::string& m) { throw std::invalid_argument(m); };
  if (t.objects < 0) bad("negative object count");
  if (static_cast<int>(t.units.size()) != t.objects) bad("units table has wrong length");
  if (static_cast<int>(t.inverse.size()) != na) bad("inverse table has wrong length");
  std::vector<int> src(na), dst(na);
  for (int a = 0; a < na; ++a) {
    src[a] = t.arrows[a][0];
    dst[a] = t.arrows[a][1];
    if (src[a] < 0 || src[a] >= t.objects || dst[a] < 0 || dst[a] >= t.objects)
      bad("arrow " + std::to_string(a) + " has an endpoint out of range");
    if (t.inverse[a] < 0 || t.inverse[a] >= na) bad("inverse of arrow " + std::to_string(a) + " out of range");
  }
  for (int x = 0; x < t.objects; ++x)
    if (t.units[x] < 0 || t.units[x] >= na) bad("unit of object " + std::to_string(x) + " out of range");
  if (!t.point_of.empty() && static_cast<int>(t.point_of.size()) != t.objects) bad("point_of has wrong length");
  auto g = std::shared_ptr<FiniteGroupoid>(new FiniteGroupoid());
  g->n_obj_ = t.objects;
  g->src_ = src;
  g->dst_ = dst;
  g->unit_ = t.units;
  g->inv_ = t.inverse;
  g->point_of_ = t.point_of;
  g->base_points_ = t.base_points;
  g->name = std::move(name);
  g->index();
  for (const auto& tr : t.compose) {
    int a = tr[0], b = tr[1], c = tr[2];
    if (a < 0 || a >= na || b < 0 || b >= na || c < 0 || c >= na) bad("compose triple " + tuple_str({a, b, c}) + " out of range");
    if (src[a] != dst[b]) bad("compose triple " + tuple_str({a, b, c}) + " on a non-composable pair");
    auto& slot = g->comp_[g->cbase_[src[a]] + std::size_t(g->rank_from_[a]) * g->into_[src[a]].size() + g->rank_into_[b]];
    if (slot >= 0) bad("compose triple " + tuple_str({a, b, c}) + " duplicates a pair");
    slot = c;
  }
  for (int x = 0; x < t.objects; ++x)
    for (int a : g->from_[x])
      for (int b : g->into_[x])
        if (g->compose(a, b) < 0) bad("composable pair " + tuple_str({a, b}) + " has no compose triple");
  return g;
}

GroupoidTables FiniteGroupoid::tables() const {
  GroupoidTables t;
  t.objects = n_obj_;
  for (int a = 0; a < arrows(); ++a) t.arrows.push_back({src_[a], dst_[a]});
  for (int a = 0; a < arrows(); ++a)
    for (int b : into_[src_[a]]) t.compose.push_back({a, b, compose(a, b)});
  std::sort(t.compose.begin(), t.compose.end());
  t.inverse = inv_;
  t.units = unit_;
  t.point_of = point_of_;
  t.base_points = base_points_;
  return t;
}

// ---------------------------------------------------------------- validation

Report validate_groupoid(const GroupoidTables& t) {
  Report rep;
  rep.subject = "groupoid";
  GroupoidPtr g;
  try {
    g = FiniteGroupoid::from_tables(t);
  } catch (const std::invalid_argument& e) {
    rep.add("structure", false, e.what());
    return rep;
  }
  rep.add("structure", true);
  rep.merge(validate_groupoid(*g));
  return rep;
}

Report validate_groupoid(const FiniteGroupoid& g) {
  Report rep;
  rep.subject = "groupoid " + g.name;
  const int na = g.arrows();
  std::string bad;
  std::size_t nbad = 0;
  auto note = [&](const std::string& s) {
    if (bad.empty()) bad = s;
    ++nbad;
  };
  auto flush = [&](const std::string& id) {
    rep.add(id, nbad == 0, nbad ? bad + (nbad > 1 ? " (+" + std::to_string(nbad - 1) + " more)" : "") : "");
    bad.clear();
    nbad = 0;
  };
  for (int a = 0; a < na; ++a)
    for (int b : g.into(g.src(a))) {
      int c = g.compose(a, b);
      if (c < 0 || c >= na || g.src(c) != g.src(b) || g.dst(c) != g.dst(a)) note("pair " + tuple_str({a, b}) + " -> " + std::to_string(c));
    }
  flush("compose.endpoints");
  // partial products stay defined on malformed tables so later checks still name triples
  auto mul = [&](int a, int b) { return a < 0 || b < 0 || a >= na || b >= na ? -1 : g.compose(a, b); };
  for (int x = 0; x < g.objects(); ++x) {
    int u = g.unit(x);
    if (g.src(u) != x || g.dst(u) != x) {
      note("unit of object " + std::to_string(x) + " is not a loop at it");
      continue;
    }
    for (int a : g.into(x))
      if (g.compose(u, a) != a) note("unit " + std::to_string(u) + " fails on the left of " + std::to_string(a));
    for (int a : g.from(x))
      if (g.compose(a, u) != a) note("unit " + std::to_string(u) + " fails on the right of " + std::to_string(a));
  }
  flush("units");
  for (int a = 0; a < na; ++a) {
    int i = g.inv(a);
    if (g.src(i) != g.dst(a) || g.dst(i) != g.src(a)) {
      note("inverse of " + std::to_string(a) + " has wrong endpoints");
      continue;
    }
    if (g.compose(a, i) != g.unit(g.dst(a)) || g.compose(i, a) != g.unit(g.src(a)))
      note("inverse of " + std::to_string(a) + " does not compose to units");
  }
  flush("inverses");
  for (int a = 0; a < na; ++a)
    for (int b : g.into(g.src(a)))
      for (int c : g.into(g.src(b)))
        if (mul(mul(a, b), c) != mul(a, mul(b, c))) note("triple " + tuple_str({a, b, c}));
  flush("associativity");
  return rep;
}

// ---------------------------------------------------------------- builders

GroupoidPtr point_groupoid() { return pair_groupoid(1); }

GroupoidPtr pair_groupoid(int n) {
  std::vector<int> src(n * n), dst(n * n), unit(n), inv(n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      src[i * n + j] = j;
      dst[i * n + j] = i;
      inv[i * n + j] = j * n + i;
    }
  for (int i = 0; i < n; ++i) unit[i] = i * n + i;
  return FiniteGroupoid::build(
      n, src, dst, unit, inv, [n](int a, int b) { return (a / n) * n + (b % n); }, {}, 0,
      n == 1 ? "point" : "pair(" + std::to_string(n) + ")");
}

GroupoidPtr group_groupoid(const FiniteGroup& g) {
  std::vector<int> src(g.order, 0), dst(g.order, 0);
  return FiniteGroupoid::build(
      1, src, dst, {g.id}, g.inv, [&g](int a, int b) { return g.mul(a, b); }, {}, 0, g.name);
}

GroupoidPtr unit_groupoid(int n) {
  std::vector<int> ids(n);
  std::iota(ids.begin(), ids.end(), 0);
  return FiniteGroupoid::build(
      n, ids, ids, ids, ids, [](int a, int) { return a; }, {}, 0, "units(" + std::to_string(n) + ")");
}

std::vector<int> object_components(const FiniteGroupoid& g, int* count) {
  std::vector<int> comp(g.objects(), -1);
  int c = 0;
  for (int x = 0; x < g.objects(); ++x) {
    if (comp[x] >= 0) continue;
    std::deque<int> q{x};
    comp[x] = c;
    while (!q.empty()) {
      int y = q.front();
      q.pop_front();
      for (int a : g.from(y))
        if (comp[g.dst(a)] < 0) {
          comp[g.dst(a)] = c;
          q.push_back(g.dst(a));
        }
    }
    ++c;
  }
  if (count) *count = c;
  return comp;
}

std::vector<int> isotropy(const FiniteGroupoid& g, int x) {
  std::vector<int> out;
  for (int a : g.from(x))
    if (g.dst(a) == x) out.push_back(a);
  return out;
}

std::pair<GroupoidPtr, std::vector<int>> full_subgroupoid(const FiniteGroupoid& g, const std::vector<int>& objs) {
  std::vector<int> oidx(g.objects(), -1);
  for (std::size_t i = 0; i < objs.size(); ++i) oidx[objs[i]] = static_cast<int>(i);
  std::vector<int> emb, aidx(g.arrows(), -1);
  for (int a = 0; a < g.arrows(); ++a)
    if (oidx[g.src(a)] >= 0 && oidx[g.dst(a)] >= 0) {
      aidx[a] = static_cast<int>(emb.size());
      emb.push_back(a);
    }
  const int n = static_cast<int>(emb.size());
  std::vector<int> src(n), dst(n), inv(n), unit(objs.size()), pts;
  for (int i = 0; i < n; ++i) {
    src[i] = oidx[g.src(emb[i])];
    dst[i] = oidx[g.dst(emb[i])];
    inv[i] = aidx[g.inv(emb[i])];
  }
  for (std::size_t i = 0; i < objs.size(); ++i) unit[i] = aidx[g.unit(objs[i])];
  if (g.has_points())
    for (int x : objs) pts.push_back(g.point_of(x));
  auto sub = FiniteGroupoid::build(
      static_cast<int>(objs.size()), src, dst, unit, inv,
      [&](int a, int b) { return aidx[g.compose(emb[a], emb[b])]; }, pts, g.base_points(), g.name + "|sub");
  return {sub, emb};
}

// ---------------------------------------------------------------- actions

GroupAction make_action(GroupPtr g, GroupoidPtr target, std::vector<int> arrow_act) {
  GroupAction a;
  a.group = std::move(g);
  a.target = std::move(target);
  a.arrow_act = std::move(arrow_act);
  const int no = a.target->objects(), na = a.target->arrows();
  if (a.arrow_act.size() != std::size_t(a.group->order) * na) throw std::invalid_argument("action table has wrong size");
  a.object_act.assign(std::size_t(a.group->order) * no, 0);
  for (int h = 0; h < a.group->order; ++h)
    for (int x = 0; x < no; ++x) {
      int img = a.act(h, a.target->unit(x));
      if (img < 0 || img >= na) throw std::invalid_argument("action table entry out of range");
      a.object_act[std::size_t(h) * no + x] = a.target->src(img);
    }
  return a;
}

GroupAction trivial_action(GroupPtr g, GroupoidPtr target) {
  const int na = target->arrows();
  std::vector<int> t(std::size_t(g->order) * na);
  for (int h = 0; h < g->order; ++h)
    for (int a = 0; a < na; ++a) t[std::size_t(h) * na + a] = a;
  return make_action(std::move(g), std::move(target), std::move(t));
}

Report check_action(const GroupAction& a) {
  Report rep;
  rep.subject = "action of " + a.group->name + " on " + a.target->name;
  const auto& G = *a.group;
  const auto& H = *a.target;
  const int na = H.arrows();
  std::string bad;
  for (int g = 0; g < G.order && bad.empty(); ++g) {
    std::vector<char> hit(na, 0);
    for (int x = 0; x < na; ++x) {
      int y = a.act(g, x);
      if (y < 0 || y >= na || hit[y]) {
        bad = "element " + std::to_string(g) + " does not act bijectively";
        break;
      }
      hit[y] = 1;
    }
  }
  rep.add("bijective", bad.empty(), bad);
  if (!bad.empty()) return rep;
  for (int x = 0; x < na && bad.empty(); ++x)
    if (a.act(G.id, x) != x) bad = "identity moves arrow " + std::to_string(x);
  for (int g = 0; g < G.order && bad.empty(); ++g)
    for (int h = 0; h < G.order && bad.empty(); ++h)
      for (int x = 0; x < na; ++x)
        if (a.act(G.mul(g, h), x) != a.act(g, a.act(h, x))) {
          bad = "(gh)x != g(hx) at " + tuple_str({g, h, x});
          break;
        }
  rep.add("homomorphism", bad.empty(), bad);
  bad.clear();
  for (int g = 0; g < G.order && bad.empty(); ++g) {
    for (int x = 0; x < H.objects(); ++x)
      if (!H.is_unit(a.act(g, H.unit(x)))) {
        bad = "unit not preserved " + tuple_str({g, x});
        break;
      }
    for (int x = 0; x < na && bad.empty(); ++x) {
      int y = a.act(g, x);
      if (H.src(y) != a.act_obj(g, H.src(x)) || H.dst(y) != a.act_obj(g, H.dst(x)))
        bad = "source/range not equivariant " + tuple_str({g, x});
      else if (H.inv(y) != a.act(g, H.inv(x)))
        bad = "inverse not equivariant " + tuple_str({g, x});
    }
  }
  rep.add("structure-maps", bad.empty(), bad);
  bad.clear();
  for (int g = 0; g < G.order && bad.empty(); ++g)
    for (int x = 0; x < na && bad.empty(); ++x)
      for (int y : H.into(H.src(x)))
        if (a.act(g, H.compose(x, y)) != H.compose(a.act(g, x), a.act(g, y))) {
          bad = "composition not equivariant " + tuple_str({g, x, y});
          break;
        }
  rep.add("composition", bad.empty(), bad);
  return rep;
}

// ---------------------------------------------------------------- isomorphism

namespace {

std::vector<std::array<int, 5>> arrow_signatures(const FiniteGroupoid& g) {
  int ncomp = 0;
  auto comp = object_components(g, &ncomp);
  std::vector<int> csize(ncomp, 0);
  for (int c : comp) ++csize[c];
  std::vector<std::array<int, 5>> sig(g.arrows());
  for (int a = 0; a < g.arrows(); ++a) {
    int loop_order = 0;
    if (g.src(a) == g.dst(a)) {
      int x = a;
      loop_order = 1;
      while (!g.is_unit(x)) {
        x = g.compose(x, a);
        ++loop_order;
      }
    }
    sig[a] = {g.is_unit(a) ? 1 : 0, g.src(a) == g.dst(a) ? 1 : 0, static_cast<int>(isotropy(g, g.src(a)).size()),
              csize[comp[g.src(a)]], loop_order};
  }
  return sig;
}

struct IsoSearch {
  const FiniteGroupoid& A;
  const FiniteGroupoid& B;
  const GroupAction* ga;
  const GroupAction* gb;
  std::vector<std::array<int, 5>> sa, sb;
  std::vector<int> amap, binv;
  std::vector<int> trail;
  std::deque<int> queue;

  bool push(int a, int b) {
    if (a < 0 || b < 0) return false;
    if (amap[a] == b) return true;
    if (amap[a] >= 0 || binv[b] >= 0 || sa[a] != sb[b]) return false;
    amap[a] = b;
    binv[b] = a;
    trail.push_back(a);
    queue.push_back(a);
    return true;
  }
  bool propagate() {
    while (!queue.empty()) {
      int a = queue.front();
      queue.pop_front();
      int b = amap[a];
      if (!push(A.unit(A.src(a)), B.unit(B.src(b))) || !push(A.unit(A.dst(a)), B.unit(B.dst(b))) ||
          !push(A.inv(a), B.inv(b)))
        return false;
      for (int c : A.from(A.dst(a)))
        if (amap[c] >= 0) {
          int bc = B.compose(amap[c], b);
          if (bc < 0 || !push(A.compose(c, a), bc)) return false;
        }
      for (int c : A.into(A.src(a)))
        if (amap[c] >= 0) {
          int bc = B.compose(b, amap[c]);
          if (bc < 0 || !push(A.compose(a, c), bc)) return false;
        }
      if (ga && gb)
        for (int g = 0; g < ga->group->order; ++g)
          if (!push(ga->act(g, a), gb->act(g, b))) return false;
    }
    return true;
  }
  void undo(std::size_t mark) {
    while (trail.size() > mark) {
      int a = trail.back();
      trail.pop_back();
      binv[amap[a]] = -1;
      amap[a] = -1;
    }
    queue.clear();
  }
  bool run() {
    int a = -1;
    for (int x = 0; x < A.arrows(); ++x)
      if (amap[x] < 0) {
        a = x;
        break;
      }
    if (a < 0) return true;
    for (int b = 0; b < B.arrows(); ++b) {
      if (binv[b] >= 0 || sa[a] != sb[b]) continue;
      std::size_t mark = trail.size();
      if (push(a, b) && propagate() && run()) return true;
      undo(mark);
    }
    return false;
  }
};

}  // namespace

std::optional<GroupoidIso> find_isomorphism(const FiniteGroupoid& a, const FiniteGroupoid& b, int cap,
                                            const GroupAction* act_a, const GroupAction* act_b) {
  if (a.arrows() > cap || b.arrows() > cap)
    throw std::length_error("isomorphism search beyond the configured cap of " + std::to_string(cap) + " arrows");
  if (a.arrows() != b.arrows() || a.objects() != b.objects()) return std::nullopt;
  if (act_a && act_b && act_a->group->order != act_b->group->order) return std::nullopt;
  IsoSearch s{a, b, act_a, act_b, arrow_signatures(a), arrow_signatures(b), {}, {}, {}, {}};
  s.amap.assign(a.arrows(), -1);
  s.binv.assign(b.arrows(), -1);
  if (!s.run()) return std::nullopt;
  GroupoidIso iso;
  iso.arrows = s.amap;
  iso.objects.resize(a.objects());
  for (int x = 0; x < a.objects(); ++x) iso.objects[x] = b.src(s.amap[a.unit(x)]);
  return iso;
}

}  // namespace tdual
