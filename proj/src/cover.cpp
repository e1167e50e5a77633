#include "tdual/cover.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace tdual {

Bimodule make_bimodule(GroupoidPtr left, GroupoidPtr right, int carrier, std::vector<int> lmoment,
                       std::vector<int> rmoment, const std::function<int(int, int)>& left_rule,
                       const std::function<int(int, int)>& right_rule, std::string name) {
  Bimodule b;
  b.left = std::move(left);
  b.right = std::move(right);
  b.carrier = carrier;
  b.lmoment = std::move(lmoment);
  b.rmoment = std::move(rmoment);
  b.name = std::move(name);
  b.loff.resize(carrier + 1);
  b.roff.resize(carrier + 1);
  for (int p = 0; p < carrier; ++p) {
    b.loff[p + 1] = b.loff[p] + static_cast<int>(b.left->from(b.lmoment[p]).size());
    b.roff[p + 1] = b.roff[p] + static_cast<int>(b.right->into(b.rmoment[p]).size());
  }
  b.lact.resize(b.loff[carrier]);
  b.ract.resize(b.roff[carrier]);
  for (int p = 0; p < carrier; ++p) {
    for (int g : b.left->from(b.lmoment[p])) b.lact[b.loff[p] + b.left->rank_from(g)] = left_rule(g, p);
    for (int h : b.right->into(b.rmoment[p])) b.ract[b.roff[p] + b.right->rank_into(h)] = right_rule(p, h);
  }
  return b;
}

Bimodule identity_bimodule(GroupoidPtr g) {
  const auto& G = *g;
  std::vector<int> l(G.arrows()), r(G.arrows());
  for (int a = 0; a < G.arrows(); ++a) {
    l[a] = G.dst(a);
    r[a] = G.src(a);
  }
  auto b = make_bimodule(
      g, g, G.arrows(), l, r, [&G](int x, int p) { return G.compose(x, p); },
      [&G](int p, int y) { return G.compose(p, y); }, "identity(" + G.name + ")");
  b.left_section.resize(G.objects());
  for (int x = 0; x < G.objects(); ++x) b.left_section[x] = G.unit(x);
  return b;
}

Bimodule opposite(const Bimodule& p) {
  const auto& L = *p.left;
  const auto& R = *p.right;
  auto b = make_bimodule(
      p.right, p.left, p.carrier, p.rmoment, p.lmoment, [&](int h, int x) { return p.right_act(x, R.inv(h)); },
      [&](int x, int g) { return p.left_act(L.inv(g), x); }, p.name + "^op");
  b.gleft = p.gright;
  b.gright = p.gleft;
  b.gcarrier = p.gcarrier;
  return b;
}

Refinement refine(GroupoidPtr gp, std::vector<std::vector<int>> cover) {
  const auto& G = *gp;
  if (cover.empty()) throw std::invalid_argument("refine: empty cover");
  std::vector<char> hit(G.objects(), 0);
  for (auto& u : cover) {
    std::sort(u.begin(), u.end());
    u.erase(std::unique(u.begin(), u.end()), u.end());
    for (int x : u) {
      if (x < 0 || x >= G.objects()) throw std::invalid_argument("refine: cover member names an unknown object");
      hit[x] = 1;
    }
  }
  for (int x = 0; x < G.objects(); ++x)
    if (!hit[x]) throw std::invalid_argument("refine: cover does not exhaust the objects (missing " + std::to_string(x) + ")");
  const int k = static_cast<int>(cover.size());
  Refinement R;
  // obj_id[i][x] = refined object index or -1
  std::vector<std::vector<int>> obj_id(k, std::vector<int>(G.objects(), -1));
  for (int i = 0; i < k; ++i)
    for (int x : cover[i]) {
      obj_id[i][x] = static_cast<int>(R.objects.size());
      R.objects.push_back({i, x});
    }
  struct Arr {
    int i, j, a;
  };
  std::vector<Arr> arrs;
  std::vector<std::vector<std::vector<int>>> arr_id(k, std::vector<std::vector<int>>(k));
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      arr_id[i][j].assign(G.arrows(), -1);
      for (int a = 0; a < G.arrows(); ++a)
        if (obj_id[i][G.dst(a)] >= 0 && obj_id[j][G.src(a)] >= 0) {
          arr_id[i][j][a] = static_cast<int>(arrs.size());
          arrs.push_back({i, j, a});
        }
    }
  const int n = static_cast<int>(arrs.size());
  std::vector<int> src(n), dst(n), inv(n), unit(R.objects.size()), pts;
  for (int t = 0; t < n; ++t) {
    auto [i, j, a] = arrs[t];
    src[t] = obj_id[j][G.src(a)];
    dst[t] = obj_id[i][G.dst(a)];
    inv[t] = arr_id[j][i][G.inv(a)];
    R.gluing.push_back(a);
  }
  for (std::size_t o = 0; o < R.objects.size(); ++o) {
    auto [i, x] = R.objects[o];
    unit[o] = arr_id[i][i][G.unit(x)];
    if (G.has_points()) pts.push_back(G.point_of(x));
  }
  R.groupoid = FiniteGroupoid::build(
      static_cast<int>(R.objects.size()), src, dst, unit, inv,
      [&](int t, int u) { return arr_id[arrs[t].i][arrs[u].j][G.compose(arrs[t].a, arrs[u].a)]; }, pts,
      G.base_points(), G.name + "|refined");

  // P = disjoint union over i of s^{-1}U_i
  std::vector<std::pair<int, int>> carrier;
  std::vector<std::vector<int>> pid(k, std::vector<int>(G.arrows(), -1));
  for (int i = 0; i < k; ++i)
    for (int a = 0; a < G.arrows(); ++a)
      if (obj_id[i][G.src(a)] >= 0) {
        pid[i][a] = static_cast<int>(carrier.size());
        carrier.push_back({i, a});
      }
  const int np = static_cast<int>(carrier.size());
  std::vector<int> lm(np), rm(np);
  for (int p = 0; p < np; ++p) {
    auto [i, a] = carrier[p];
    lm[p] = G.dst(a);
    rm[p] = obj_id[i][G.src(a)];
  }
  auto refined = R.groupoid;
  R.bimodule = make_bimodule(
      gp, refined, np, lm, rm,
      [&](int g, int p) { return pid[carrier[p].first][G.compose(g, carrier[p].second)]; },
      [&](int p, int t) { return pid[arrs[t].j][G.compose(carrier[p].second, arrs[t].a)]; }, "refinement");
  return R;
}

GroupoidPtr cech_groupoid(const CoveredBase& cb) {
  if (cb.cover.empty()) throw std::invalid_argument("cech_groupoid: empty cover");
  std::vector<int> ids(cb.base_points);
  std::iota(ids.begin(), ids.end(), 0);
  auto base = FiniteGroupoid::build(
      cb.base_points, ids, ids, ids, ids, [](int a, int) { return a; }, ids, cb.base_points, "X");
  for (const auto& u : cb.cover)
    for (int m : u)
      if (m < 0 || m >= cb.base_points) throw std::invalid_argument("cech_groupoid: cover names an unknown point");
  // members may not exhaust the base; restrict the base to the union first
  std::vector<char> hit(cb.base_points, 0);
  for (const auto& u : cb.cover)
    for (int m : u) hit[m] = 1;
  for (int m = 0; m < cb.base_points; ++m)
    if (!hit[m]) throw std::invalid_argument("cech_groupoid: cover does not exhaust the base points");
  auto R = refine(base, cb.cover);
  auto tabs = R.groupoid->tables();
  return FiniteGroupoid::from_tables(tabs, "cech");
}

GroupoidPtr restrict_to_point(const FiniteGroupoid& g, int m) {
  if (!g.has_points()) throw std::invalid_argument("restrict_to_point: groupoid carries no base assignment");
  std::vector<int> objs;
  for (int x = 0; x < g.objects(); ++x)
    if (g.point_of(x) == m) objs.push_back(x);
  if (objs.empty()) throw std::invalid_argument("restrict_to_point: point " + std::to_string(m) + " lies in no cover member");
  return full_subgroupoid(g, objs).first;
}

}  // namespace tdual
