#pragma once
// Finite groupoids with dense index tables, their nerves, group actions on
// them and an isomorphism search for small instances.

#include <array>
#include <atomic>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "tdual/group.hpp"
#include "tdual/report.hpp"

namespace tdual {

class FiniteGroupoid;
using GroupoidPtr = std::shared_ptr<const FiniteGroupoid>;

/// Composable k-tuples (g1,...,gk) with s(g_i) = r(g_{i+1}).
/// Degree 0 tuples are objects, degree 1 tuples are arrows.
class Nerve {
 public:
  explicit Nerve(const FiniteGroupoid& g) : g_(g) {}
  std::size_t count(int k) const;
  /// Pointer to the k entries of tuple `idx` (k >= 1).
  const int* tuple(int k, std::size_t idx) const;
  std::size_t index(int k, const int* t) const;
  /// Index of (prefix tuple, last arrow); `last` must be composable.
  std::size_t extend(int k, std::size_t prefix, int last) const;

 private:
  void ensure(int k) const;
  const FiniteGroupoid& g_;
  mutable std::mutex mu_;
  // level k (k >= 2): start offsets indexed by (k-1)-tuple index, flattened tuples
  mutable std::vector<std::vector<std::size_t>> start_;
  mutable std::vector<std::vector<int>> flat_;
  mutable std::vector<std::size_t> counts_;
  mutable std::atomic<int> built_{-1};
};

/// Raw tables as they appear in a serialized document; may be invalid.
struct GroupoidTables {
  int objects = 0;
  std::vector<std::array<int, 2>> arrows;  // (src, dst)
  std::vector<std::array<int, 3>> compose;  // (a, b, ab) with src(a) = dst(b)
  std::vector<int> inverse;
  std::vector<int> units;
  std::vector<int> point_of;  // optional
  int base_points = 0;
};

class FiniteGroupoid {
 public:
  FiniteGroupoid() = default;
  FiniteGroupoid(const FiniteGroupoid&) = delete;
  FiniteGroupoid& operator=(const FiniteGroupoid&) = delete;

  int objects() const { return n_obj_; }
  int arrows() const { return static_cast<int>(src_.size()); }
  int src(int a) const { return src_[a]; }
  int dst(int a) const { return dst_[a]; }
  int unit(int x) const { return unit_[x]; }
  int inv(int a) const { return inv_[a]; }
  bool is_unit(int a) const { return unit_[src_[a]] == a; }
  bool composable(int a, int b) const { return src_[a] == dst_[b]; }
  /// Product ab, defined when s(a) = r(b); -1 otherwise.
  int compose(int a, int b) const {
    const int x = src_[a];
    if (x != dst_[b]) return -1;
    return comp_[cbase_[x] + std::size_t(rank_from_[a]) * into_[x].size() + rank_into_[b]];
  }
  const std::vector<int>& from(int x) const { return from_[x]; }  // arrows with s = x
  const std::vector<int>& into(int x) const { return into_[x]; }  // arrows with r = x
  int rank_from(int a) const { return rank_from_[a]; }
  int rank_into(int a) const { return rank_into_[a]; }

  bool has_points() const { return !point_of_.empty(); }
  int point_of(int x) const { return point_of_[x]; }
  int base_points() const { return base_points_; }

  const Nerve& nerve() const;
  std::string name;

  /// Builds from structure maps and a composition rule called on composable pairs.
  static GroupoidPtr build(int objects, std::vector<int> src, std::vector<int> dst, std::vector<int> unit,
                           std::vector<int> inv, const std::function<int(int, int)>& comp,
                           std::vector<int> point_of = {}, int base_points = 0, std::string name = {});
  /// Builds from raw tables; throws std::invalid_argument when structurally malformed.
  static GroupoidPtr from_tables(const GroupoidTables& t, std::string name = {});
  GroupoidTables tables() const;

 private:
  void index();
  int n_obj_ = 0;
  std::vector<int> src_, dst_, unit_, inv_;
  std::vector<std::vector<int>> from_, into_;
  std::vector<int> rank_from_, rank_into_;
  std::vector<std::size_t> cbase_;
  std::vector<int> comp_;
  std::vector<int> point_of_;
  int base_points_ = 0;
  mutable std::unique_ptr<Nerve> nerve_;
  mutable std::once_flag nerve_once_;
};

/// Lists every violated axiom or certifies validity.
Report validate_groupoid(const GroupoidTables& t);
Report validate_groupoid(const FiniteGroupoid& g);

GroupoidPtr point_groupoid();
GroupoidPtr pair_groupoid(int n);
GroupoidPtr group_groupoid(const FiniteGroup& g);
/// Disjoint union of unit groupoids on n objects.
GroupoidPtr unit_groupoid(int n);

/// Orbits of the object set under arrows (connected components).
std::vector<int> object_components(const FiniteGroupoid& g, int* count = nullptr);
/// Isotropy group at x as a list of loop arrows.
std::vector<int> isotropy(const FiniteGroupoid& g, int x);

/// Full subgroupoid on an object subset; returns the subgroupoid and the
/// arrow embedding.
std::pair<GroupoidPtr, std::vector<int>> full_subgroupoid(const FiniteGroupoid& g, const std::vector<int>& objs);

/// Left action of a finite group on a groupoid by automorphisms.
struct GroupAction {
  GroupPtr group;
  GroupoidPtr target;
  std::vector<int> arrow_act;  // [g * |arrows| + a]
  std::vector<int> object_act;  // [g * |objects| + x]

  int act(int g, int a) const { return arrow_act[std::size_t(g) * target->arrows() + a]; }
  int act_obj(int g, int x) const { return object_act[std::size_t(g) * target->objects() + x]; }
};

/// Builds an action from an arrow table; object action is read off units.
GroupAction make_action(GroupPtr g, GroupoidPtr target, std::vector<int> arrow_act);
GroupAction trivial_action(GroupPtr g, GroupoidPtr target);
Report check_action(const GroupAction& a);

struct GroupoidIso {
  std::vector<int> objects;
  std::vector<int> arrows;
};

/// Backtracking isomorphism search; throws when either side exceeds `cap`
/// arrows. With both actions supplied, only equivariant isomorphisms count.
std::optional<GroupoidIso> find_isomorphism(const FiniteGroupoid& a, const FiniteGroupoid& b, int cap = 64,
                                            const GroupAction* act_a = nullptr,
                                            const GroupAction* act_b = nullptr);

}  // namespace tdual
