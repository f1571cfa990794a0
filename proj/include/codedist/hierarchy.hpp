#pragma once

// Immutable is-a DAG store, focus sub-hierarchies and the common-ancestor
// concept distance.
//
// Distances are hop counts over the edge set the graph was built from. If
// the input contains transitively implied edges (a closure rather than the
// direct hierarchy), run transitive_reduction() first to recover the usual
// hop semantics.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "concept_id.hpp"
#include "error.hpp"

namespace codedist {

using Hops = std::uint32_t;

namespace detail {

template <typename T>
std::string join_some(const std::vector<T>& items, std::size_t limit = 10) {
  std::string out;
  for (std::size_t i = 0; i < items.size() && i < limit; ++i) {
    if (i) out += ", ";
    out += to_string(items[i]);
  }
  if (items.size() > limit)
    out += ", ... (" + std::to_string(items.size()) + " total)";
  return out;
}

}  // namespace detail

class HierarchyGraph {
 public:
  using Index = std::uint32_t;

  HierarchyGraph() = default;

  std::size_t concept_count() const noexcept { return ids_.size(); }
  std::size_t edge_count() const noexcept { return parent_list_.size(); }

  /// All concepts in ascending id order. Position in this span is the
  /// concept's dense index.
  std::span<const ConceptId> concepts() const noexcept { return ids_; }

  bool contains(ConceptId id) const { return index_.count(id) != 0; }

  std::optional<Index> index_of(ConceptId id) const {
    auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  ConceptId id_at(Index i) const { return ids_[i]; }

  std::span<const Index> parents(Index i) const {
    return {parent_list_.data() + parent_offsets_[i],
            parent_list_.data() + parent_offsets_[i + 1]};
  }

  std::span<const Index> children(Index i) const {
    return {child_list_.data() + child_offsets_[i],
            child_list_.data() + child_offsets_[i + 1]};
  }

  /// Edges sorted by (child, parent).
  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    out.reserve(edge_count());
    for (Index c = 0; c < ids_.size(); ++c)
      for (Index p : parents(c)) out.push_back({ids_[c], ids_[p]});
    return out;
  }

  friend bool operator==(const HierarchyGraph& a, const HierarchyGraph& b) {
    return a.ids_ == b.ids_ && a.parent_offsets_ == b.parent_offsets_ &&
           a.parent_list_ == b.parent_list_;
  }

 private:
  friend HierarchyGraph build_hierarchy(std::vector<ConceptId>,
                                        std::vector<Edge>);

  std::vector<ConceptId> ids_;
  std::unordered_map<ConceptId, Index> index_;
  std::vector<std::size_t> parent_offsets_{0};
  std::vector<Index> parent_list_;
  std::vector<std::size_t> child_offsets_{0};
  std::vector<Index> child_list_;
};

namespace detail {

// Kahn's algorithm from the parentless concepts downwards. Anything left
// over lies on a cycle or below one; walking leftover parents from any
// leftover node must revisit a node.
inline void check_acyclic(const HierarchyGraph& g) {
  using Index = HierarchyGraph::Index;
  const auto n = static_cast<Index>(g.concept_count());
  std::vector<std::size_t> pending(n);
  std::vector<Index> queue;
  queue.reserve(n);
  for (Index i = 0; i < n; ++i) {
    pending[i] = g.parents(i).size();
    if (pending[i] == 0) queue.push_back(i);
  }
  for (std::size_t head = 0; head < queue.size(); ++head)
    for (Index c : g.children(queue[head]))
      if (--pending[c] == 0) queue.push_back(c);
  if (queue.size() == n) return;

  Index start = 0;
  while (pending[start] == 0) ++start;
  std::vector<Index> order(n, std::numeric_limits<Index>::max());
  std::vector<Index> path;
  Index cur = start;
  while (order[cur] == std::numeric_limits<Index>::max()) {
    order[cur] = static_cast<Index>(path.size());
    path.push_back(cur);
    for (Index p : g.parents(cur)) {
      if (pending[p] != 0) {
        cur = p;
        break;
      }
    }
  }
  std::vector<unsigned long long> witness;
  for (std::size_t k = order[cur]; k < path.size(); ++k)
    witness.push_back(g.id_at(path[k]).value);
  witness.push_back(g.id_at(cur).value);
  throw CycleDetected(std::move(witness));
}

}  // namespace detail

/// Validates raw concept and edge lists and freezes them into a graph.
/// Duplicate concepts and duplicate edges are collapsed. Throws Error with
/// kind InvalidConceptId, SelfEdge or DanglingEdge, or CycleDetected.
inline HierarchyGraph build_hierarchy(std::vector<ConceptId> concepts,
                                      std::vector<Edge> edges) {
  using Index = HierarchyGraph::Index;

  std::sort(concepts.begin(), concepts.end());
  concepts.erase(std::unique(concepts.begin(), concepts.end()),
                 concepts.end());
  if (!concepts.empty() && !concepts.front().valid())
    throw Error(ErrorKind::InvalidConceptId, "concept id 0 is not allowed");
  if (concepts.size() >= std::numeric_limits<Index>::max())
    throw Error(ErrorKind::InvalidConceptId, "too many concepts");

  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  std::vector<ConceptId> self;
  for (const Edge& e : edges)
    if (e.child == e.parent) self.push_back(e.child);
  if (!self.empty())
    throw Error(ErrorKind::SelfEdge,
                "self is-a edge on concept(s): " + detail::join_some(self));

  HierarchyGraph g;
  g.index_.reserve(concepts.size());
  for (Index i = 0; i < concepts.size(); ++i) g.index_.emplace(concepts[i], i);

  std::vector<Edge> dangling;
  for (const Edge& e : edges)
    if (!g.index_.count(e.child) || !g.index_.count(e.parent))
      dangling.push_back(e);
  if (!dangling.empty())
    throw Error(ErrorKind::DanglingEdge,
                "edge references unknown concept: " +
                    detail::join_some(dangling));

  const std::size_t n = concepts.size();
  g.ids_ = std::move(concepts);

  // Edges are sorted by child id, and child ids are sorted the same way as
  // indices, so the parent CSR can be filled in one pass.
  g.parent_offsets_.assign(n + 1, 0);
  g.child_offsets_.assign(n + 1, 0);
  g.parent_list_.resize(edges.size());
  g.child_list_.resize(edges.size());
  for (const Edge& e : edges) {
    ++g.parent_offsets_[g.index_.at(e.child) + 1];
    ++g.child_offsets_[g.index_.at(e.parent) + 1];
  }
  for (std::size_t i = 0; i < n; ++i) {
    g.parent_offsets_[i + 1] += g.parent_offsets_[i];
    g.child_offsets_[i + 1] += g.child_offsets_[i];
  }
  std::vector<std::size_t> child_fill(g.child_offsets_.begin(),
                                      g.child_offsets_.end() - 1);
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const Index c = g.index_.at(edges[k].child);
    const Index p = g.index_.at(edges[k].parent);
    g.parent_list_[k] = p;
    g.child_list_[child_fill[p]++] = c;
  }

  detail::check_acyclic(g);
  return g;
}

/// The part of a hierarchy at or below one focus concept (for SNOMED CT,
/// typically 404684003 |Clinical finding|).
///
/// Membership decides which codes count as in-focus. With inclusive set the
/// focus root is itself a member; otherwise only strict descendants are.
/// Distance traversal always may pass through the root, so every pair of
/// members keeps at least one common ancestor.
///
/// The view refers to its graph; the graph must outlive it.
class FocusView {
 public:
  using Index = HierarchyGraph::Index;

  const HierarchyGraph& graph() const noexcept { return *graph_; }
  ConceptId root() const noexcept { return graph_->id_at(root_); }
  Index root_index() const noexcept { return root_; }
  bool inclusive() const noexcept { return inclusive_; }
  std::size_t size() const noexcept { return size_; }

  bool contains(ConceptId id) const {
    auto i = graph_->index_of(id);
    return i && member_[*i];
  }
  bool contains_index(Index i) const { return member_[i]; }
  bool traversable(Index i) const { return member_[i] || i == root_; }

  /// Members in ascending id order.
  std::vector<ConceptId> members() const {
    std::vector<ConceptId> out;
    out.reserve(size_);
    for (Index i = 0; i < member_.size(); ++i)
      if (member_[i]) out.push_back(graph_->id_at(i));
    return out;
  }

 private:
  friend FocusView focus_subgraph(const HierarchyGraph&, ConceptId, bool);

  const HierarchyGraph* graph_ = nullptr;
  Index root_ = 0;
  bool inclusive_ = true;
  std::vector<bool> member_;
  std::size_t size_ = 0;
};

inline FocusView focus_subgraph(const HierarchyGraph& graph,
                                ConceptId focus_root, bool inclusive = true) {
  using Index = HierarchyGraph::Index;
  auto root = graph.index_of(focus_root);
  if (!root)
    throw Error(ErrorKind::UnknownConcept,
                "focus root " + to_string(focus_root) + " is not in the graph");
  FocusView v;
  v.graph_ = &graph;
  v.root_ = *root;
  v.inclusive_ = inclusive;
  v.member_.assign(graph.concept_count(), false);

  std::vector<Index> queue{*root};
  v.member_[*root] = true;
  for (std::size_t head = 0; head < queue.size(); ++head)
    for (Index c : graph.children(queue[head]))
      if (!v.member_[c]) {
        v.member_[c] = true;
        queue.push_back(c);
      }
  v.size_ = queue.size();
  if (!inclusive) {
    v.member_[*root] = false;
    --v.size_;
  }
  return v;
}

FocusView focus_subgraph(HierarchyGraph&&, ConceptId, bool = true) = delete;

struct LcaResult {
  Hops distance = 0;
  /// Lowest-id common ancestor attaining the minimum.
  ConceptId witness;
};

/// Memoized per-concept ancestor distances over one FocusView.
///
/// Not thread-safe: keep one cache per evaluation session or per thread.
/// The view (and its graph) must outlive the cache.
class DistanceCache {
 public:
  using Index = HierarchyGraph::Index;

  struct Entry {
    Index node;
    Hops hops;
  };

  explicit DistanceCache(const FocusView& view) : view_(&view) {}
  explicit DistanceCache(FocusView&&) = delete;

  const FocusView& view() const noexcept { return *view_; }
  std::size_t cached() const noexcept { return memo_.size(); }

  /// Ancestors of x inside the view, x itself included at 0, sorted by
  /// dense index. Throws OutOfFocus.
  std::span<const Entry> ancestors(ConceptId x) {
    return ancestors_of(require_member(x));
  }

  Hops distance(ConceptId x, ConceptId y) { return lca(x, y).distance; }

  LcaResult lca(ConceptId x, ConceptId y) {
    const Index xi = require_member(x);
    const Index yi = require_member(y);
    if (xi == yi) return {0, x};
    auto a = ancestors_of(xi);
    auto b = ancestors_of(yi);
    Hops best = std::numeric_limits<Hops>::max();
    Index witness = 0;
    auto i = a.begin();
    auto j = b.begin();
    while (i != a.end() && j != b.end()) {
      if (i->node < j->node) {
        ++i;
      } else if (j->node < i->node) {
        ++j;
      } else {
        const Hops sum = i->hops + j->hops;
        // Ascending index order means the first minimum found is the
        // lowest concept id.
        if (sum < best) {
          best = sum;
          witness = i->node;
        }
        ++i;
        ++j;
      }
    }
    if (best == std::numeric_limits<Hops>::max())
      throw Error(ErrorKind::NoCommonAncestor,
                  "no common ancestor of " + to_string(x) + " and " +
                      to_string(y) + " inside the focus view");
    return {best, view_->graph().id_at(witness)};
  }

 private:
  Index require_member(ConceptId x) const {
    auto i = view_->graph().index_of(x);
    if (!i || !view_->contains_index(*i))
      throw Error(ErrorKind::OutOfFocus,
                  "concept " + to_string(x) + " is outside the focus view "
                  "rooted at " + to_string(view_->root()));
    return *i;
  }

  std::span<const Entry> ancestors_of(Index x) {
    auto it = memo_.find(x);
    if (it != memo_.end()) return it->second;

    const HierarchyGraph& g = view_->graph();
    if (stamp_.empty()) stamp_.assign(g.concept_count(), 0);
    if (++epoch_ == 0) {
      std::fill(stamp_.begin(), stamp_.end(), 0);
      epoch_ = 1;
    }
    std::vector<Entry> out{{x, 0}};
    stamp_[x] = epoch_;
    for (std::size_t head = 0; head < out.size(); ++head) {
      const Entry cur = out[head];
      for (Index p : g.parents(cur.node)) {
        if (stamp_[p] == epoch_ || !view_->traversable(p)) continue;
        stamp_[p] = epoch_;
        out.push_back({p, cur.hops + 1});
      }
    }
    std::sort(out.begin(), out.end(),
              [](const Entry& l, const Entry& r) { return l.node < r.node; });
    return memo_.emplace(x, std::move(out)).first->second;
  }

  const FocusView* view_;
  std::unordered_map<Index, std::vector<Entry>> memo_;
  std::vector<std::uint32_t> stamp_;
  std::uint32_t epoch_ = 0;
};

/// Minimum up-distance from x to each of its ancestors inside the view,
/// x itself at 0. Throws OutOfFocus.
inline std::map<ConceptId, Hops> ancestor_distances(const FocusView& view,
                                                    ConceptId x) {
  DistanceCache cache(view);
  std::map<ConceptId, Hops> out;
  for (const auto& e : cache.ancestors(x))
    out.emplace(view.graph().id_at(e.node), e.hops);
  return out;
}

/// min over common ancestors a of updist(x, a) + updist(y, a).
inline Hops concept_distance(const FocusView& view, ConceptId x, ConceptId y) {
  DistanceCache cache(view);
  return cache.distance(x, y);
}

inline LcaResult lowest_common_ancestor(const FocusView& view, ConceptId x,
                                        ConceptId y) {
  DistanceCache cache(view);
  return cache.lca(x, y);
}

/// Drops every edge (c, p) where p is also reachable from c through some
/// other parent of c.
inline HierarchyGraph transitive_reduction(const HierarchyGraph& g) {
  using Index = HierarchyGraph::Index;
  std::vector<Edge> kept;
  kept.reserve(g.edge_count());
  std::vector<std::uint32_t> stamp(g.concept_count(), 0);
  std::uint32_t epoch = 0;
  std::vector<Index> queue;
  for (Index c = 0; c < g.concept_count(); ++c) {
    auto ps = g.parents(c);
    if (ps.size() < 2) {
      for (Index p : ps) kept.push_back({g.id_at(c), g.id_at(p)});
      continue;
    }
    // Mark everything reachable from c in two or more hops.
    ++epoch;
    queue.clear();
    for (Index p : ps)
      for (Index q : g.parents(p))
        if (stamp[q] != epoch) {
          stamp[q] = epoch;
          queue.push_back(q);
        }
    for (std::size_t head = 0; head < queue.size(); ++head)
      for (Index q : g.parents(queue[head]))
        if (stamp[q] != epoch) {
          stamp[q] = epoch;
          queue.push_back(q);
        }
    for (Index p : ps)
      if (stamp[p] != epoch) kept.push_back({g.id_at(c), g.id_at(p)});
  }
  return build_hierarchy({g.concepts().begin(), g.concepts().end()},
                         std::move(kept));
}

}  // namespace codedist
