#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "ehpush/errors.hpp"
#include "ehpush/rng.hpp"

namespace ehpush {

using ContentId = std::uint64_t;

/// One active content. Position in the catalog is its popularity rank, so
/// the struct itself only carries identity and provenance.
struct Content {
  ContentId id = 0;
  std::uint64_t birth_period = 0;
};

namespace detail {

/// Treap ordered by implicit position (popularity rank), with per-subtree
/// counts of cached and pushed contents. Everything the simulation loop
/// does per period — sample a rank, insert a newborn at a slot, drop a
/// dead content, find the most popular content missing a mark — is
/// O(log m) against this structure.
///
/// Priorities come from an internal splitmix64 counter, not from the
/// model RNG, so tree shape never perturbs the simulation draw sequence.
class ContentTree {
 public:
  static constexpr std::uint32_t npos = 0xffffffffu;

  struct Node {
    ContentId id = 0;
    std::uint64_t birth_period = 0;
    std::uint64_t pri = 0;
    std::uint32_t left = npos, right = npos, parent = npos;
    std::uint32_t size = 1;
    std::uint32_t n_cached = 0, n_pushed = 0;
    bool cached = false, pushed = false;
  };

  std::uint32_t size() const { return root_ == npos ? 0 : nodes_[root_].size; }
  std::uint32_t cached_count() const { return root_ == npos ? 0 : nodes_[root_].n_cached; }
  std::uint32_t pushed_count() const { return root_ == npos ? 0 : nodes_[root_].n_pushed; }

  bool contains(ContentId id) const { return index_.count(id) != 0; }

  const Node& node_of(ContentId id) const { return nodes_[index_.at(id)]; }

  /// Insert at 0-based position. pos <= size(). The cached flag can be set
  /// at birth, saving the separate flag walk when the cache mirrors the
  /// catalog.
  void insert_at(std::uint32_t pos, ContentId id, std::uint64_t birth_period,
                 bool cached = false) {
    assert(pos <= size());
    std::uint32_t n = alloc(id, birth_period);
    nodes_[n].cached = cached;
    nodes_[n].n_cached = cached ? 1 : 0;
    if (root_ == npos) {
      root_ = n;
    } else {
      std::uint32_t cur = root_;
      for (;;) {
        const std::uint32_t lsz = subtree_size(nodes_[cur].left);
        if (pos <= lsz) {
          if (nodes_[cur].left == npos) {
            link(cur, n, /*as_left=*/true);
            break;
          }
          cur = nodes_[cur].left;
        } else {
          pos -= lsz + 1;
          if (nodes_[cur].right == npos) {
            link(cur, n, /*as_left=*/false);
            break;
          }
          cur = nodes_[cur].right;
        }
      }
      for (std::uint32_t a = nodes_[n].parent; a != npos; a = nodes_[a].parent) pull(a);
      while (nodes_[n].parent != npos && nodes_[nodes_[n].parent].pri < nodes_[n].pri)
        rotate_up(n);
    }
    index_.emplace(id, n);
  }

  void erase(ContentId id) {
    const std::uint32_t n = index_.at(id);
    // rotate down to a leaf, then unlink
    while (nodes_[n].left != npos || nodes_[n].right != npos) {
      const std::uint32_t l = nodes_[n].left, r = nodes_[n].right;
      std::uint32_t child;
      if (l == npos)
        child = r;
      else if (r == npos)
        child = l;
      else
        child = nodes_[l].pri > nodes_[r].pri ? l : r;
      rotate_up(child);
    }
    const std::uint32_t p = nodes_[n].parent;
    if (p == npos) {
      root_ = npos;
    } else {
      (nodes_[p].left == n ? nodes_[p].left : nodes_[p].right) = npos;
      for (std::uint32_t a = p; a != npos; a = nodes_[a].parent) pull(a);
    }
    index_.erase(id);
    free_.push_back(n);
  }

  /// 0-based position lookup.
  ContentId at(std::uint32_t pos) const {
    assert(pos < size());
    std::uint32_t cur = root_;
    for (;;) {
      const std::uint32_t lsz = subtree_size(nodes_[cur].left);
      if (pos < lsz) {
        cur = nodes_[cur].left;
      } else if (pos == lsz) {
        return nodes_[cur].id;
      } else {
        pos -= lsz + 1;
        cur = nodes_[cur].right;
      }
    }
  }

  /// 0-based position of a content.
  std::uint32_t position_of(ContentId id) const {
    std::uint32_t n = index_.at(id);
    std::uint32_t pos = subtree_size(nodes_[n].left);
    for (std::uint32_t cur = n; nodes_[cur].parent != npos; cur = nodes_[cur].parent) {
      const std::uint32_t p = nodes_[cur].parent;
      if (nodes_[p].right == cur) pos += subtree_size(nodes_[p].left) + 1;
    }
    return pos;
  }

  bool is_cached(ContentId id) const { return nodes_[index_.at(id)].cached; }
  bool is_pushed(ContentId id) const { return nodes_[index_.at(id)].pushed; }

  void set_cached(ContentId id, bool value) { set_flag(id, &Node::cached, value); }
  void set_pushed(ContentId id, bool value) { set_flag(id, &Node::pushed, value); }

  enum class Missing { kCached, kPushedAmongCached, kPushed };

  /// Content at the k-th (1-based) best rank among those missing the given
  /// mark; npos-id (nullopt) when fewer than k qualify.
  std::optional<ContentId> kth_missing(Missing what, std::uint32_t k) const {
    if (root_ == npos || k == 0 || k > missing_count(root_, what)) return std::nullopt;
    std::uint32_t cur = root_;
    for (;;) {
      const Node& nd = nodes_[cur];
      const std::uint32_t in_left = nd.left == npos ? 0 : missing_count(nd.left, what);
      if (k <= in_left) {
        cur = nd.left;
        continue;
      }
      k -= in_left;
      if (node_missing(nd, what)) {
        if (k == 1) return nd.id;
        --k;
      }
      cur = nd.right;
    }
  }

  /// Ids in rank order.
  std::vector<Content> to_vector() const {
    std::vector<Content> out;
    out.reserve(size());
    std::vector<std::uint32_t> stack;
    std::uint32_t cur = root_;
    while (cur != npos || !stack.empty()) {
      while (cur != npos) {
        stack.push_back(cur);
        cur = nodes_[cur].left;
      }
      cur = stack.back();
      stack.pop_back();
      out.push_back({nodes_[cur].id, nodes_[cur].birth_period});
      cur = nodes_[cur].right;
    }
    return out;
  }

  /// Deep structural check; test support.
  bool check() const {
    if (root_ == npos) return true;
    if (nodes_[root_].parent != npos) return false;
    return check_node(root_);
  }

 private:
  std::uint32_t subtree_size(std::uint32_t n) const { return n == npos ? 0 : nodes_[n].size; }

  static bool node_missing(const Node& nd, Missing what) {
    switch (what) {
      case Missing::kCached: return !nd.cached;
      case Missing::kPushedAmongCached: return nd.cached && !nd.pushed;
      case Missing::kPushed: return !nd.pushed;
    }
    return false;
  }

  std::uint32_t missing_count(std::uint32_t n, Missing what) const {
    const Node& nd = nodes_[n];
    switch (what) {
      case Missing::kCached: return nd.size - nd.n_cached;
      case Missing::kPushedAmongCached: return nd.n_cached - nd.n_pushed;
      case Missing::kPushed: return nd.size - nd.n_pushed;
    }
    return 0;
  }

  void pull(std::uint32_t n) {
    Node& nd = nodes_[n];
    nd.size = 1;
    nd.n_cached = nd.cached ? 1 : 0;
    nd.n_pushed = nd.pushed ? 1 : 0;
    for (std::uint32_t c : {nd.left, nd.right}) {
      if (c == npos) continue;
      nd.size += nodes_[c].size;
      nd.n_cached += nodes_[c].n_cached;
      nd.n_pushed += nodes_[c].n_pushed;
    }
  }

  void link(std::uint32_t parent, std::uint32_t child, bool as_left) {
    (as_left ? nodes_[parent].left : nodes_[parent].right) = child;
    nodes_[child].parent = parent;
  }

  /// Rotate n above its parent, preserving in-order sequence.
  void rotate_up(std::uint32_t n) {
    const std::uint32_t p = nodes_[n].parent;
    const std::uint32_t g = nodes_[p].parent;
    if (nodes_[p].left == n) {
      nodes_[p].left = nodes_[n].right;
      if (nodes_[n].right != npos) nodes_[nodes_[n].right].parent = p;
      nodes_[n].right = p;
    } else {
      nodes_[p].right = nodes_[n].left;
      if (nodes_[n].left != npos) nodes_[nodes_[n].left].parent = p;
      nodes_[n].left = p;
    }
    nodes_[p].parent = n;
    nodes_[n].parent = g;
    if (g == npos)
      root_ = n;
    else
      (nodes_[g].left == p ? nodes_[g].left : nodes_[g].right) = n;
    pull(p);
    pull(n);
  }

  void set_flag(ContentId id, bool Node::* flag, bool value) {
    std::uint32_t n = index_.at(id);
    nodes_[n].*flag = value;
    for (std::uint32_t a = n; a != npos; a = nodes_[a].parent) pull(a);
  }

  std::uint32_t alloc(ContentId id, std::uint64_t birth_period) {
    std::uint32_t n;
    if (!free_.empty()) {
      n = free_.back();
      free_.pop_back();
      nodes_[n] = Node{};
    } else {
      n = static_cast<std::uint32_t>(nodes_.size());
      nodes_.emplace_back();
    }
    nodes_[n].id = id;
    nodes_[n].birth_period = birth_period;
    nodes_[n].pri = mix64(pri_counter_++);
    return n;
  }

  bool check_node(std::uint32_t n) const {
    const Node& nd = nodes_[n];
    std::uint32_t size = 1, cached = nd.cached ? 1 : 0, pushed = nd.pushed ? 1 : 0;
    if (nd.pushed && !nd.cached) return false;
    for (std::uint32_t c : {nd.left, nd.right}) {
      if (c == npos) continue;
      if (nodes_[c].parent != n || nodes_[c].pri > nd.pri) return false;
      if (!check_node(c)) return false;
      size += nodes_[c].size;
      cached += nodes_[c].n_cached;
      pushed += nodes_[c].n_pushed;
    }
    return size == nd.size && cached == nd.n_cached && pushed == nd.n_pushed;
  }

  std::vector<Node> nodes_;
  std::vector<std::uint32_t> free_;
  std::unordered_map<ContentId, std::uint32_t> index_;
  std::uint32_t root_ = npos;
  std::uint64_t pri_counter_ = 0x6d5c0fb2u;
};

}  // namespace detail

/// Result of one period of catalog dynamics.
struct CatalogStep {
  std::vector<ContentId> born;
  std::vector<ContentId> died;  // ascending former rank
};

/// The active content set, ordered by popularity rank (1 = most popular),
/// evolving as a discrete-time birth-death process: each content dies
/// independently per period, births arrive as a Poisson count, and each
/// newborn takes a uniformly random insertion slot.
///
/// The catalog also tracks which active contents the cell has cached and
/// which of those it has pushed; a content's marks disappear with it when
/// it dies, which keeps pushed ⊆ cached ⊆ active structural.
class Catalog {
 public:
  Catalog(double birth_rate, double death_rate)
      : birth_rate_(birth_rate), death_rate_(death_rate) {
    if (birth_rate < 0.0) throw ConfigError("birth rate must be >= 0");
    if (death_rate < 0.0 || death_rate > 1.0)
      throw ConfigError("death rate must be in [0, 1]");
  }

  double birth_rate() const { return birth_rate_; }
  double death_rate() const { return death_rate_; }

  std::size_t size() const { return tree_.size(); }
  std::size_t cached_count() const { return tree_.cached_count(); }
  std::size_t pushed_count() const { return tree_.pushed_count(); }

  bool alive(ContentId id) const { return tree_.contains(id); }
  bool cached(ContentId id) const { return alive(id) && tree_.is_cached(id); }
  bool pushed(ContentId id) const { return alive(id) && tree_.is_pushed(id); }

  /// Content at 1-based popularity rank.
  ContentId id_at(std::size_t rank) const {
    if (rank < 1 || rank > size()) throw PreconditionError("rank out of range");
    return tree_.at(static_cast<std::uint32_t>(rank - 1));
  }

  /// 1-based popularity rank of a live content.
  std::size_t rank_of(ContentId id) const {
    if (!alive(id)) throw PreconditionError("rank_of on dead content");
    return tree_.position_of(id) + 1;
  }

  void mark_cached(ContentId id) {
    if (!alive(id)) throw std::logic_error("caching a content that is not active");
    if (tree_.is_cached(id)) throw std::logic_error("content already cached");
    tree_.set_cached(id, true);
  }

  void mark_pushed(ContentId id) {
    if (!cached(id)) throw std::logic_error("pushing a content that is not cached");
    if (tree_.is_pushed(id)) throw std::logic_error("content already pushed");
    tree_.set_pushed(id, true);
  }

  /// Most popular content without the cached mark.
  std::optional<ContentId> most_popular_uncached() const {
    return tree_.kth_missing(detail::ContentTree::Missing::kCached, 1);
  }

  /// Most popular cached-but-unpushed content (the push candidate).
  std::optional<ContentId> most_popular_unpushed_cached() const {
    return tree_.kth_missing(detail::ContentTree::Missing::kPushedAmongCached, 1);
  }

  /// Top-k most popular uncached contents, best rank first.
  std::vector<ContentId> top_uncached(std::size_t k) const {
    std::vector<ContentId> out;
    for (std::size_t i = 1; i <= k; ++i) {
      auto id = tree_.kth_missing(detail::ContentTree::Missing::kCached,
                                  static_cast<std::uint32_t>(i));
      if (!id) break;
      out.push_back(*id);
    }
    return out;
  }

  /// Insert a fresh content at a 0-based slot (0 = most popular side).
  ContentId insert_at_slot(std::size_t slot, std::uint64_t period, bool cached = false) {
    if (slot > size()) throw PreconditionError("insertion slot out of range");
    const ContentId id = next_id_++;
    tree_.insert_at(static_cast<std::uint32_t>(slot), id, period, cached);
    return id;
  }

  /// Seed `count` contents in rank order (used at world construction).
  void seed(std::size_t count, bool cached = false) {
    for (std::size_t i = 0; i < count; ++i) insert_at_slot(size(), 0, cached);
  }

  /// One period of birth-death dynamics. Draw order (all from `rng`):
  /// death gaps (geometric thinning, one uniform per death plus one
  /// terminating draw), then the Poisson birth count, then one slot draw
  /// per newborn. With `cache_births` every newborn enters the cached set
  /// too (the full-cache experiment configurations).
  CatalogStep step(std::uint64_t period, RngStream& rng, bool cache_births = false) {
    CatalogStep result;
    const std::size_t m = size();
    if (death_rate_ >= 1.0) {
      auto all = contents();
      for (const Content& c : all) {
        result.died.push_back(c.id);
        tree_.erase(c.id);
      }
    } else if (death_rate_ > 0.0 && m > 0) {
      // indices into the pre-death rank order, via geometric gaps
      const double log_survive = std::log1p(-death_rate_);
      double idx = -1.0;
      std::vector<ContentId> doomed;
      for (;;) {
        const double u = rng.uniform();
        if (u <= 0.0) break;
        idx += 1.0 + std::floor(std::log(u) / log_survive);
        if (idx >= static_cast<double>(m)) break;
        doomed.push_back(tree_.at(static_cast<std::uint32_t>(idx)));
      }
      for (ContentId id : doomed) {
        result.died.push_back(id);
        tree_.erase(id);
      }
    }
    if (birth_rate_ > 0.0) {
      const std::uint64_t births = rng.poisson(birth_rate_);
      for (std::uint64_t i = 0; i < births; ++i) {
        const std::size_t slot = static_cast<std::size_t>(
            rng.uniform_below(static_cast<std::uint64_t>(size()) + 1));
        result.born.push_back(insert_at_slot(slot, period, cache_births));
      }
    }
    return result;
  }

  /// Full contents in rank order; O(m), for tests and traces.
  std::vector<Content> contents() const { return tree_.to_vector(); }

  bool check_structure() const { return tree_.check(); }

 private:
  double birth_rate_;
  double death_rate_;
  ContentId next_id_ = 1;
  detail::ContentTree tree_;
};

}  // namespace ehpush
