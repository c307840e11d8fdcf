#ifndef HDS_SPANNING_HPP
#define HDS_SPANNING_HPP

#include <cstdint>
#include <cstdlib>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hds/errors.hpp"
#include "hds/lattice.hpp"
#include "hds/rng.hpp"
#include "hds/stats.hpp"

namespace hds {

using NodeId = std::int64_t;

/// Parent-pointer forest oriented toward a single root node. In the box the
/// root is the sink; on Z^d it is a marker standing for "escaped to
/// infinity".
class OrientedForest {
 public:
  static constexpr NodeId kAbsent = -2;
  static constexpr NodeId kNoParent = -1;

  OrientedForest(NodeId node_count, NodeId root)
      : parent_(static_cast<std::size_t>(node_count), kAbsent), root_(root) {
    parent_.at(static_cast<std::size_t>(root)) = kNoParent;
  }

  NodeId root() const noexcept { return root_; }
  NodeId node_count() const noexcept { return static_cast<NodeId>(parent_.size()); }

  bool contains(NodeId v) const noexcept {
    return v >= 0 && v < node_count() && parent_[static_cast<std::size_t>(v)] != kAbsent;
  }

  NodeId parent(NodeId v) const {
    require(v);
    return parent_[static_cast<std::size_t>(v)];
  }

  NodeId add_node() {
    parent_.push_back(kAbsent);
    return node_count() - 1;
  }

  void attach(NodeId v, NodeId parent) noexcept { parent_[static_cast<std::size_t>(v)] = parent; }
  void detach(NodeId v) noexcept { parent_[static_cast<std::size_t>(v)] = kAbsent; }

  /// Truncates back to `node_count` nodes, all absent except the root.
  void reset(NodeId node_count) {
    parent_.assign(static_cast<std::size_t>(node_count), kAbsent);
    parent_[static_cast<std::size_t>(root_)] = kNoParent;
  }

  /// v, parent(v), ..., root.
  std::vector<NodeId> path_to_root(NodeId v) const {
    require(v);
    std::vector<NodeId> path{v};
    for (NodeId u = parent_[static_cast<std::size_t>(v)]; u != kNoParent;
         u = parent_[static_cast<std::size_t>(u)]) {
      path.push_back(u);
      if (path.size() > parent_.size()) throw std::logic_error("path_to_root: cycle");
    }
    return path;
  }

  /// Whether `target` lies on the path from v to the root, v excluded.
  bool passes_through(NodeId v, NodeId target) const noexcept {
    for (NodeId u = parent_[static_cast<std::size_t>(v)]; u != kNoParent;
         u = parent_[static_cast<std::size_t>(u)]) {
      if (u == target) return true;
    }
    return false;
  }

 private:
  void require(NodeId v) const {
    if (!contains(v)) throw InvalidVertex("forest: unknown vertex " + std::to_string(v));
  }

  std::vector<NodeId> parent_;
  NodeId root_;
};

inline std::vector<NodeId> path_to_root(const OrientedForest& f, NodeId v) {
  return f.path_to_root(v);
}

/// Wilson's algorithm on the wired box, rooted at the sink. Vertices are
/// attached one start at a time, so a caller that only needs the branches
/// of a few vertices can stop early; the tree law restricted to those
/// branches is unaffected.
class WilsonBox {
 public:
  explicit WilsonBox(const BoxLattice& box)
      : box_(&box),
        forest_(box.interior_count() + 1, box.sink()),
        next_(static_cast<std::size_t>(box.interior_count()), 0) {}

  const BoxLattice& box() const noexcept { return *box_; }
  const OrientedForest& forest() const noexcept { return forest_; }

  void reset() {
    for (auto v : touched_) forest_.detach(v);
    touched_.clear();
  }

  /// Random walk from `start` until it meets the tree, then graft its loop
  /// erasure. The retrace follows last-exit pointers, which yields the
  /// chronological loop erasure.
  template <class URBG>
  void attach(VertexId start, URBG& rng) {
    box_->require_interior(start);
    const auto deg = static_cast<std::uint64_t>(box_->degree());
    for (VertexId u = start; !forest_.contains(u);) {
      const auto nxt = box_->step(u, static_cast<int>(uniform_below(rng, deg)));
      next_[static_cast<std::size_t>(u)] = nxt;
      u = nxt;
    }
    for (VertexId u = start; !forest_.contains(u); u = next_[static_cast<std::size_t>(u)]) {
      forest_.attach(u, next_[static_cast<std::size_t>(u)]);
      touched_.push_back(u);
    }
  }

 private:
  const BoxLattice* box_;
  OrientedForest forest_;
  std::vector<VertexId> next_;
  std::vector<VertexId> touched_;
};

/// Uniform spanning tree of G_L oriented toward the sink, attaching
/// vertices in the given order (a permutation of the interior ids).
template <class URBG>
OrientedForest wilson_box(const BoxLattice& box, std::span<const VertexId> order, URBG& rng) {
  if (static_cast<VertexId>(order.size()) != box.interior_count()) {
    throw std::invalid_argument("wilson_box: order must list every interior vertex");
  }
  WilsonBox sampler(box);
  for (auto v : order) sampler.attach(v, rng);
  return sampler.forest();
}

template <class URBG>
OrientedForest wilson_box(const BoxLattice& box, URBG& rng) {
  WilsonBox sampler(box);
  for (VertexId v = 0; v < box.interior_count(); ++v) sampler.attach(v, rng);
  return sampler.forest();
}

/// Number of lattice neighbours w of the origin whose path to the sink
/// passes through the origin. Neighbours merged into the sink never count.
inline int w_degree(const OrientedForest& f, const BoxLattice& box) {
  const auto o = box.origin();
  int count = 0;
  for (int dir = 0; dir < box.degree(); ++dir) {
    const auto w = box.step(o, dir);
    if (w == box.sink()) continue;
    if (!f.contains(w)) throw InvalidVertex("w_degree: neighbour of o is not in the forest");
    count += f.passes_through(w, o);
  }
  return count;
}

inline Metadata finite_params(const BoxLattice& box) {
  return {{"mode", "finite"},
          {"dim", std::to_string(box.dim())},
          {"radius", std::to_string(box.radius())}};
}

/// Empirical law of w_degree over independent uniform spanning trees of
/// G_L. Each tree is grown from o and then its neighbours in direction
/// order; the remaining vertices cannot change the statistic and are not
/// attached.
template <class URBG>
EstimateTable estimate_q_finite(const BoxLattice& box, std::uint64_t samples, URBG& rng) {
  if (samples < 1) throw std::invalid_argument("estimate_q_finite: samples must be >= 1");
  auto table = EstimateTable::with_range(box.degree(), finite_params(box));
  WilsonBox sampler(box);
  const auto o = box.origin();
  for (std::uint64_t s = 0; s < samples; ++s) {
    sampler.reset();
    sampler.attach(o, rng);
    for (int dir = 0; dir < box.degree(); ++dir) {
      const auto w = box.step(o, dir);
      if (w != box.sink()) sampler.attach(w, rng);
    }
    table.add(static_cast<std::size_t>(w_degree(sampler.forest(), box)));
  }
  return table;
}

template <class URBG>
EstimateTable estimate_q_finite(int dim, int radius, std::uint64_t samples, URBG& rng) {
  return estimate_q_finite(make_box(dim, radius), samples, rng);
}

namespace detail {

/// Open-addressing map from 64-bit keys to int32 values with O(1) clear
/// (generation stamps) and backward-shift deletion.
class FlatU64Map {
 public:
  explicit FlatU64Map(std::size_t capacity_pow2 = 1024) { allocate(capacity_pow2); }

  void clear() noexcept {
    ++generation_;
    size_ = 0;
    if (generation_ == 0) {
      std::fill(stamp_.begin(), stamp_.end(), 0u);
      generation_ = 1;
    }
  }

  std::size_t size() const noexcept { return size_; }

  // Returns -1 when absent.
  std::int32_t find(std::uint64_t key) const noexcept {
    for (std::size_t i = key & mask_;; i = (i + 1) & mask_) {
      if (stamp_[i] != generation_) return -1;
      if (key_[i] == key) return value_[i];
    }
  }

  void insert(std::uint64_t key, std::int32_t value) {
    if (2 * (size_ + 1) > key_.size()) grow();
    place(key, value);
  }

  void erase(std::uint64_t key) noexcept {
    std::size_t i = key & mask_;
    for (;; i = (i + 1) & mask_) {
      if (stamp_[i] != generation_) return;
      if (key_[i] == key) break;
    }
    for (std::size_t j = i;;) {
      j = (j + 1) & mask_;
      if (stamp_[j] != generation_) break;
      const std::size_t home = key_[j] & mask_;
      const bool stays = (i <= j) ? (i < home && home <= j) : (i < home || home <= j);
      if (stays) continue;
      key_[i] = key_[j];
      value_[i] = value_[j];
      i = j;
    }
    stamp_[i] = 0;
    --size_;
  }

 private:
  void allocate(std::size_t cap) {
    key_.assign(cap, 0);
    value_.assign(cap, 0);
    stamp_.assign(cap, 0);
    mask_ = cap - 1;
    generation_ = 1;
    size_ = 0;
  }

  void place(std::uint64_t key, std::int32_t value) noexcept {
    std::size_t i = key & mask_;
    while (stamp_[i] == generation_) {
      if (key_[i] == key) {
        value_[i] = value;
        return;
      }
      i = (i + 1) & mask_;
    }
    key_[i] = key;
    value_[i] = value;
    stamp_[i] = generation_;
    ++size_;
  }

  void grow() {
    std::vector<std::pair<std::uint64_t, std::int32_t>> live;
    live.reserve(size_);
    for (std::size_t i = 0; i < key_.size(); ++i) {
      if (stamp_[i] == generation_) live.emplace_back(key_[i], value_[i]);
    }
    allocate(2 * key_.size());
    for (const auto& [k, v] : live) place(k, v);
  }

  std::vector<std::uint64_t> key_;
  std::vector<std::int32_t> value_;
  std::vector<std::uint32_t> stamp_;
  std::size_t mask_ = 0;
  std::size_t size_ = 0;
  std::uint32_t generation_ = 1;
};

}  // namespace detail

/// One sample of deg_W(o) from the truncated local forest.
struct WDegreeSample {
  int degree = 0;
  bool truncated = false;
};

/// Walk accounting for one local forest: every start (o and its 2d
/// neighbours) counts as one walk, including starts already in the forest.
struct WalkCounts {
  std::uint64_t walks = 0;
  std::uint64_t escaped = 0;
  std::uint64_t capped = 0;
  std::uint64_t hit = 0;
};

/// Wilson's method rooted at infinity, restricted to what decides
/// deg_W(o): the branch from o, then the branches from its 2d neighbours in
/// direction order. A walk that reaches sup-norm `kill_radius` counts as
/// escaped to infinity; a walk that runs `max_steps` steps is treated the
/// same way and flags the sample as truncated.
///
/// Forest points are stored with their Zobrist hash, updated in O(1) per
/// step. Hash matches are verified against the stored coordinates.
class LocalWilson {
 public:
  LocalWilson(int dim, int kill_radius, std::uint64_t max_steps)
      : dim_(dim), radius_(kill_radius), max_steps_(max_steps), forest_(1, kInfinity) {
    if (dim < 3) {
      throw std::invalid_argument("wilson_local_infinite: d >= 3 required (transience)");
    }
    if (kill_radius < 2 || kill_radius > 127) {
      throw std::invalid_argument("wilson_local_infinite: kill radius must be in [2, 127]");
    }
    if (max_steps < 1) throw std::invalid_argument("wilson_local_infinite: max_steps must be >= 1");
    const auto span = static_cast<std::size_t>(2 * kill_radius + 1);
    zobrist_.resize(static_cast<std::size_t>(dim) * span);
    std::uint64_t state = 0x5A0B1257C0FFEEULL;
    for (auto& z : zobrist_) z = splitmix64(state);
    cursor_.assign(static_cast<std::size_t>(dim), 0);
  }

  int dim() const noexcept { return dim_; }
  int kill_radius() const noexcept { return radius_; }
  std::uint64_t max_steps() const noexcept { return max_steps_; }
  const OrientedForest& forest() const noexcept { return forest_; }
  const WalkCounts& counts() const noexcept { return counts_; }

  /// Node id of the origin in the most recent sample.
  NodeId origin_node() const noexcept { return origin_node_; }

  /// Node ids of the 2d neighbours of o in the most recent sample.
  const std::vector<NodeId>& neighbour_nodes() const noexcept { return neighbour_nodes_; }

  /// Coordinates of a stored forest node.
  std::vector<int> point_of(NodeId node) const {
    if (node <= kInfinity || node >= forest_.node_count()) {
      throw InvalidVertex("LocalWilson: no point for node " + std::to_string(node));
    }
    const auto* p = &points_[static_cast<std::size_t>(node) * static_cast<std::size_t>(dim_)];
    return std::vector<int>(p, p + dim_);
  }

  template <class URBG>
  WDegreeSample sample(URBG& rng) {
    forest_.reset(1);
    points_.assign(static_cast<std::size_t>(dim_), 0);  // slot for the infinity node
    forest_index_.clear();
    neighbour_nodes_.clear();
    truncated_ = false;

    std::fill(cursor_.begin(), cursor_.end(), 0);
    origin_node_ = grow_from_cursor(rng);
    for (int dir = 0; dir < 2 * dim_; ++dir) {
      std::fill(cursor_.begin(), cursor_.end(), 0);
      cursor_[static_cast<std::size_t>(direction_axis(dir))] =
          static_cast<std::int8_t>(direction_sign(dir));
      neighbour_nodes_.push_back(grow_from_cursor(rng));
    }
    int degree = 0;
    for (auto w : neighbour_nodes_) degree += forest_.passes_through(w, origin_node_);
    return {degree, truncated_};
  }

 private:
  static constexpr NodeId kInfinity = 0;

  std::uint64_t hash_of(std::span<const std::int8_t> coords) const noexcept {
    std::uint64_t h = 0;
    for (int i = 0; i < dim_; ++i) h ^= zobrist_entry(i, coords[static_cast<std::size_t>(i)]);
    return h;
  }

  std::uint64_t zobrist_entry(int axis, int coord) const noexcept {
    return zobrist_[static_cast<std::size_t>(axis) * static_cast<std::size_t>(2 * radius_ + 1) +
                    static_cast<std::size_t>(coord + radius_)];
  }

  bool same_point(const std::int8_t* a, const std::int8_t* b) const noexcept {
    for (int i = 0; i < dim_; ++i) {
      if (a[i] != b[i]) return false;
    }
    return true;
  }

  NodeId forest_lookup(std::uint64_t h, const std::int8_t* coords) const {
    const auto node = forest_index_.find(h);
    if (node < 0) return -1;
    if (!same_point(&points_[static_cast<std::size_t>(node) * static_cast<std::size_t>(dim_)],
                    coords)) {
      throw std::runtime_error("LocalWilson: Zobrist hash collision");
    }
    return node;
  }

  // Walks from cursor_ and grafts the loop erasure. Returns the start's node.
  template <class URBG>
  NodeId grow_from_cursor(URBG& rng) {
    ++counts_.walks;
    const auto d = static_cast<std::size_t>(dim_);
    std::uint64_t h = hash_of(cursor_);
    if (const auto node = forest_lookup(h, cursor_.data()); node >= 0) {
      ++counts_.hit;
      return node;
    }
    // Loop-erased path so far: coordinates in path_coords_, hashes in
    // path_hash_, positions indexed by path_index_.
    path_coords_.assign(cursor_.begin(), cursor_.end());
    path_hash_.assign(1, h);
    path_index_.clear();
    path_index_.insert(h, 0);

    NodeId target = kInfinity;
    bool done = false;
    for (std::uint64_t t = 0; t < max_steps_; ++t) {
      const auto dir = static_cast<int>(uniform_below(rng, 2 * d));
      const auto axis = direction_axis(dir);
      auto& c = cursor_[static_cast<std::size_t>(axis)];
      h ^= zobrist_entry(axis, c);
      c = static_cast<std::int8_t>(c + direction_sign(dir));
      if (std::abs(c) >= radius_) {
        ++counts_.escaped;
        done = true;
        break;
      }
      h ^= zobrist_entry(axis, c);
      if (const auto node = forest_lookup(h, cursor_.data()); node >= 0) {
        ++counts_.hit;
        target = node;
        done = true;
        break;
      }
      if (const auto pos = path_index_.find(h); pos >= 0) {
        if (!same_point(&path_coords_[static_cast<std::size_t>(pos) * d], cursor_.data())) {
          throw std::runtime_error("LocalWilson: Zobrist hash collision");
        }
        for (auto k = path_hash_.size() - 1; k > static_cast<std::size_t>(pos); --k) {
          path_index_.erase(path_hash_[k]);
        }
        path_hash_.resize(static_cast<std::size_t>(pos) + 1);
        path_coords_.resize((static_cast<std::size_t>(pos) + 1) * d);
        continue;
      }
      path_index_.insert(h, static_cast<std::int32_t>(path_hash_.size()));
      path_hash_.push_back(h);
      path_coords_.insert(path_coords_.end(), cursor_.begin(), cursor_.end());
    }
    if (!done) {
      ++counts_.capped;
      truncated_ = true;
    }
    // Graft from the far end so each node's parent already exists.
    NodeId parent = target;
    for (auto k = path_hash_.size(); k-- > 0;) {
      const NodeId node = forest_.add_node();
      points_.insert(points_.end(), path_coords_.begin() + static_cast<std::ptrdiff_t>(k * d),
                     path_coords_.begin() + static_cast<std::ptrdiff_t>((k + 1) * d));
      forest_.attach(node, parent);
      forest_index_.insert(path_hash_[k], static_cast<std::int32_t>(node));
      parent = node;
    }
    return parent;
  }

  int dim_;
  int radius_;
  std::uint64_t max_steps_;
  std::vector<std::uint64_t> zobrist_;
  OrientedForest forest_;
  std::vector<std::int8_t> points_;
  detail::FlatU64Map forest_index_;
  std::vector<std::int8_t> cursor_;
  std::vector<std::int8_t> path_coords_;
  std::vector<std::uint64_t> path_hash_;
  detail::FlatU64Map path_index_;
  std::vector<NodeId> neighbour_nodes_;
  NodeId origin_node_ = -1;
  bool truncated_ = false;
  WalkCounts counts_;
};

template <class URBG>
WDegreeSample wilson_local_infinite(int dim, int kill_radius, std::uint64_t max_steps, URBG& rng) {
  LocalWilson sampler(dim, kill_radius, max_steps);
  return sampler.sample(rng);
}

inline Metadata infinite_params(int dim, int kill_radius, std::uint64_t max_steps) {
  return {{"mode", "infinite"},
          {"dim", std::to_string(dim)},
          {"kill_radius", std::to_string(kill_radius)},
          {"max_steps", std::to_string(max_steps)}};
}

/// Empirical law of deg_W(o) on Z^d from independent local forests, with
/// walk diagnostics: walks, escaped_walks, capped_walks, truncated_samples.
template <class URBG>
EstimateTable estimate_q_infinite(int dim, int kill_radius, std::uint64_t max_steps,
                                  std::uint64_t samples, URBG& rng) {
  if (samples < 1) throw std::invalid_argument("estimate_q_infinite: samples must be >= 1");
  LocalWilson sampler(dim, kill_radius, max_steps);
  auto table = EstimateTable::with_range(2 * dim, infinite_params(dim, kill_radius, max_steps));
  std::uint64_t truncated = 0;
  for (std::uint64_t s = 0; s < samples; ++s) {
    const auto x = sampler.sample(rng);
    table.add(static_cast<std::size_t>(x.degree));
    truncated += x.truncated;
  }
  table.add_diagnostic("walks", sampler.counts().walks);
  table.add_diagnostic("escaped_walks", sampler.counts().escaped);
  table.add_diagnostic("capped_walks", sampler.counts().capped);
  table.add_diagnostic("truncated_samples", truncated);
  return table;
}

}  // namespace hds

#endif  // HDS_SPANNING_HPP
