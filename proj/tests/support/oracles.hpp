// Independent reference implementations used only by the tests. None of
// these share code paths with the library routines they check.
#ifndef HDS_TESTS_ORACLES_HPP
#define HDS_TESTS_ORACLES_HPP

#include <algorithm>
#include <cstdint>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "hds/lattice.hpp"
#include "hds/sandpile.hpp"
#include "hds/spanning.hpp"
#include "hds/walk.hpp"

namespace hds::oracle {

/// Loop erasure by literal rescanning: find the first t whose point occurred
/// earlier at some i, splice out s_i..s_{t-1}, start over. Quadratic.
inline std::vector<LatticePoint> brute_force_loop_erase(std::vector<LatticePoint> path) {
  for (;;) {
    bool cut = false;
    for (std::size_t t = 1; t < path.size() && !cut; ++t) {
      for (std::size_t i = 0; i < t; ++i) {
        if (path[i] == path[t]) {
          path.erase(path.begin() + static_cast<long>(i), path.begin() + static_cast<long>(t));
          cut = true;
          break;
        }
      }
    }
    if (!cut) return path;
  }
}

/// Determinant of an integer matrix by fraction-free Bareiss elimination.
inline __int128 bareiss_determinant(std::vector<std::vector<__int128>> a) {
  const auto n = a.size();
  if (n == 0) return 1;
  __int128 sign = 1;
  __int128 prev = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (a[k][k] == 0) {
      std::size_t swap_row = k + 1;
      while (swap_row < n && a[swap_row][k] == 0) ++swap_row;
      if (swap_row == n) return 0;
      std::swap(a[k], a[swap_row]);
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      for (std::size_t j = k + 1; j < n; ++j) {
        a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
      }
    }
    prev = a[k][k];
  }
  return sign * a[n - 1][n - 1];
}

/// Spanning trees of G_L by the matrix-tree theorem: det of the graph
/// Laplacian with the sink row and column removed. Adjacency is rebuilt from
/// coordinates, not from BoxLattice::step.
inline std::uint64_t spanning_tree_count(const BoxLattice& box) {
  const auto n = static_cast<std::size_t>(box.interior_count());
  std::vector<std::vector<__int128>> lap(n, std::vector<__int128>(n, 0));
  for (std::size_t v = 0; v < n; ++v) {
    lap[v][v] = 2 * box.dim();
    const auto p = box.point_of(static_cast<VertexId>(v));
    for (std::size_t u = 0; u < n; ++u) {
      if (u != v && l1_distance(p, box.point_of(static_cast<VertexId>(u))) == 1) lap[v][u] = -1;
    }
  }
  return static_cast<std::uint64_t>(bareiss_determinant(std::move(lap)));
}

/// Calls fn(config) for every stable configuration of the box.
template <class Fn>
void for_each_stable(const BoxLattice& box, Fn fn) {
  const auto n = static_cast<std::size_t>(box.interior_count());
  std::vector<std::int64_t> h(n, 0);
  for (;;) {
    fn(HeightConfig(box, h));
    std::size_t i = 0;
    while (i < n && ++h[i] == box.degree()) h[i++] = 0;
    if (i == n) return;
  }
}

/// Stabilization that picks a uniformly random unstable vertex and topples
/// it once, until none is left. Returns the odometer.
template <class URBG>
std::vector<std::uint64_t> random_order_stabilize(HeightConfig& c, URBG& rng) {
  const auto n = c.box().interior_count();
  std::vector<std::uint64_t> odo(static_cast<std::size_t>(n), 0);
  for (;;) {
    std::vector<VertexId> unstable;
    for (VertexId v = 0; v < n; ++v) {
      if (c[v] >= c.box().degree()) unstable.push_back(v);
    }
    if (unstable.empty()) return odo;
    std::shuffle(unstable.begin(), unstable.end(), rng);
    topple_in_place(c, unstable.front());
    ++odo[static_cast<std::size_t>(unstable.front())];
  }
}

/// Parent array of a spanning tree as a string key.
inline std::string tree_key(const OrientedForest& f, const BoxLattice& box) {
  std::string key;
  for (VertexId v = 0; v < box.interior_count(); ++v) {
    key += std::to_string(f.parent(v));
    key += ',';
  }
  return key;
}

/// Every spanning tree of G_L as a parent array, with the number of
/// (vertex -> direction) choices giving it. Parallel edges to the sink make
/// that number exceed 1; the weights sum to the matrix-tree count.
inline std::unordered_map<std::string, std::uint64_t> enumerate_trees(const BoxLattice& box);

/// Whether f is a spanning tree of G_L rooted at the sink whose edges are
/// edges of G_L.
inline bool is_spanning_tree_of(const OrientedForest& f, const BoxLattice& box) {
  const auto n = box.interior_count();
  if (f.parent(box.sink()) != OrientedForest::kNoParent) return false;
  for (VertexId v = 0; v < n; ++v) {
    if (!f.contains(v)) return false;
    const auto parent = f.parent(v);
    bool adjacent = false;
    const auto p = box.point_of(v);
    if (parent == box.sink()) {
      adjacent = box.sink_multiplicity(v) > 0;
    } else if (box.is_interior(parent)) {
      adjacent = l1_distance(p, box.point_of(parent)) == 1;
    }
    if (!adjacent) return false;
    // acyclic: the walk to the root takes at most n steps
    VertexId u = v;
    VertexId steps = 0;
    while (u != box.sink() && steps <= n) {
      u = f.parent(u);
      ++steps;
    }
    if (u != box.sink()) return false;
  }
  return true;
}

inline std::unordered_map<std::string, std::uint64_t> enumerate_trees(const BoxLattice& box) {
  const auto n = box.interior_count();
  std::unordered_map<std::string, std::uint64_t> trees;
  std::vector<int> dir(static_cast<std::size_t>(n), 0);
  OrientedForest f(n + 1, box.sink());
  for (;;) {
    for (VertexId v = 0; v < n; ++v) f.attach(v, box.step(v, dir[static_cast<std::size_t>(v)]));
    if (is_spanning_tree_of(f, box)) ++trees[tree_key(f, box)];
    std::size_t i = 0;
    while (i < dir.size() && ++dir[i] == box.degree()) dir[i++] = 0;
    if (i == dir.size()) return trees;
  }
}

/// Random nearest-neighbour path of the given length in Z^d, drawn with
/// the standard library generator.
inline std::vector<LatticePoint> random_path(int dim, std::size_t length, std::mt19937_64& gen) {
  std::uniform_int_distribution<int> pick(0, 2 * dim - 1);
  std::vector<LatticePoint> path{LatticePoint::origin(dim)};
  for (std::size_t t = 0; t < length; ++t) path.push_back(shifted(path.back(), pick(gen)));
  return path;
}

}  // namespace hds::oracle

#endif  // HDS_TESTS_ORACLES_HPP
