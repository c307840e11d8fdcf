#ifndef HDS_LATTICE_HPP
#define HDS_LATTICE_HPP

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <string>
#include <stdexcept>
#include <vector>

#include "hds/errors.hpp"

namespace hds {

using VertexId = std::int64_t;

/// A point of Z^d. The dimension is the length of `coords`.
struct LatticePoint {
  std::vector<std::int32_t> coords;

  static LatticePoint origin(int dim) {
    return LatticePoint{std::vector<std::int32_t>(static_cast<std::size_t>(dim), 0)};
  }

  int dim() const noexcept { return static_cast<int>(coords.size()); }

  bool operator==(const LatticePoint&) const = default;
};

// Unit directions are numbered +e1, -e1, +e2, -e2, ...
constexpr int direction_axis(int dir) noexcept { return dir / 2; }
constexpr int direction_sign(int dir) noexcept { return (dir % 2 == 0) ? 1 : -1; }

inline LatticePoint shifted(LatticePoint p, int dir) {
  p.coords[static_cast<std::size_t>(direction_axis(dir))] += direction_sign(dir);
  return p;
}

inline int l1_distance(const LatticePoint& a, const LatticePoint& b) {
  int sum = 0;
  for (std::size_t i = 0; i < a.coords.size(); ++i) sum += std::abs(a.coords[i] - b.coords[i]);
  return sum;
}

inline int sup_norm(const LatticePoint& p) {
  int m = 0;
  for (auto c : p.coords) m = std::max(m, std::abs(c));
  return m;
}

inline constexpr std::uint64_t kDefaultVertexCap = std::uint64_t{1} << 31;

/// The wired box G_L: V_L = [-L, L]^d with everything outside collapsed
/// into a single sink. Loop edges at the sink are dropped, so each interior
/// vertex has 2d incident edges counting sink multiplicity.
///
/// Vertex ids are row-major over coordinates shifted by +L (the last
/// coordinate varies fastest). The sink has id interior_count().
/// Adjacency is computed from the id on demand; nothing is stored beyond
/// the strides. Immutable after construction.
class BoxLattice {
 public:
  BoxLattice(int dim, int radius, std::uint64_t vertex_cap = kDefaultVertexCap)
      : dim_(dim), radius_(radius), side_(2 * static_cast<std::int64_t>(radius) + 1) {
    if (dim < 1) throw std::invalid_argument("make_box: dimension must be >= 1");
    if (radius < 1) throw std::invalid_argument("make_box: radius must be >= 1");
    std::uint64_t count = 1;
    for (int i = 0; i < dim; ++i) {
      if (count > vertex_cap / static_cast<std::uint64_t>(side_)) {
        throw DimensionTooLarge("make_box: (2L+1)^d = " + std::to_string(side_) + "^" +
                                std::to_string(dim) + " exceeds the vertex cap of " +
                                std::to_string(vertex_cap));
      }
      count *= static_cast<std::uint64_t>(side_);
    }
    count_ = static_cast<VertexId>(count);
    strides_.assign(static_cast<std::size_t>(dim), 1);
    for (int i = dim - 2; i >= 0; --i) {
      strides_[static_cast<std::size_t>(i)] = strides_[static_cast<std::size_t>(i) + 1] * side_;
    }
  }

  int dim() const noexcept { return dim_; }
  int radius() const noexcept { return radius_; }
  int degree() const noexcept { return 2 * dim_; }
  std::int64_t side() const noexcept { return side_; }
  VertexId interior_count() const noexcept { return count_; }
  VertexId sink() const noexcept { return count_; }
  VertexId origin() const noexcept { return count_ / 2; }

  bool is_interior(VertexId v) const noexcept { return v >= 0 && v < count_; }

  VertexId index_of(const LatticePoint& p) const {
    if (p.dim() != dim_) throw InvalidVertex("vertex_index: dimension mismatch");
    VertexId id = 0;
    for (int i = 0; i < dim_; ++i) {
      const auto c = p.coords[static_cast<std::size_t>(i)];
      if (c < -radius_ || c > radius_) {
        throw InvalidVertex("vertex_index: coordinate " + std::to_string(c) +
                            " outside [-L, L]");
      }
      id += (static_cast<VertexId>(c) + radius_) * strides_[static_cast<std::size_t>(i)];
    }
    return id;
  }

  LatticePoint point_of(VertexId v) const {
    require_interior(v);
    LatticePoint p;
    p.coords.resize(static_cast<std::size_t>(dim_));
    for (int i = 0; i < dim_; ++i) {
      const auto s = strides_[static_cast<std::size_t>(i)];
      p.coords[static_cast<std::size_t>(i)] = static_cast<std::int32_t>((v / s) % side_) - radius_;
    }
    return p;
  }

  /// Neighbor of interior vertex v in direction dir, or sink() when the
  /// lattice neighbor lies outside V_L. No range check.
  VertexId step(VertexId v, int dir) const noexcept {
    const auto s = strides_[static_cast<std::size_t>(direction_axis(dir))];
    const auto digit = (v / s) % side_;
    if (direction_sign(dir) > 0) return digit + 1 < side_ ? v + s : count_;
    return digit > 0 ? v - s : count_;
  }

  int sink_multiplicity(VertexId v) const {
    require_interior(v);
    int m = 0;
    for (int dir = 0; dir < degree(); ++dir) m += (step(v, dir) == count_);
    return m;
  }

  void require_interior(VertexId v) const {
    if (!is_interior(v)) {
      throw InvalidVertex(v == count_ ? "vertex is the sink"
                                      : "vertex id " + std::to_string(v) + " out of range");
    }
  }

 private:
  int dim_;
  int radius_;
  std::int64_t side_;
  VertexId count_ = 0;
  std::vector<std::int64_t> strides_;
};

inline BoxLattice make_box(int dim, int radius, std::uint64_t vertex_cap = kDefaultVertexCap) {
  return BoxLattice(dim, radius, vertex_cap);
}

/// Neighbors of an interior vertex as a multiset: distinct interior
/// neighbors plus the number of edges to the sink.
struct Neighborhood {
  std::vector<VertexId> interior;
  int sink_multiplicity = 0;

  int total() const noexcept { return static_cast<int>(interior.size()) + sink_multiplicity; }
};

inline Neighborhood neighbors(const BoxLattice& box, VertexId v) {
  box.require_interior(v);
  Neighborhood n;
  n.interior.reserve(static_cast<std::size_t>(box.degree()));
  for (int dir = 0; dir < box.degree(); ++dir) {
    const auto u = box.step(v, dir);
    if (u == box.sink()) {
      ++n.sink_multiplicity;
    } else {
      n.interior.push_back(u);
    }
  }
  return n;
}

}  // namespace hds

#endif  // HDS_LATTICE_HPP
