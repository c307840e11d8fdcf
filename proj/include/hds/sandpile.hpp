#ifndef HDS_SANDPILE_HPP
#define HDS_SANDPILE_HPP

#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hds/errors.hpp"
#include "hds/lattice.hpp"
#include "hds/rng.hpp"

namespace hds {

/// Particle counts on the interior of a box. Holds a pointer to the box,
/// which must outlive the configuration.
class HeightConfig {
 public:
  HeightConfig(const BoxLattice& box, std::vector<std::int64_t> heights)
      : box_(&box), heights_(std::move(heights)) {
    if (static_cast<VertexId>(heights_.size()) != box.interior_count()) {
      throw std::invalid_argument("HeightConfig: expected " +
                                  std::to_string(box.interior_count()) + " heights, got " +
                                  std::to_string(heights_.size()));
    }
    for (auto h : heights_) {
      if (h < 0) throw std::invalid_argument("HeightConfig: negative height");
    }
  }

  static HeightConfig filled(const BoxLattice& box, std::int64_t height) {
    return HeightConfig(box, std::vector<std::int64_t>(
                                 static_cast<std::size_t>(box.interior_count()), height));
  }

  // The all-(2d-1) configuration, which is recurrent.
  static HeightConfig maximal(const BoxLattice& box) { return filled(box, box.degree() - 1); }

  const BoxLattice& box() const noexcept { return *box_; }
  std::span<const std::int64_t> heights() const noexcept { return heights_; }
  std::int64_t operator[](VertexId v) const { return heights_[static_cast<std::size_t>(v)]; }
  std::int64_t& at(VertexId v) { return heights_[static_cast<std::size_t>(v)]; }

  std::int64_t total() const noexcept {
    return std::accumulate(heights_.begin(), heights_.end(), std::int64_t{0});
  }

  bool operator==(const HeightConfig& other) const noexcept {
    return box_ == other.box_ && heights_ == other.heights_;
  }

 private:
  const BoxLattice* box_;
  std::vector<std::int64_t> heights_;
};

struct Odometer {
  std::vector<std::uint64_t> topplings;

  bool operator==(const Odometer&) const = default;
};

inline bool is_stable(const HeightConfig& c) noexcept {
  const auto threshold = c.box().degree();
  for (auto h : c.heights()) {
    if (h >= threshold) return false;
  }
  return true;
}

/// Topple v once in place. Particles sent across sink edges are lost.
inline void topple_in_place(HeightConfig& c, VertexId v) {
  const auto& box = c.box();
  box.require_interior(v);
  if (c[v] < box.degree()) {
    throw IllegalToppling("topple: vertex " + std::to_string(v) + " has height " +
                          std::to_string(c[v]) + " < 2d = " + std::to_string(box.degree()));
  }
  c.at(v) -= box.degree();
  for (int dir = 0; dir < box.degree(); ++dir) {
    const auto u = box.step(v, dir);
    if (u != box.sink()) ++c.at(u);
  }
}

inline HeightConfig topple(HeightConfig c, VertexId v) {
  topple_in_place(c, v);
  return c;
}

/// Work-queue stabilizer with reusable scratch space. A vertex is queued at
/// most once until it is processed; when processed it topples as many times
/// as its height allows in one go.
class Stabilizer {
 public:
  explicit Stabilizer(const BoxLattice& box)
      : box_(&box), queued_(static_cast<std::size_t>(box.interior_count()), 0) {
    pending_.reserve(64);
  }

  /// Stabilizes in place. When `odometer` is non-null it must be sized to
  /// the box; toppling counts are added to it. Returns the number of
  /// topplings performed.
  std::uint64_t run(HeightConfig& c, std::uint64_t* odometer = nullptr) {
    const auto n = box_->interior_count();
    for (VertexId v = 0; v < n; ++v) enqueue_if_unstable(c, v);
    return drain(c, odometer);
  }

  /// Adds one particle at v and stabilizes, assuming c was stable.
  std::uint64_t add_and_stabilize(HeightConfig& c, VertexId v) {
    ++c.at(v);
    enqueue_if_unstable(c, v);
    return drain(c, nullptr);
  }

 private:
  void enqueue_if_unstable(const HeightConfig& c, VertexId v) {
    auto& flag = queued_[static_cast<std::size_t>(v)];
    if (!flag && c[v] >= box_->degree()) {
      flag = 1;
      pending_.push_back(v);
    }
  }

  std::uint64_t drain(HeightConfig& c, std::uint64_t* odometer) {
    const std::int64_t deg = box_->degree();
    const auto sink = box_->sink();
    // Bug trap only; stabilization on the wired box always terminates.
    const std::uint64_t cap = std::numeric_limits<std::uint64_t>::max() / 2;
    std::uint64_t topplings = 0;
    while (!pending_.empty()) {
      const auto v = pending_.back();
      pending_.pop_back();
      queued_[static_cast<std::size_t>(v)] = 0;
      const auto k = c[v] / deg;
      if (k == 0) continue;
      c.at(v) -= k * deg;
      if (odometer != nullptr) odometer[v] += static_cast<std::uint64_t>(k);
      topplings += static_cast<std::uint64_t>(k);
      if (topplings > cap) throw std::runtime_error("stabilize: toppling cap exceeded");
      for (int dir = 0; dir < deg; ++dir) {
        const auto u = box_->step(v, static_cast<int>(dir));
        if (u == sink) continue;
        c.at(u) += k;
        enqueue_if_unstable(c, u);
      }
    }
    return topplings;
  }

  const BoxLattice* box_;
  std::vector<std::uint8_t> queued_;
  std::vector<VertexId> pending_;
};

struct Stabilized {
  HeightConfig config;
  Odometer odometer;
};

inline Stabilized stabilize(HeightConfig c) {
  Odometer odo{std::vector<std::uint64_t>(static_cast<std::size_t>(c.box().interior_count()), 0)};
  Stabilizer(c.box()).run(c, odo.topplings.data());
  return {std::move(c), std::move(odo)};
}

/// Burning test. The sink starts burnt; an unburnt v burns once its height
/// is at least 2d minus the number of its edges leading to burnt vertices.
/// The configuration is recurrent iff every vertex burns.
inline bool is_recurrent(const HeightConfig& c) {
  if (!is_stable(c)) throw NotStable("is_recurrent: configuration is not stable");
  const auto& box = c.box();
  const auto n = box.interior_count();
  const int deg = box.degree();
  std::vector<int> burnt_edges(static_cast<std::size_t>(n), 0);
  std::vector<std::uint8_t> burnt(static_cast<std::size_t>(n), 0);
  std::vector<VertexId> frontier;
  auto try_burn = [&](VertexId v) {
    if (!burnt[static_cast<std::size_t>(v)] &&
        c[v] >= deg - burnt_edges[static_cast<std::size_t>(v)]) {
      burnt[static_cast<std::size_t>(v)] = 1;
      frontier.push_back(v);
    }
  };
  for (VertexId v = 0; v < n; ++v) {
    for (int dir = 0; dir < deg; ++dir) {
      burnt_edges[static_cast<std::size_t>(v)] += (box.step(v, dir) == box.sink());
    }
  }
  for (VertexId v = 0; v < n; ++v) try_burn(v);
  VertexId burnt_count = 0;
  while (!frontier.empty()) {
    const auto v = frontier.back();
    frontier.pop_back();
    ++burnt_count;
    for (int dir = 0; dir < deg; ++dir) {
      const auto u = box.step(v, dir);
      if (u == box.sink() || burnt[static_cast<std::size_t>(u)]) continue;
      ++burnt_edges[static_cast<std::size_t>(u)];
      try_burn(u);
    }
  }
  return burnt_count == n;
}

/// The sandpile Markov chain on a fixed box: add a particle at a uniformly
/// chosen vertex, then stabilize.
class SandpileChain {
 public:
  explicit SandpileChain(const BoxLattice& box)
      : SandpileChain(HeightConfig::maximal(box)) {}

  explicit SandpileChain(HeightConfig start) : state_(std::move(start)), stabilizer_(state_.box()) {
    if (!is_stable(state_)) throw NotStable("SandpileChain: start configuration is not stable");
  }

  template <class URBG>
  void step(URBG& rng) {
    const auto v = static_cast<VertexId>(
        uniform_below(rng, static_cast<std::uint64_t>(state_.box().interior_count())));
    stabilizer_.add_and_stabilize(state_, v);
  }

  template <class URBG>
  void advance(std::uint64_t steps, URBG& rng) {
    for (std::uint64_t i = 0; i < steps; ++i) step(rng);
  }

  const HeightConfig& state() const noexcept { return state_; }

 private:
  HeightConfig state_;
  Stabilizer stabilizer_;
};

template <class URBG>
HeightConfig mc_step(HeightConfig c, URBG& rng) {
  SandpileChain chain(std::move(c));
  chain.step(rng);
  return chain.state();
}

struct ChainSchedule {
  std::uint64_t burn_in = 0;
  std::uint64_t thin = 1;
  std::uint64_t samples = 1;

  // 10 x |V_L| x 2d burn-in steps, |V_L| steps between records.
  static ChainSchedule defaults(const BoxLattice& box, std::uint64_t samples) {
    const auto n = static_cast<std::uint64_t>(box.interior_count());
    return {10 * n * static_cast<std::uint64_t>(box.degree()), n, samples};
  }
};

/// Runs the chain from the all-(2d-1) configuration and tallies eta(o).
/// Returns counts indexed by height 0..2d-1, summing to `samples`.
template <class URBG>
std::vector<std::uint64_t> sample_heights(const BoxLattice& box, const ChainSchedule& schedule,
                                          URBG& rng) {
  if (schedule.thin < 1) throw std::invalid_argument("sample_heights: thin must be >= 1");
  if (schedule.samples < 1) throw std::invalid_argument("sample_heights: samples must be >= 1");
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(box.degree()), 0);
  SandpileChain chain(box);
  chain.advance(schedule.burn_in, rng);
  const auto o = box.origin();
  for (std::uint64_t i = 0; i < schedule.samples; ++i) {
    chain.advance(schedule.thin, rng);
    ++counts[static_cast<std::size_t>(chain.state()[o])];
  }
  return counts;
}

template <class URBG>
std::vector<std::uint64_t> sample_heights(int dim, int radius, std::uint64_t burn_in,
                                          std::uint64_t thin, std::uint64_t samples, URBG& rng) {
  const auto box = make_box(dim, radius);
  return sample_heights(box, ChainSchedule{burn_in, thin, samples}, rng);
}

}  // namespace hds

#endif  // HDS_SANDPILE_HPP
