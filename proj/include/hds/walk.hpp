#ifndef HDS_WALK_HPP
#define HDS_WALK_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <variant>
#include <vector>

#include "hds/errors.hpp"
#include "hds/lattice.hpp"
#include "hds/rng.hpp"
#include "hds/stats.hpp"

namespace hds {

struct PointHash {
  std::size_t operator()(const LatticePoint& p) const noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (auto c : p.coords) {
      h ^= static_cast<std::uint32_t>(c);
      h *= 0x100000001b3ULL;
    }
    return static_cast<std::size_t>(h ^ (h >> 29));
  }
};

/// Nearest-neighbour path s_0, ..., s_k in Z^d.
struct LatticePath {
  std::vector<LatticePoint> steps;

  bool is_adjacent() const {
    for (std::size_t t = 1; t < steps.size(); ++t) {
      if (steps[t].dim() != steps[t - 1].dim() || l1_distance(steps[t], steps[t - 1]) != 1) {
        return false;
      }
    }
    return true;
  }

  bool operator==(const LatticePath&) const = default;
};

/// A LatticePath with all vertices distinct.
struct SelfAvoidingPath {
  std::vector<LatticePoint> steps;

  bool operator==(const SelfAvoidingPath&) const = default;
};

/// Chronological loop erasure of any sequence of hashable values. Scanning
/// left to right, a value already on the erased path cuts the path back to
/// its earlier occurrence.
template <class T, class Hash = std::hash<T>>
std::vector<T> loop_erase_values(std::span<const T> path) {
  std::vector<T> out;
  std::unordered_map<T, std::size_t, Hash> position;
  for (const T& x : path) {
    auto it = position.find(x);
    if (it == position.end()) {
      position.emplace(x, out.size());
      out.push_back(x);
      continue;
    }
    const std::size_t keep = it->second;
    for (std::size_t j = keep + 1; j < out.size(); ++j) position.erase(out[j]);
    out.resize(keep + 1);
  }
  return out;
}

inline SelfAvoidingPath loop_erase(const LatticePath& path) {
  if (path.steps.empty()) throw MalformedPath("loop_erase: empty path");
  if (!path.is_adjacent()) throw MalformedPath("loop_erase: consecutive points are not adjacent");
  return {loop_erase_values<LatticePoint, PointHash>(path.steps)};
}

enum class Termination { hit, escaped, capped };

inline const char* to_string(Termination t) noexcept {
  switch (t) {
    case Termination::hit: return "hit";
    case Termination::escaped: return "escaped";
    case Termination::capped: return "capped";
  }
  return "?";
}

struct StopOnHit {
  std::unordered_set<LatticePoint, PointHash> targets;
};
struct StopOnExit {
  int radius;  // stop once the sup-norm reaches this value
};
struct StopAfter {
  std::uint64_t length;
};
using StopRule = std::variant<StopOnHit, StopOnExit, StopAfter>;

struct WalkResult {
  LatticePath path;
  Termination reason;
};

/// Simple random walk from `start` until the stopping rule fires (checked
/// at every time including 0) or `max_steps` steps have been taken.
template <class URBG>
WalkResult run_srw(const LatticePoint& start, const StopRule& rule, std::uint64_t max_steps,
                   URBG& rng) {
  const int deg = 2 * start.dim();
  LatticePath path{{start}};
  LatticePoint cur = start;
  auto fired = [&]() -> std::optional<Termination> {
    if (const auto* hit = std::get_if<StopOnHit>(&rule)) {
      if (hit->targets.contains(cur)) return Termination::hit;
    } else if (const auto* exit = std::get_if<StopOnExit>(&rule)) {
      if (sup_norm(cur) >= exit->radius) return Termination::escaped;
    }
    return std::nullopt;
  };
  std::uint64_t limit = max_steps;
  if (const auto* fixed = std::get_if<StopAfter>(&rule)) limit = std::min(limit, fixed->length);
  for (std::uint64_t t = 0;; ++t) {
    if (auto reason = fired()) return {std::move(path), *reason};
    if (t == limit) break;
    const int dir = static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(deg)));
    cur.coords[static_cast<std::size_t>(direction_axis(dir))] += direction_sign(dir);
    path.steps.push_back(cur);
  }
  return {std::move(path), Termination::capped};
}

namespace detail {

// Walker on Z^d that only tracks whether it sits at the origin.
class OriginTracker {
 public:
  explicit OriginTracker(int dim) : coords_(static_cast<std::size_t>(dim), 0) {}

  template <class URBG>
  void step(URBG& rng) {
    const auto dir = static_cast<int>(uniform_below(rng, 2 * coords_.size()));
    auto& c = coords_[static_cast<std::size_t>(direction_axis(dir))];
    nonzero_ -= (c != 0);
    c += direction_sign(dir);
    nonzero_ += (c != 0);
  }

  bool at_origin() const noexcept { return nonzero_ == 0; }

  void reset() {
    std::fill(coords_.begin(), coords_.end(), 0);
    nonzero_ = 0;
  }

 private:
  std::vector<std::int32_t> coords_;
  int nonzero_ = 0;
};

inline void check_dim(int dim, const char* who) {
  if (dim < 1) throw std::invalid_argument(std::string(who) + ": dimension must be >= 1");
}

}  // namespace detail

/// Return events of the walk from o observed up to a finite horizon.
struct ReturnTally {
  Proportion from_two;   // S_n = o for some 2 <= n <= horizon
  Proportion from_four;  // S_n = o for some 4 <= n <= horizon
  std::uint64_t horizon = 0;
};

/// Both return events from the same walks. Each walk stops once it has
/// returned at some n >= 4, or at the horizon.
template <class URBG>
ReturnTally tally_returns(int dim, std::uint64_t horizon, std::uint64_t samples, URBG& rng) {
  detail::check_dim(dim, "tally_returns");
  if (horizon < 4) throw std::invalid_argument("tally_returns: horizon must be >= 4");
  ReturnTally out{{0, samples}, {0, samples}, horizon};
  detail::OriginTracker walker(dim);
  for (std::uint64_t s = 0; s < samples; ++s) {
    walker.reset();
    bool seen_two = false;
    for (std::uint64_t n = 1; n <= horizon; ++n) {
      walker.step(rng);
      if (!walker.at_origin()) continue;
      seen_two = true;
      if (n >= 4) {
        ++out.from_four.successes;
        break;
      }
    }
    out.from_two.successes += seen_two;
  }
  return out;
}

/// Estimate of P[S_n = o for some min_n <= n <= horizon], min_n in {2, 4}.
/// A lower bound for the infinite-horizon event.
template <class URBG>
Proportion estimate_return(int dim, int min_n, std::uint64_t horizon, std::uint64_t samples,
                           URBG& rng) {
  detail::check_dim(dim, "estimate_return");
  if (min_n != 2 && min_n != 4) {
    throw std::invalid_argument("estimate_return: min_n must be 2 or 4");
  }
  if (horizon < static_cast<std::uint64_t>(min_n)) {
    throw std::invalid_argument("estimate_return: horizon must be >= min_n");
  }
  if (samples < 1) throw std::invalid_argument("estimate_return: samples must be >= 1");
  Proportion out{0, samples};
  detail::OriginTracker walker(dim);
  for (std::uint64_t s = 0; s < samples; ++s) {
    walker.reset();
    for (std::uint64_t n = 1; n <= horizon; ++n) {
      walker.step(rng);
      if (n >= static_cast<std::uint64_t>(min_n) && walker.at_origin()) {
        ++out.successes;
        break;
      }
    }
  }
  return out;
}

/// Frequency of S_n = o at exactly step n.
template <class URBG>
Proportion estimate_n_step_return(int dim, std::uint64_t n, std::uint64_t samples, URBG& rng) {
  detail::check_dim(dim, "estimate_n_step_return");
  Proportion out{0, samples};
  detail::OriginTracker walker(dim);
  for (std::uint64_t s = 0; s < samples; ++s) {
    walker.reset();
    for (std::uint64_t t = 0; t < n; ++t) walker.step(rng);
    out.successes += walker.at_origin();
  }
  return out;
}

/// (pi d / 4n)^(d/2), evaluated in log space. Upper bound on the L1 norm of
/// the n-th power of the one-step characteristic function, hence on
/// P[S_n = o].
inline double fourier_bound(int dim, std::uint64_t n) {
  if (dim < 1 || n < 1) throw std::invalid_argument("fourier_bound: need d >= 1 and n >= 1");
  const double d = dim;
  return std::exp(0.5 * d *
                  (std::log(std::numbers::pi) + std::log(d) - std::log(4.0) -
                   std::log(static_cast<double>(n))));
}

}  // namespace hds

#endif  // HDS_WALK_HPP
