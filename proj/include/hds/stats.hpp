#ifndef HDS_STATS_HPP
#define HDS_STATS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "hds/errors.hpp"

namespace hds {

/// A binomial proportion with its Wald standard error.
struct Proportion {
  std::uint64_t successes = 0;
  std::uint64_t trials = 0;

  double value() const noexcept {
    return trials == 0 ? 0.0 : static_cast<double>(successes) / static_cast<double>(trials);
  }
  double standard_error() const noexcept {
    if (trials == 0) return 0.0;
    const double p = value();
    return std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
  }
};

/// Per-label estimates with standard errors. `total` is the sample count
/// behind the estimates (0 for exact reference values).
struct Series {
  std::vector<std::int64_t> labels;
  std::vector<double> values;
  std::vector<double> stderrs;
  std::uint64_t total = 0;

  std::size_t size() const noexcept { return values.size(); }
};

using Metadata = std::map<std::string, std::string>;

/// Monte Carlo tallies over a fixed label set.
///
/// `params` describes the experiment and must match for tables to merge.
/// `streams` records the (seed, stream) pairs that contributed. Diagnostics
/// are additive counters (capped walks, escaped walks, ...).
class EstimateTable {
 public:
  EstimateTable() = default;

  EstimateTable(std::vector<std::int64_t> labels, Metadata params = {})
      : labels_(std::move(labels)), counts_(labels_.size(), 0), params_(std::move(params)) {}

  static EstimateTable with_range(std::int64_t n_labels, Metadata params = {}) {
    std::vector<std::int64_t> labels(static_cast<std::size_t>(n_labels));
    std::iota(labels.begin(), labels.end(), 0);
    return EstimateTable(std::move(labels), std::move(params));
  }

  const std::vector<std::int64_t>& labels() const noexcept { return labels_; }
  const std::vector<std::uint64_t>& counts() const noexcept { return counts_; }
  const Metadata& params() const noexcept { return params_; }
  const std::set<std::pair<std::uint64_t, std::uint64_t>>& streams() const noexcept {
    return streams_;
  }
  const std::map<std::string, std::uint64_t>& diagnostics() const noexcept {
    return diagnostics_;
  }

  std::size_t size() const noexcept { return labels_.size(); }

  std::uint64_t total() const noexcept {
    return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
  }

  void add(std::size_t index, std::uint64_t n = 1) { counts_.at(index) += n; }
  void add_counts(std::span<const std::uint64_t> counts) {
    if (counts.size() != counts_.size()) {
      throw IncompatibleTables("add_counts: label count mismatch");
    }
    for (std::size_t i = 0; i < counts.size(); ++i) counts_[i] += counts[i];
  }
  void add_diagnostic(const std::string& key, std::uint64_t n) { diagnostics_[key] += n; }
  void set_param(const std::string& key, std::string value) { params_[key] = std::move(value); }
  void add_stream(std::uint64_t seed, std::uint64_t stream) { streams_.emplace(seed, stream); }

  Proportion proportion_of(std::size_t index) const { return {counts_.at(index), total()}; }

  double proportion(std::size_t index) const { return proportion_of(index).value(); }
  double standard_error(std::size_t index) const { return proportion_of(index).standard_error(); }

  Series series() const {
    Series s{labels_, {}, {}, total()};
    s.values.reserve(size());
    s.stderrs.reserve(size());
    for (std::size_t i = 0; i < size(); ++i) {
      const auto p = proportion_of(i);
      s.values.push_back(p.value());
      s.stderrs.push_back(p.standard_error());
    }
    return s;
  }

  bool operator==(const EstimateTable&) const = default;

  friend EstimateTable merge(const EstimateTable& a, const EstimateTable& b);

 private:
  std::vector<std::int64_t> labels_;
  std::vector<std::uint64_t> counts_;
  Metadata params_;
  std::set<std::pair<std::uint64_t, std::uint64_t>> streams_;
  std::map<std::string, std::uint64_t> diagnostics_;
};

/// Adds counts and diagnostics. Associative and commutative; an empty
/// table (no labels, no params) is the identity.
inline EstimateTable merge(const EstimateTable& a, const EstimateTable& b) {
  auto is_empty = [](const EstimateTable& t) { return t.labels_.empty() && t.params_.empty(); };
  if (is_empty(b)) return a;
  if (is_empty(a)) return b;
  if (a.labels_ != b.labels_) throw IncompatibleTables("merge: label sets differ");
  if (a.params_ != b.params_) throw IncompatibleTables("merge: experiment parameters differ");
  EstimateTable out = a;
  for (std::size_t i = 0; i < out.counts_.size(); ++i) out.counts_[i] += b.counts_[i];
  out.streams_.insert(b.streams_.begin(), b.streams_.end());
  for (const auto& [key, n] : b.diagnostics_) out.diagnostics_[key] += n;
  return out;
}

/// k-th raw moment of the label under the empirical law, with the standard
/// error of the sample mean of label^k.
inline std::pair<double, double> raw_moment(const EstimateTable& t, int k) {
  const auto n = static_cast<double>(t.total());
  if (n == 0) return {0.0, 0.0};
  double m1 = 0.0;
  double m2 = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double x = std::pow(static_cast<double>(t.labels()[i]), k);
    const double w = static_cast<double>(t.counts()[i]) / n;
    m1 += w * x;
    m2 += w * x * x;
  }
  return {m1, std::sqrt(std::max(0.0, m2 - m1 * m1) / n)};
}

struct ComparisonVerdict {
  std::vector<std::int64_t> labels;
  std::vector<double> z;
  double k = 0.0;
  double slack = 0.0;
  bool pass = true;
  std::int64_t worst_label = -1;
  double worst_z = 0.0;
};

namespace detail {

inline ComparisonVerdict verdict_from_z(std::vector<std::int64_t> labels, std::vector<double> z,
                                        double k, double slack) {
  ComparisonVerdict v{std::move(labels), std::move(z), k, slack, true, -1, 0.0};
  for (std::size_t i = 0; i < v.z.size(); ++i) {
    if (v.worst_label < 0 || v.z[i] > v.worst_z) {
      v.worst_z = v.z[i];
      v.worst_label = v.labels[i];
    }
    if (v.z[i] > k) v.pass = false;
  }
  return v;
}

inline double floored(double se, std::uint64_t total) {
  return total == 0 ? se : std::max(se, 1.0 / static_cast<double>(total));
}

}  // namespace detail

/// z_i = max(0, |est_i - ref_i| - slack) / max(stderr_i, 1/total).
/// Passes iff every z_i <= k. With slack = 0 this is a plain k-sigma test.
inline ComparisonVerdict compare(const Series& est, std::span<const double> ref, double k,
                                 double slack = 0.0) {
  if (!(k > 0)) throw std::invalid_argument("compare: k must be positive");
  if (ref.size() != est.size()) throw IncompatibleTables("compare: label mismatch");
  std::vector<double> z(est.size());
  for (std::size_t i = 0; i < est.size(); ++i) {
    const double diff = std::max(0.0, std::abs(est.values[i] - ref[i]) - slack);
    const double se = detail::floored(est.stderrs[i], est.total);
    z[i] = se > 0 ? diff / se : (diff > 0 ? INFINITY : 0.0);
  }
  return detail::verdict_from_z(est.labels, std::move(z), k, slack);
}

inline ComparisonVerdict compare(const EstimateTable& est, std::span<const double> ref,
                                 double k, double slack = 0.0) {
  return compare(est.series(), ref, k, slack);
}

/// Two-sample version: z_i = |a_i - b_i| / sqrt(se_a^2 + se_b^2).
inline ComparisonVerdict compare(const Series& a, const Series& b, double k) {
  if (!(k > 0)) throw std::invalid_argument("compare: k must be positive");
  if (a.labels != b.labels) throw IncompatibleTables("compare: label mismatch");
  std::vector<double> z(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double sa = detail::floored(a.stderrs[i], a.total);
    const double sb = detail::floored(b.stderrs[i], b.total);
    const double se = std::sqrt(sa * sa + sb * sb);
    const double diff = std::abs(a.values[i] - b.values[i]);
    z[i] = se > 0 ? diff / se : (diff > 0 ? INFINITY : 0.0);
  }
  return detail::verdict_from_z(a.labels, std::move(z), k, 0.0);
}

struct ChiSquare {
  double statistic = 0.0;
  std::uint64_t df = 0;
};

/// Pearson statistic of `counts` against cell probabilities proportional
/// to `weights`.
inline ChiSquare chi_square_gof(std::span<const std::uint64_t> counts,
                                std::span<const double> weights) {
  if (counts.size() < 2) throw TooFewSamples("chi_square: need at least 2 cells");
  if (weights.size() != counts.size()) {
    throw std::invalid_argument("chi_square: one weight per cell required");
  }
  const double total =
      static_cast<double>(std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}));
  const double mass = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(mass > 0)) throw std::invalid_argument("chi_square: weights must have positive sum");
  double stat = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (!(weights[i] >= 0)) throw std::invalid_argument("chi_square: negative weight");
    const double expected = total * weights[i] / mass;
    if (expected < 5.0) {
      throw TooFewSamples("chi_square: expected count " + std::to_string(expected) +
                          " < 5 in cell " + std::to_string(i));
    }
    const double dev = static_cast<double>(counts[i]) - expected;
    stat += dev * dev / expected;
  }
  return {stat, counts.size() - 1};
}

/// Pearson statistic of `counts` against the uniform law on its cells.
inline ChiSquare chi_square_uniform(std::span<const std::uint64_t> counts) {
  const std::vector<double> flat(counts.size(), 1.0);
  return chi_square_gof(counts, flat);
}

/// Upper alpha point of the chi-square law with df degrees of freedom.
inline double chi_square_critical(std::uint64_t df, double alpha) {
  if (df == 0) throw std::invalid_argument("chi_square_critical: df must be >= 1");
  if (!(alpha > 0 && alpha < 1)) throw std::invalid_argument("chi_square_critical: alpha in (0,1)");
  const boost::math::chi_squared_distribution<double> law(static_cast<double>(df));
  return boost::math::quantile(boost::math::complement(law, alpha));
}

inline double chi_square_critical_001(std::uint64_t df) { return chi_square_critical(df, 0.01); }

}  // namespace hds

#endif  // HDS_STATS_HPP
