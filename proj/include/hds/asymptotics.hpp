#ifndef HDS_ASYMPTOTICS_HPP
#define HDS_ASYMPTOTICS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hds/stats.hpp"

namespace hds {

enum class FormulaVariant { thm1_exact_sum, thm1_leading, bethe, p_from_q };

inline const char* to_string(FormulaVariant v) noexcept {
  switch (v) {
    case FormulaVariant::thm1_exact_sum: return "thm1-exact-sum";
    case FormulaVariant::thm1_leading: return "thm1-leading";
    case FormulaVariant::bethe: return "bethe";
    case FormulaVariant::p_from_q: return "p-from-q";
  }
  return "?";
}

/// Values indexed by height i = 0, 1, ..., with an order-of-error string
/// per entry where the formula is asymptotic (empty otherwise).
struct FormulaTable {
  int dim = 0;
  FormulaVariant variant = FormulaVariant::thm1_exact_sum;
  std::vector<double> values;
  std::vector<std::string> error_order;
};

/// floor(sqrt(n)) in exact integer arithmetic.
constexpr std::int64_t isqrt(std::int64_t n) noexcept {
  std::int64_t r = 0;
  while ((r + 1) * (r + 1) <= n) ++r;
  return r;
}

/// e^{-1} / j!, the Poisson(1) weight.
inline double poisson_weight(int j) {
  if (j < 0) throw std::out_of_range("poisson_weight: j must be >= 0");
  if (j > 20) return std::exp(-1.0 - std::lgamma(static_cast<double>(j) + 1.0));
  double w = std::exp(-1.0);
  for (int k = 2; k <= j; ++k) w /= k;
  return w;
}

namespace detail {

inline void check_height(int dim, int i, const char* who) {
  if (dim < 1) throw std::out_of_range(std::string(who) + ": d must be >= 1");
  if (i < 0 || i >= 2 * dim) {
    throw std::out_of_range(std::string(who) + ": i = " + std::to_string(i) +
                            " outside [0, 2d-1]");
  }
}

}  // namespace detail

/// Asymptotic height probability at the origin:
/// sum_{j<=i} e^{-1}/j!/(2d-j) for i <= floor(sqrt d), and the value at
/// floor(sqrt d) above that (the plateau).
inline double formula_p(int dim, int i) {
  detail::check_height(dim, i, "formula_p");
  const auto top = std::min<std::int64_t>(i, isqrt(dim));
  double sum = 0.0;
  for (int j = 0; j <= top; ++j) sum += poisson_weight(j) / (2.0 * dim - j);
  return sum;
}

/// Same as formula_p with every denominator replaced by 2d.
inline double formula_p_leading(int dim, int i) {
  detail::check_height(dim, i, "formula_p_leading");
  const auto top = std::min<std::int64_t>(i, isqrt(dim));
  double sum = 0.0;
  for (int j = 0; j <= top; ++j) sum += poisson_weight(j);
  return sum / (2.0 * dim);
}

inline std::string formula_error_order(int dim, int i) {
  return i <= isqrt(dim) ? "O(i/d^2)" : "O(d^-3/2)";
}

inline FormulaTable formula_table(int dim, int max_i,
                                  FormulaVariant variant = FormulaVariant::thm1_exact_sum) {
  if (variant != FormulaVariant::thm1_exact_sum && variant != FormulaVariant::thm1_leading) {
    throw std::invalid_argument("formula_table: variant must be thm1-exact-sum or thm1-leading");
  }
  detail::check_height(dim, max_i, "formula_table");
  FormulaTable t{dim, variant, {}, {}};
  for (int i = 0; i <= max_i; ++i) {
    t.values.push_back(variant == FormulaVariant::thm1_exact_sum ? formula_p(dim, i)
                                                                  : formula_p_leading(dim, i));
    t.error_order.push_back(formula_error_order(dim, i));
  }
  return t;
}

/// p(i) = sum_{j<=i} q(j)/(2d-j) for i = 0..2d-1.
inline FormulaTable p_from_q(std::span<const double> q, int dim) {
  if (dim < 1) throw std::invalid_argument("p_from_q: d must be >= 1");
  if (q.size() != static_cast<std::size_t>(2 * dim)) {
    throw std::invalid_argument("p_from_q: q must have 2d entries");
  }
  FormulaTable t{dim, FormulaVariant::p_from_q, {}, {}};
  double acc = 0.0;
  for (int j = 0; j < 2 * dim; ++j) {
    const double qj = q[static_cast<std::size_t>(j)];
    if (!(qj >= 0.0)) throw std::invalid_argument("p_from_q: negative entry in q");
    acc += qj / (2.0 * dim - j);
    t.values.push_back(acc);
    t.error_order.emplace_back();
  }
  return t;
}

/// p_from_q applied to an empirical q-table. Each p(i) is a linear
/// statistic of one draw X ~ q, namely c_i(X) = 1{X <= i}/(2d-X), so its
/// standard error is sqrt((E[c_i^2] - E[c_i]^2) / n) under the empirical law.
inline Series p_from_q_estimate(const EstimateTable& q, int dim) {
  if (q.size() != static_cast<std::size_t>(2 * dim)) {
    throw std::invalid_argument("p_from_q_estimate: q must have 2d labels");
  }
  const auto qs = q.series();
  const auto table = p_from_q(qs.values, dim);
  Series out{qs.labels, table.values, {}, qs.total};
  double second = 0.0;
  for (int i = 0; i < 2 * dim; ++i) {
    const double c = 1.0 / (2.0 * dim - i);
    second += c * c * qs.values[static_cast<std::size_t>(i)];
    const double mean = table.values[static_cast<std::size_t>(i)];
    const double var = std::max(0.0, second - mean * mean);
    out.stderrs.push_back(qs.total == 0 ? 0.0 : std::sqrt(var / static_cast<double>(qs.total)));
  }
  return out;
}

/// Bethe-lattice height law, evaluated in log space:
/// [1/((d^2-1) d^d)] sum_{j<=i} C(d+1, j) (d-1)^(d-j+1).
inline double bethe_p(int dim, int i) {
  if (dim < 2) throw std::out_of_range("bethe_p: d must be >= 2");
  if (i < 0) throw std::out_of_range("bethe_p: i must be >= 0");
  const double d = dim;
  const double log_norm = std::log(d * d - 1.0) + d * std::log(d);
  const double log_base = std::log(d - 1.0);
  double sum = 0.0;
  for (int j = 0; j <= std::min(i, dim + 1); ++j) {
    const double log_binom =
        std::lgamma(d + 2.0) - std::lgamma(j + 1.0) - std::lgamma(d + 2.0 - j);
    sum += std::exp(log_binom + (d - j + 1.0) * log_base - log_norm);
  }
  return sum;
}

inline FormulaTable bethe_table(int dim, int max_i) {
  if (max_i < 0) throw std::out_of_range("bethe_table: max_i must be >= 0");
  FormulaTable t{dim, FormulaVariant::bethe, {}, {}};
  for (int i = 0; i <= max_i; ++i) {
    t.values.push_back(bethe_p(dim, i));
    t.error_order.emplace_back();
  }
  return t;
}

/// sum_{i=first}^{last} bethe_p(d, i).
inline double bethe_total(int dim, int first, int last) {
  double s = 0.0;
  for (int i = first; i <= last; ++i) s += bethe_p(dim, i);
  return s;
}

}  // namespace hds

#endif  // HDS_ASYMPTOTICS_HPP
