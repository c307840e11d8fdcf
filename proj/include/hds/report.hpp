#ifndef HDS_REPORT_HPP
#define HDS_REPORT_HPP

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"

#include "hds/asymptotics.hpp"
#include "hds/stats.hpp"

namespace hds {

using Value = std::variant<std::string, std::int64_t, std::uint64_t, double, bool>;
using Fields = std::vector<std::pair<std::string, Value>>;

struct ReportRow {
  std::int64_t label = 0;
  std::optional<std::uint64_t> count;  // absent for closed-form values
  double proportion = 0.0;
  double stderr_ = 0.0;
};

struct ReportTable {
  std::string name;
  std::vector<ReportRow> rows;
};

/// Everything a run writes. Field order is preserved on output.
struct Report {
  Fields config;
  std::vector<ReportTable> tables;
  Fields diagnostics;
  std::optional<Fields> verdict;
};

/// 12 significant digits, trailing zeros dropped.
inline std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

inline std::string format_value(const Value& v) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, std::string>) {
          return x;
        } else if constexpr (std::is_same_v<T, bool>) {
          return x ? "true" : "false";
        } else if constexpr (std::is_same_v<T, double>) {
          return format_number(x);
        } else {
          return std::to_string(x);
        }
      },
      v);
}

inline ReportTable table_rows(std::string name, const EstimateTable& t) {
  ReportTable out{std::move(name), {}};
  for (std::size_t i = 0; i < t.size(); ++i) {
    out.rows.push_back({t.labels()[i], t.counts()[i], t.proportion(i), t.standard_error(i)});
  }
  return out;
}

inline ReportTable table_rows(std::string name, const Series& s) {
  ReportTable out{std::move(name), {}};
  for (std::size_t i = 0; i < s.size(); ++i) {
    out.rows.push_back({s.labels[i], std::nullopt, s.values[i], s.stderrs[i]});
  }
  return out;
}

inline ReportTable table_rows(std::string name, const FormulaTable& f) {
  ReportTable out{std::move(name), {}};
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    out.rows.push_back({static_cast<std::int64_t>(i), std::nullopt, f.values[i], 0.0});
  }
  return out;
}

/// CSV: `# key=value` lines for config, then `# diag.key=value`, then
/// `# verdict.key=value`; each table follows as `# table=<name>` and a
/// `label,count,proportion,stderr` block. Closed-form rows leave count empty.
inline void write_csv(std::ostream& os, const Report& r) {
  for (const auto& [k, v] : r.config) os << "# " << k << '=' << format_value(v) << '\n';
  for (const auto& [k, v] : r.diagnostics) os << "# diag." << k << '=' << format_value(v) << '\n';
  if (r.verdict) {
    for (const auto& [k, v] : *r.verdict) os << "# verdict." << k << '=' << format_value(v) << '\n';
  }
  for (const auto& t : r.tables) {
    os << "# table=" << t.name << '\n';
    os << "label,count,proportion,stderr\n";
    for (const auto& row : t.rows) {
      os << row.label << ',';
      if (row.count) os << *row.count;
      os << ',' << format_number(row.proportion) << ',' << format_number(row.stderr_) << '\n';
    }
  }
}

namespace detail {

// Doubles are rounded to 12 significant digits before serialization so the
// JSON and CSV carry the same numbers.
inline nlohmann::ordered_json json_number(double x) {
  if (!std::isfinite(x)) return format_number(x);
  return std::stod(format_number(x));
}

inline nlohmann::ordered_json json_value(const Value& v) {
  return std::visit(
      [](const auto& x) -> nlohmann::ordered_json {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, double>) {
          return json_number(x);
        } else {
          return x;
        }
      },
      v);
}

inline nlohmann::ordered_json json_fields(const Fields& fields) {
  auto obj = nlohmann::ordered_json::object();
  for (const auto& [k, v] : fields) obj[k] = json_value(v);
  return obj;
}

}  // namespace detail

/// JSON: {"config", "results": [{label, count, proportion, stderr, table}],
/// "diagnostics", "verdict"?}. `count` is null for closed-form rows.
inline void write_json(std::ostream& os, const Report& r) {
  nlohmann::ordered_json doc;
  doc["config"] = detail::json_fields(r.config);
  auto results = nlohmann::ordered_json::array();
  for (const auto& t : r.tables) {
    for (const auto& row : t.rows) {
      nlohmann::ordered_json item;
      item["label"] = row.label;
      item["count"] = row.count ? nlohmann::ordered_json(*row.count) : nlohmann::ordered_json();
      item["proportion"] = detail::json_number(row.proportion);
      item["stderr"] = detail::json_number(row.stderr_);
      item["table"] = t.name;
      results.push_back(std::move(item));
    }
  }
  doc["results"] = std::move(results);
  doc["diagnostics"] = detail::json_fields(r.diagnostics);
  if (r.verdict) doc["verdict"] = detail::json_fields(*r.verdict);
  os << doc.dump(2) << '\n';
}

inline std::string render(const Report& r, const std::string& format) {
  std::ostringstream os;
  if (format == "json") {
    write_json(os, r);
  } else {
    write_csv(os, r);
  }
  return os.str();
}

}  // namespace hds

#endif  // HDS_REPORT_HPP
