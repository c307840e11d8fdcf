#ifndef HDS_CLI_HPP
#define HDS_CLI_HPP

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hds/asymptotics.hpp"
#include "hds/experiment.hpp"
#include "hds/lattice.hpp"
#include "hds/report.hpp"
#include "hds/sandpile.hpp"
#include "hds/spanning.hpp"
#include "hds/stats.hpp"
#include "hds/walk.hpp"

#ifndef HDS_VERSION
#define HDS_VERSION "0.1.0"
#endif

namespace hds {

inline constexpr const char* kVersion = HDS_VERSION;
inline constexpr const char* kOutputDirEnv = "HDS_OUTPUT_DIR";

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"formula",     "bethe",     "simulate-box",
                                                 "ust-box",     "estimate-qd", "rw-return",
                                                 "compare",     "sensitivity"};
  return names;
}

struct RunConfig {
  std::string command;
  int dim = 2;
  int radius = 8;
  std::uint64_t samples = 100000;
  std::uint64_t seed = 1;
  std::optional<std::uint64_t> burn_in;  // default 10 |V_L| 2d
  std::optional<std::uint64_t> thin;     // default |V_L|
  int kill_radius = 6;
  std::uint64_t max_steps = 100000;
  std::uint64_t horizon = 10000;
  int min_n = 2;
  unsigned workers = 1;
  std::optional<int> max_i;
  std::string variant = "exact";
  double k = 3.0;
  double slack_q = 0.02;
  double slack_p = 0.0005;
  int q_max_i = 4;
  std::vector<int> kill_radii = {4, 8};
  std::string format = "csv";
  std::string output;
  bool timing = false;
};

/// Invalid flag values. The CLI maps this to exit status 2.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline void validate(const RunConfig& c) {
  const auto& names = command_names();
  if (std::find(names.begin(), names.end(), c.command) == names.end()) {
    throw UsageError("unknown command '" + c.command + "'");
  }
  if (c.dim < 1) throw UsageError("--dim must be >= 1");
  if (c.radius < 1) throw UsageError("--radius must be >= 1");
  if (c.samples < 1) throw UsageError("--samples must be >= 1");
  if (c.thin && *c.thin < 1) throw UsageError("--thin must be >= 1");
  if (c.kill_radius < 2 || c.kill_radius > 127) throw UsageError("--kill-radius must be in [2, 127]");
  if (c.max_steps < 1) throw UsageError("--max-steps must be >= 1");
  if (c.workers < 1) throw UsageError("--workers must be >= 1");
  if (c.min_n != 2 && c.min_n != 4) throw UsageError("--min-n must be 2 or 4");
  if (c.horizon < static_cast<std::uint64_t>(c.min_n)) throw UsageError("--horizon must be >= --min-n");
  if (!(c.k > 0)) throw UsageError("--k must be positive");
  if (c.variant != "exact" && c.variant != "leading") {
    throw UsageError("--variant must be 'exact' or 'leading'");
  }
  if (c.format != "csv" && c.format != "json") throw UsageError("--format must be csv or json");
  if (c.kill_radii.empty()) throw UsageError("--kill-radii must not be empty");
  for (int r : c.kill_radii) {
    if (r < 2 || r > 127) throw UsageError("--kill-radii entries must be in [2, 127]");
  }
}

namespace detail {

struct BoxSchedule {
  std::uint64_t burn_in;
  std::uint64_t thin;
};

inline BoxSchedule resolve_schedule(const RunConfig& c, const BoxLattice& box) {
  const auto defaults = ChainSchedule::defaults(box, c.samples);
  return {c.burn_in.value_or(defaults.burn_in), c.thin.value_or(defaults.thin)};
}

inline std::string join(const std::vector<int>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + std::to_string(xs[i]);
  return s;
}

inline Fields config_fields(const RunConfig& c, const std::optional<BoxSchedule>& schedule) {
  Fields f = {{"command", c.command},
              {"version", std::string(kVersion)},
              {"dim", static_cast<std::int64_t>(c.dim)},
              {"radius", static_cast<std::int64_t>(c.radius)},
              {"samples", c.samples},
              {"seed", c.seed},
              {"workers", static_cast<std::uint64_t>(c.workers)}};
  if (schedule) {
    f.emplace_back("burn_in", schedule->burn_in);
    f.emplace_back("thin", schedule->thin);
  } else {
    f.emplace_back("burn_in", std::string(c.burn_in ? std::to_string(*c.burn_in) : "auto"));
    f.emplace_back("thin", std::string(c.thin ? std::to_string(*c.thin) : "auto"));
  }
  f.emplace_back("kill_radius", static_cast<std::int64_t>(c.kill_radius));
  f.emplace_back("max_steps", c.max_steps);
  f.emplace_back("horizon", c.horizon);
  f.emplace_back("min_n", static_cast<std::int64_t>(c.min_n));
  f.emplace_back("max_i", c.max_i ? std::to_string(*c.max_i) : std::string("auto"));
  f.emplace_back("variant", c.variant);
  f.emplace_back("k", c.k);
  f.emplace_back("slack_q", c.slack_q);
  f.emplace_back("slack_p", c.slack_p);
  f.emplace_back("q_max_i", static_cast<std::int64_t>(c.q_max_i));
  f.emplace_back("kill_radii", join(c.kill_radii));
  f.emplace_back("format", c.format);
  f.emplace_back("addition_law", std::string("uniform"));
  return f;
}

inline EstimateTable q_infinite(const RunConfig& c, int kill_radius) {
  return run_partitioned(c.samples, c.workers, c.seed, [&](std::uint64_t n, Rng& rng) {
    return estimate_q_infinite(c.dim, kill_radius, c.max_steps, n, rng);
  });
}

inline void add_walk_diagnostics(Fields& diag, const EstimateTable& q) {
  const auto& d = q.diagnostics();
  auto get = [&](const char* key) {
    auto it = d.find(key);
    return it == d.end() ? std::uint64_t{0} : it->second;
  };
  const auto walks = get("walks");
  diag.emplace_back("walks", walks);
  diag.emplace_back("escaped_walks", get("escaped_walks"));
  diag.emplace_back("capped_walks", get("capped_walks"));
  diag.emplace_back("truncated_samples", get("truncated_samples"));
  const double w = walks == 0 ? 1.0 : static_cast<double>(walks);
  diag.emplace_back("escaped_fraction", static_cast<double>(get("escaped_walks")) / w);
  diag.emplace_back("capped_fraction", static_cast<double>(get("capped_walks")) / w);
}

inline void add_moment_diagnostics(Fields& diag, const EstimateTable& q) {
  const auto [m1, s1] = raw_moment(q, 1);
  const auto [m3, s3] = raw_moment(q, 3);
  diag.emplace_back("mean_degree", m1);
  diag.emplace_back("mean_degree_stderr", s1);
  diag.emplace_back("third_moment", m3);
  diag.emplace_back("third_moment_stderr", s3);
}

inline Fields verdict_fields(const std::string& prefix, const ComparisonVerdict& v) {
  return {{prefix + "pass", v.pass},
          {prefix + "worst_label", v.worst_label},
          {prefix + "worst_z", v.worst_z},
          {prefix + "k", v.k},
          {prefix + "slack", v.slack}};
}

inline Series head(const Series& s, std::size_t n) {
  n = std::min(n, s.size());
  return {std::vector<std::int64_t>(s.labels.begin(), s.labels.begin() + static_cast<long>(n)),
          std::vector<double>(s.values.begin(), s.values.begin() + static_cast<long>(n)),
          std::vector<double>(s.stderrs.begin(), s.stderrs.begin() + static_cast<long>(n)),
          s.total};
}

}  // namespace detail

/// Runs one subcommand and returns its report. Throws UsageError for bad
/// flag combinations and other exceptions for runtime failures.
inline Report run_command(const RunConfig& c) {
  validate(c);
  using detail::config_fields;
  const auto started = std::chrono::steady_clock::now();
  Report r;

  if (c.command == "formula") {
    const int max_i = c.max_i.value_or(2 * c.dim - 1);
    const auto variant =
        c.variant == "exact" ? FormulaVariant::thm1_exact_sum : FormulaVariant::thm1_leading;
    const auto table = formula_table(c.dim, max_i, variant);
    r.config = config_fields(c, std::nullopt);
    r.tables.push_back(table_rows(to_string(variant), table));
    r.diagnostics.emplace_back("plateau_from", static_cast<std::int64_t>(isqrt(c.dim)));
    r.diagnostics.emplace_back("error_order_part_i", std::string("O(i/d^2)"));
    r.diagnostics.emplace_back("error_order_part_ii", std::string("O(d^-3/2)"));
  } else if (c.command == "bethe") {
    if (c.dim < 2) throw UsageError("bethe needs --dim >= 2");
    const int max_i = c.max_i.value_or(c.dim);
    r.config = config_fields(c, std::nullopt);
    r.tables.push_back(table_rows("bethe", bethe_table(c.dim, max_i)));
    r.diagnostics.emplace_back("total_0_to_d_minus_1", bethe_total(c.dim, 0, c.dim - 1));
    r.diagnostics.emplace_back("total_0_to_d", bethe_total(c.dim, 0, c.dim));
  } else if (c.command == "simulate-box") {
    const auto box = make_box(c.dim, c.radius);
    const auto sched = detail::resolve_schedule(c, box);
    auto heights = run_partitioned(c.samples, c.workers, c.seed, [&](std::uint64_t n, Rng& rng) {
      auto t = EstimateTable::with_range(box.degree(), finite_params(box));
      t.add_counts(sample_heights(box, ChainSchedule{sched.burn_in, sched.thin, n}, rng));
      return t;
    });
    r.config = config_fields(c, sched);
    r.tables.push_back(table_rows("height", heights));
  } else if (c.command == "ust-box") {
    const auto box = make_box(c.dim, c.radius);
    auto q = run_partitioned(c.samples, c.workers, c.seed, [&](std::uint64_t n, Rng& rng) {
      return estimate_q_finite(box, n, rng);
    });
    r.config = config_fields(c, std::nullopt);
    r.tables.push_back(table_rows("q", q));
    r.tables.push_back(table_rows("p_from_q", p_from_q_estimate(q, c.dim)));
    detail::add_moment_diagnostics(r.diagnostics, q);
  } else if (c.command == "estimate-qd") {
    if (c.dim < 3) throw UsageError("estimate-qd needs --dim >= 3");
    const auto q = detail::q_infinite(c, c.kill_radius);
    r.config = config_fields(c, std::nullopt);
    r.tables.push_back(table_rows("q", q));
    r.tables.push_back(table_rows("p_from_q", p_from_q_estimate(q, c.dim)));
    detail::add_walk_diagnostics(r.diagnostics, q);
    detail::add_moment_diagnostics(r.diagnostics, q);
  } else if (c.command == "rw-return") {
    auto t = run_partitioned(c.samples, c.workers, c.seed, [&](std::uint64_t n, Rng& rng) {
      const auto p = estimate_return(c.dim, c.min_n, c.horizon, n, rng);
      EstimateTable table({0, 1}, {{"dim", std::to_string(c.dim)},
                                   {"min_n", std::to_string(c.min_n)},
                                   {"horizon", std::to_string(c.horizon)}});
      table.add(1, p.successes);
      table.add(0, p.trials - p.successes);
      return table;
    });
    r.config = config_fields(c, std::nullopt);
    // label 1 = returned, label 0 = no return within the horizon
    r.tables.push_back(table_rows("return", t));
    const double p = t.proportion(1);
    const double scale = c.min_n == 2 ? 2.0 * c.dim : static_cast<double>(c.dim) * c.dim;
    r.diagnostics.emplace_back("horizon", c.horizon);
    r.diagnostics.emplace_back("scaled_estimate", p * scale);
    r.diagnostics.emplace_back("scaled_stderr", t.standard_error(1) * scale);
    r.diagnostics.emplace_back("scale", std::string(c.min_n == 2 ? "2d" : "d^2"));
    r.diagnostics.emplace_back("fourier_bound_n_eq_d",
                               fourier_bound(c.dim, static_cast<std::uint64_t>(c.dim)));
  } else if (c.command == "compare") {
    if (c.dim < 3) throw UsageError("compare needs --dim >= 3");
    const auto q = detail::q_infinite(c, c.kill_radius);
    const auto qs = q.series();
    const auto p_hat = p_from_q_estimate(q, c.dim);
    const int q_top = std::min(c.q_max_i, 2 * c.dim - 1);
    const int p_top = std::min(c.max_i.value_or(8), 2 * c.dim - 1);
    std::vector<double> poisson;
    for (int i = 0; i <= q_top; ++i) poisson.push_back(poisson_weight(i));
    std::vector<double> formula;
    for (int i = 0; i <= p_top; ++i) formula.push_back(formula_p(c.dim, i));
    const auto vq = compare(detail::head(qs, poisson.size()), poisson, c.k, c.slack_q);
    const auto vp = compare(detail::head(p_hat, formula.size()), formula, c.k, c.slack_p);
    r.config = config_fields(c, std::nullopt);
    r.tables.push_back(table_rows("q", q));
    r.tables.push_back(table_rows("p_from_q", p_hat));
    r.tables.push_back(table_rows("poisson", Series{detail::head(qs, poisson.size()).labels,
                                                    poisson,
                                                    std::vector<double>(poisson.size(), 0.0),
                                                    0}));
    r.tables.push_back(table_rows("formula_p", formula_table(c.dim, p_top)));
    detail::add_walk_diagnostics(r.diagnostics, q);
    detail::add_moment_diagnostics(r.diagnostics, q);
    Fields v = detail::verdict_fields("q_", vq);
    for (auto& f : detail::verdict_fields("p_", vp)) v.push_back(std::move(f));
    v.emplace_back("overall", std::string(vq.pass && vp.pass ? "PASS" : "FAIL"));
    r.verdict = std::move(v);
  } else if (c.command == "sensitivity") {
    if (c.dim < 3) throw UsageError("sensitivity needs --dim >= 3");
    auto radii = c.kill_radii;
    std::sort(radii.begin(), radii.end());
    std::vector<EstimateTable> tables;
    for (int radius : radii) tables.push_back(detail::q_infinite(c, radius));
    r.config = config_fields(c, std::nullopt);
    Fields v;
    bool all = true;
    const auto reference = tables.back().series();
    for (std::size_t j = 0; j < radii.size(); ++j) {
      const auto name = "q_R" + std::to_string(radii[j]);
      r.tables.push_back(table_rows(name, tables[j]));
      r.diagnostics.emplace_back(name + "_capped_walks",
                                 tables[j].diagnostics().at("capped_walks"));
      if (j + 1 == radii.size()) continue;
      const auto verdict = compare(tables[j].series(), reference, c.k);
      all = all && verdict.pass;
      for (auto& f : detail::verdict_fields(name + "_vs_R" + std::to_string(radii.back()) + "_",
                                            verdict)) {
        v.push_back(std::move(f));
      }
    }
    v.emplace_back("overall", std::string(all ? "PASS" : "FAIL"));
    r.verdict = std::move(v);
  }

  if (c.timing) {
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - started;
    r.diagnostics.emplace_back("wall_seconds", elapsed.count());
  }
  return r;
}

/// Where the report goes: --output if given ("-" means stdout), otherwise
/// $HDS_OUTPUT_DIR/<command>.<format> when that is set, otherwise stdout.
inline std::optional<std::filesystem::path> output_path(const RunConfig& c) {
  if (c.output == "-") return std::nullopt;
  if (!c.output.empty()) return std::filesystem::path(c.output);
  if (const char* dir = std::getenv(kOutputDirEnv); dir != nullptr && *dir != '\0') {
    return std::filesystem::path(dir) / (c.command + "." + c.format);
  }
  return std::nullopt;
}

inline void emit(const RunConfig& c, const Report& r) {
  const auto text = render(r, c.format);
  if (auto path = output_path(c)) {
    if (path->has_parent_path()) std::filesystem::create_directories(path->parent_path());
    std::ofstream out(*path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path->string() + " for writing");
    out << text;
    if (!out) throw std::runtime_error("failed writing " + path->string());
  } else {
    std::cout << text;
  }
}

}  // namespace hds

#endif  // HDS_CLI_HPP
