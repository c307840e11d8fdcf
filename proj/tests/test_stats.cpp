#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "hds/experiment.hpp"
#include "hds/rng.hpp"
#include "hds/spanning.hpp"
#include "hds/stats.hpp"
#include "support/properties.hpp"

namespace hds {
namespace {

TEST(SplitMix64, ReferenceOutputs) {
  std::uint64_t state = 1234567;
  EXPECT_EQ(splitmix64(state), 6457827717110365317ULL);
  EXPECT_EQ(splitmix64(state), 3203168211198807973ULL);
  EXPECT_EQ(splitmix64(state), 9817491932198370423ULL);
}

// Straight transcription of the published xoshiro256** step.
TEST(Rng, MatchesReferenceStep) {
  std::uint64_t sm = 99;
  std::uint64_t s[4];
  for (auto& w : s) w = splitmix64(sm);
  auto rotl = [](std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); };
  Rng rng(99);
  for (int n = 0; n < 1000; ++n) {
    const std::uint64_t expected = rotl(s[1] * 5, 7) * 9;
    const std::uint64_t t = s[1] << 17;
    s[2] ^= s[0];
    s[3] ^= s[1];
    s[1] ^= s[2];
    s[0] ^= s[3];
    s[2] ^= t;
    s[3] = rotl(s[3], 45);
    ASSERT_EQ(rng(), expected);
  }
}

TEST(Rng, StreamsDifferAndRepeat) {
  auto a = Rng::stream(7, 0);
  auto b = Rng::stream(7, 1);
  auto c = Rng::stream(7, 0);
  const auto x = a();
  EXPECT_NE(x, b());
  EXPECT_EQ(x, c());
}

TEST(UniformBelow, RangeAndBalance) {
  Rng rng(3);
  std::vector<std::uint64_t> counts(6, 0);
  for (int k = 0; k < 60000; ++k) {
    const auto x = uniform_below(rng, 6);
    ASSERT_LT(x, 6u);
    ++counts[x];
  }
  const auto chi = chi_square_uniform(counts);
  EXPECT_LT(chi.statistic, chi_square_critical_001(chi.df));
}

TEST(Proportion, StandardError) {
  const Proportion p{25, 100};
  EXPECT_DOUBLE_EQ(p.value(), 0.25);
  EXPECT_DOUBLE_EQ(p.standard_error(), std::sqrt(0.25 * 0.75 / 100));
  EXPECT_EQ((Proportion{0, 0}).value(), 0.0);
}

// Doubling every count shrinks the stderr by 1/sqrt(2).
TEST(Proportion, StandardErrorScaling) {
  auto t = EstimateTable::with_range(3);
  t.add_counts(std::vector<std::uint64_t>{13, 40, 47});
  auto doubled = t;
  doubled.add_counts(t.counts());
  for (std::size_t i = 0; i < 3; ++i) {
    const double ratio = doubled.standard_error(i) / t.standard_error(i);
    EXPECT_GE(ratio, 0.70);
    EXPECT_LE(ratio, 0.72);
  }
}

TEST(EstimateTable, Accounting) {
  auto t = EstimateTable::with_range(4, {{"dim", "2"}});
  t.add_counts(std::vector<std::uint64_t>{1, 2, 3, 4});
  t.add(0, 10);
  EXPECT_EQ(t.total(), 20u);
  double sum = 0;
  for (std::size_t i = 0; i < 4; ++i) sum += t.proportion(i);
  EXPECT_NEAR(sum, 1.0, 1e-15);
  EXPECT_THROW(t.add(4), std::out_of_range);
  EXPECT_THROW(t.add_counts(std::vector<std::uint64_t>{1}), std::invalid_argument);
}

TEST(Merge, Identity) {
  auto x = EstimateTable::with_range(2, {{"dim", "1"}});
  x.add(1, 5);
  EXPECT_EQ(merge(x, EstimateTable{}), x);
  EXPECT_EQ(merge(EstimateTable{}, x), x);
}

TEST(Merge, IncompatibleTables) {
  const auto a = EstimateTable::with_range(2, {{"dim", "1"}});
  const auto b = EstimateTable::with_range(2, {{"dim", "2"}});
  const auto c = EstimateTable::with_range(3, {{"dim", "1"}});
  EXPECT_THROW(merge(a, b), IncompatibleTables);
  EXPECT_THROW(merge(a, c), IncompatibleTables);
}

TEST(Merge, Laws) {
  const auto out = props::merge_laws(500, 17);
  EXPECT_TRUE(out.ok()) << out.failures;
}

TEST(RunPartitioned, SharesAndStreams) {
  EXPECT_EQ(worker_share(10, 3, 0), 4u);
  EXPECT_EQ(worker_share(10, 3, 2), 3u);
  const auto t = run_partitioned(1000, 4, 5, [](std::uint64_t n, Rng& rng) {
    return estimate_q_finite(1, 1, n, rng);
  });
  EXPECT_EQ(t.total(), 1000u);
  EXPECT_EQ(t.streams().size(), 4u);
}

TEST(RunPartitioned, RethrowsWorkerErrors) {
  EXPECT_THROW(run_partitioned(10, 2, 1,
                               [](std::uint64_t, Rng&) -> EstimateTable {
                                 throw std::runtime_error("boom");
                               }),
               std::runtime_error);
}

TEST(RawMoment, PoissonLikeTable) {
  auto t = EstimateTable::with_range(3);
  t.add_counts(std::vector<std::uint64_t>{2, 1, 1});
  const auto [m3, se] = raw_moment(t, 3);
  EXPECT_DOUBLE_EQ(m3, (0 + 1 + 8) / 4.0);
  const double m6 = (0 + 1 + 64) / 4.0;
  EXPECT_DOUBLE_EQ(se, std::sqrt((m6 - m3 * m3) / 4));
}

Series exact_series(std::vector<double> values, std::vector<double> se, std::uint64_t total) {
  Series s;
  for (std::size_t i = 0; i < values.size(); ++i) s.labels.push_back(static_cast<std::int64_t>(i));
  s.values = std::move(values);
  s.stderrs = std::move(se);
  s.total = total;
  return s;
}

TEST(Compare, ExactMatchPasses) {
  const auto s = exact_series({0.2, 0.8}, {0.01, 0.01}, 1000);
  const std::vector<double> ref = {0.2, 0.8};
  const auto v = compare(s, ref, 3);
  EXPECT_TRUE(v.pass);
  EXPECT_EQ(v.z, (std::vector<double>{0, 0}));
}

TEST(Compare, TenSigmaFails) {
  const auto s = exact_series({0.2, 0.5, 0.3}, {0.01, 0.01, 0.01}, 1000);
  const std::vector<double> ref = {0.2, 0.4, 0.3};
  const auto v = compare(s, ref, 3);
  EXPECT_FALSE(v.pass);
  EXPECT_EQ(v.worst_label, 1);
  EXPECT_NEAR(v.worst_z, 10, 1e-9);
}

TEST(Compare, ZeroCountCellsUseFloor) {
  auto t = EstimateTable::with_range(2);
  t.add(0, 100);
  const std::vector<double> ref = {0.99, 0.01};
  const auto v = compare(t, ref, 3);
  EXPECT_TRUE(std::isfinite(v.worst_z));
  EXPECT_NEAR(v.z[1], 1.0, 1e-12);  // 0.01 / (1/100)
}

TEST(Compare, SlackAndErrors) {
  const auto s = exact_series({0.2}, {0.001}, 1000000);
  const std::vector<double> ref = {0.21};
  EXPECT_FALSE(compare(s, ref, 3).pass);
  EXPECT_TRUE(compare(s, ref, 3, 0.01).pass);
  EXPECT_THROW(compare(s, ref, 0), std::invalid_argument);
  const std::vector<double> two = {0.1, 0.2};
  EXPECT_THROW(compare(s, two, 3), IncompatibleTables);
}

TEST(Compare, LineBoxQEstimate) {
  Rng rng(21);
  const auto q = estimate_q_finite(1, 1, 100000, rng);
  const std::vector<double> ref = {0.5, 0.5};
  EXPECT_TRUE(compare(q, ref, 4).pass);
}

TEST(Compare, TwoSample) {
  const auto a = exact_series({0.5}, {0.03}, 1000);
  const auto b = exact_series({0.6}, {0.04}, 1000);
  const auto v = compare(a, b, 3);
  EXPECT_NEAR(v.z[0], 2.0, 1e-9);
  EXPECT_TRUE(v.pass);
}

TEST(ChiSquare, Examples) {
  const auto flat = chi_square_uniform(std::vector<std::uint64_t>{10, 10, 10});
  EXPECT_EQ(flat.statistic, 0.0);
  EXPECT_EQ(flat.df, 2u);
  const auto hand = chi_square_uniform(std::vector<std::uint64_t>{30, 20, 25, 25});
  EXPECT_DOUBLE_EQ(hand.statistic, 2.0);
  EXPECT_EQ(hand.df, 3u);
  const auto permuted = chi_square_uniform(std::vector<std::uint64_t>{25, 30, 25, 20});
  EXPECT_DOUBLE_EQ(permuted.statistic, hand.statistic);
}

TEST(ChiSquare, Weighted) {
  const std::vector<std::uint64_t> counts = {50, 30, 20};
  const std::vector<double> weights = {2, 1, 1};
  const auto chi = chi_square_gof(counts, weights);
  // expected 50, 25, 25
  EXPECT_DOUBLE_EQ(chi.statistic, 0 + 1.0 + 1.0);
  EXPECT_EQ(chi.df, 2u);
  EXPECT_THROW(chi_square_gof(counts, std::vector<double>{1, 1}), std::invalid_argument);
  EXPECT_THROW(chi_square_gof(counts, std::vector<double>{1, 1, 0}), TooFewSamples);
}

TEST(ChiSquare, TooFewSamples) {
  EXPECT_THROW(chi_square_uniform(std::vector<std::uint64_t>{4, 4}), TooFewSamples);
  EXPECT_THROW(chi_square_uniform(std::vector<std::uint64_t>{100}), TooFewSamples);
}

TEST(ChiSquare, CriticalValues) {
  EXPECT_NEAR(chi_square_critical_001(1), 6.634897, 1e-6);
  EXPECT_NEAR(chi_square_critical_001(3), 11.344867, 1e-6);
  EXPECT_NEAR(chi_square_critical_001(33), 54.775540, 1e-5);
  EXPECT_NEAR(chi_square_critical_001(100), 135.806723, 1e-5);
  EXPECT_NEAR(chi_square_critical_001(100351), 101396.139, 1e-3);
  EXPECT_NEAR(chi_square_critical(2, 0.05), 5.991465, 1e-5);
  EXPECT_THROW(chi_square_critical_001(0), std::invalid_argument);
}

}  // namespace
}  // namespace hds
