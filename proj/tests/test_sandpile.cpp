#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <numeric>
#include <random>

#include "hds/sandpile.hpp"
#include "support/oracles.hpp"
#include "support/properties.hpp"

namespace hds {
namespace {

HeightConfig line(const BoxLattice& box, std::vector<std::int64_t> h) {
  return HeightConfig(box, std::move(h));
}

TEST(IsStable, Threshold) {
  const auto sq = make_box(2, 1);
  EXPECT_TRUE(is_stable(HeightConfig::filled(sq, 3)));
  auto c = HeightConfig::filled(sq, 3);
  c.at(4) = 4;
  EXPECT_FALSE(is_stable(c));
  const auto l = make_box(1, 1);
  EXPECT_TRUE(is_stable(line(l, {1, 0, 1})));
}

TEST(HeightConfig, RejectsNegativeOrWrongSize) {
  const auto l = make_box(1, 1);
  EXPECT_THROW(line(l, {0, -1, 0}), std::invalid_argument);
  EXPECT_THROW(line(l, {0, 0}), std::invalid_argument);
}

TEST(Topple, Examples) {
  const auto l = make_box(1, 1);
  EXPECT_EQ(topple(line(l, {0, 2, 0}), 1), line(l, {1, 0, 1}));
  const auto boundary = topple(line(l, {2, 0, 0}), 0);
  EXPECT_EQ(boundary, line(l, {0, 1, 0}));
  EXPECT_EQ(boundary.total(), 1);  // one particle lost to the sink
  EXPECT_THROW(topple(line(l, {1, 1, 1}), 1), IllegalToppling);
}

TEST(Topple, LosesExactlySinkMultiplicity) {
  const auto box = make_box(2, 2);
  for (VertexId v = 0; v < box.interior_count(); ++v) {
    auto c = HeightConfig::filled(box, 4);
    const auto before = c.total();
    topple_in_place(c, v);
    ASSERT_EQ(before - c.total(), box.sink_multiplicity(v));
  }
}

TEST(Stabilize, StableInputUnchanged) {
  const auto box = make_box(2, 2);
  const auto c = HeightConfig::filled(box, 3);
  const auto s = stabilize(c);
  EXPECT_EQ(s.config, c);
  EXPECT_TRUE(std::all_of(s.odometer.topplings.begin(), s.odometer.topplings.end(),
                          [](auto n) { return n == 0; }));
}

TEST(Stabilize, SingleToppling) {
  const auto l = make_box(1, 1);
  const auto s = stabilize(line(l, {0, 2, 0}));
  EXPECT_EQ(s.config, line(l, {1, 0, 1}));
  EXPECT_EQ(s.odometer.topplings, (std::vector<std::uint64_t>{0, 1, 0}));
}

TEST(Stabilize, ConservesParticlesUpToSinkLosses) {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 50; ++trial) {
    const auto box = make_box(2, 3);
    std::uniform_int_distribution<std::int64_t> h(0, 12);
    std::vector<std::int64_t> heights(static_cast<std::size_t>(box.interior_count()));
    for (auto& x : heights) x = h(gen);
    const HeightConfig c(box, heights);
    const auto s = stabilize(c);
    ASSERT_TRUE(is_stable(s.config));
    std::int64_t lost = 0;
    for (VertexId v = 0; v < box.interior_count(); ++v) {
      lost += static_cast<std::int64_t>(s.odometer.topplings[static_cast<std::size_t>(v)]) *
              box.sink_multiplicity(v);
    }
    ASSERT_EQ(c.total(), s.config.total() + lost);
  }
}

TEST(Stabilize, AbelianProperty) {
  const auto result = props::abelian_order_invariance(100, 2024);
  EXPECT_EQ(result.cases, 100u);
  EXPECT_EQ(result.failures, 0u);
}

TEST(IsRecurrent, Examples) {
  for (auto [d, L] : {std::pair{1, 1}, std::pair{2, 2}, std::pair{3, 1}}) {
    const auto box = make_box(d, L);
    EXPECT_TRUE(is_recurrent(HeightConfig::maximal(box)));
    EXPECT_FALSE(is_recurrent(HeightConfig::filled(box, 0)));
  }
  const auto l = make_box(1, 1);
  EXPECT_THROW(is_recurrent(line(l, {0, 2, 0})), NotStable);
}

TEST(IsRecurrent, ExhaustiveLineBoxHasFourRecurrent) {
  const auto l = make_box(1, 1);
  std::vector<std::vector<std::int64_t>> recurrent;
  oracle::for_each_stable(l, [&](const HeightConfig& c) {
    if (is_recurrent(c)) recurrent.emplace_back(c.heights().begin(), c.heights().end());
  });
  std::sort(recurrent.begin(), recurrent.end());
  const std::vector<std::vector<std::int64_t>> expected = {
      {0, 1, 1}, {1, 0, 1}, {1, 1, 0}, {1, 1, 1}};
  EXPECT_EQ(recurrent, expected);
}

// Number of recurrent configurations equals the matrix-tree count.
TEST(IsRecurrent, CountMatchesSpanningTrees) {
  for (auto [d, L] : {std::pair{1, 1}, std::pair{1, 2}, std::pair{1, 3}, std::pair{2, 1}}) {
    const auto box = make_box(d, L);
    std::uint64_t count = 0;
    oracle::for_each_stable(box, [&](const HeightConfig& c) { count += is_recurrent(c); });
    EXPECT_EQ(count, oracle::spanning_tree_count(box)) << "d=" << d << " L=" << L;
  }
  EXPECT_EQ(oracle::spanning_tree_count(make_box(2, 1)), 100352u);
}

TEST(McStep, StaysStableAndRecurrent) {
  const auto box = make_box(2, 3);
  Rng rng(5);
  auto c = HeightConfig::maximal(box);
  for (int i = 0; i < 2000; ++i) {
    c = mc_step(c, rng);
    ASSERT_TRUE(is_stable(c));
    ASSERT_TRUE(is_recurrent(c));
  }
}

// d=1, L=1: the chain visits the four recurrent states with equal frequency.
TEST(McStep, UniformOnRecurrentStates) {
  const auto box = make_box(1, 1);
  Rng rng(77);
  SandpileChain chain(box);
  std::map<std::vector<std::int64_t>, std::uint64_t> visits;
  const std::uint64_t steps = 200000;
  for (std::uint64_t i = 0; i < steps; ++i) {
    chain.step(rng);
    const auto h = chain.state().heights();
    ++visits[std::vector<std::int64_t>(h.begin(), h.end())];
  }
  ASSERT_EQ(visits.size(), 4u);
  for (const auto& [state, n] : visits) {
    const Proportion p{n, steps};
    // steps are correlated; allow a generous band around 1/4
    EXPECT_NEAR(p.value(), 0.25, 0.01);
  }
}

TEST(SampleHeights, CountsSumToN) {
  Rng rng(1);
  const auto counts = sample_heights(2, 2, 100, 3, 777, rng);
  ASSERT_EQ(counts.size(), 4u);
  EXPECT_EQ(std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}), 777u);
  EXPECT_THROW(sample_heights(2, 2, 0, 0, 10, rng), std::invalid_argument);
  EXPECT_THROW(sample_heights(0, 2, 0, 1, 10, rng), std::invalid_argument);
}

TEST(SampleHeights, LineBoxOriginEmptyQuarterOfTheTime) {
  Rng rng(99);
  const auto box = make_box(1, 1);
  const std::uint64_t n = 100000;
  const auto counts = sample_heights(box, ChainSchedule::defaults(box, n), rng);
  const Proportion p0{counts[0], n};
  EXPECT_LT(std::abs(p0.value() - 0.25), 3 * p0.standard_error());
}

TEST(SampleHeights, SquareBoxOrdering) {
  Rng rng(4);
  const auto box = make_box(2, 8);
  const auto counts = sample_heights(box, ChainSchedule::defaults(box, 20000), rng);
  EXPECT_LT(counts[0], counts[1]);
  EXPECT_LT(counts[1], counts[2]);
}

}  // namespace
}  // namespace hds
