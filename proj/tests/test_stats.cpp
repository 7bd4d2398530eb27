#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "lemur/error.hpp"
#include "lemur/stats.hpp"
#include "oracles.hpp"

namespace lemur::stats {
namespace {

ResultRow row(std::string nn, int epoch, double acc, std::int64_t dur = 10) {
  ResultRow r;
  r.task = "t";
  r.dataset = "d";
  r.metric = "acc";
  r.nn = std::move(nn);
  r.epoch = epoch;
  r.accuracy = acc;
  r.duration = dur;
  return r;
}

std::vector<SeriesPoint> series(std::initializer_list<double> values) {
  std::vector<SeriesPoint> s;
  int e = 1;
  for (double v : values) s.push_back({e++, v});
  return s;
}

std::vector<double> values(const std::vector<SeriesPoint>& s) {
  std::vector<double> out;
  for (const auto& p : s) out.push_back(p.value);
  return out;
}

TEST(Aggregate, Examples) {
  const std::vector<ResultRow> rows{row("A", 1, 0.4, 10), row("A", 1, 0.6, 30), row("B", 1, 0.7)};
  const auto agg = aggregate(rows);
  ASSERT_EQ(agg.size(), 2u);
  EXPECT_EQ(agg[0].key.nn, "A");
  EXPECT_EQ(agg[0].n, 2u);
  EXPECT_NEAR(agg[0].mean, 0.5, 1e-15);
  EXPECT_NEAR(agg[0].std, std::sqrt(0.02), 1e-15);
  EXPECT_EQ(agg[0].mean_duration_ns, 20.0);
  EXPECT_EQ(agg[1].mean, 0.7);
  EXPECT_EQ(agg[1].std, 0.0);
  EXPECT_TRUE(aggregate(std::vector<ResultRow>{}).empty());
}

TEST(AggregateProperty, MatchesTwoPassOracleAndIgnoresOrder) {
  Rng rng(201);
  for (int i = 0; i < 200; ++i) {
    auto rows = oracle::random_rows(rng, static_cast<std::size_t>(rng.uniform_int(1, 60)));
    const auto expected = oracle::two_pass_aggregate(rows);
    const auto agg = aggregate(rows);
    ASSERT_EQ(agg.size(), expected.size());
    for (const AggRow& a : agg) {
      const auto& e = expected.at(a.key);
      EXPECT_EQ(a.n, e.n);
      EXPECT_NEAR(a.mean, e.mean, 1e-12);
      EXPECT_NEAR(a.std, e.std, 1e-12);
      EXPECT_NEAR(a.mean_duration_ns / 1e9, e.mean_duration / 1e9, 1e-12);
      EXPECT_GE(a.std, 0.0);
    }
    EXPECT_TRUE(std::is_sorted(agg.begin(), agg.end(), [](const AggRow& x, const AggRow& y) { return x.key < y.key; }));
    std::reverse(rows.begin(), rows.end());
    const auto again = aggregate(rows);
    for (std::size_t k = 0; k < agg.size(); ++k) {
      EXPECT_EQ(again[k].key, agg[k].key);
      EXPECT_NEAR(again[k].mean, agg[k].mean, 1e-12);
    }
  }
}

TEST(RollingMean, Examples) {
  EXPECT_EQ(values(rolling_mean(series({1, 2, 3, 4}), 2)), (std::vector<double>{1, 1.5, 2.5, 3.5}));
  EXPECT_EQ(values(rolling_mean(series({0.3, 0.3, 0.3}), 5)), (std::vector<double>{0.3, 0.3, 0.3}));
  const auto s = series({0.1, 0.9, 0.4});
  EXPECT_EQ(rolling_mean(s, 1), s);
  EXPECT_EQ(rolling_mean(s)[2].epoch, 3);
}

TEST(RollingMeanProperty, OracleAndWindowBounds) {
  Rng rng(202);
  for (int i = 0; i < 200; ++i) {
    std::vector<SeriesPoint> s;
    std::vector<double> raw;
    for (int e = 1, n = static_cast<int>(rng.uniform_int(1, 50)); e <= n; ++e) {
      raw.push_back(rng.uniform(-1, 1));
      s.push_back({e, raw.back()});
    }
    const int window = static_cast<int>(rng.uniform_int(1, 8));
    const auto out = rolling_mean(s, window);
    const auto expected = oracle::direct_rolling(raw, window);
    ASSERT_EQ(out.size(), s.size());
    for (std::size_t k = 0; k < out.size(); ++k) {
      EXPECT_EQ(out[k].epoch, s[k].epoch);
      EXPECT_NEAR(out[k].value, expected[k], 1e-12);
      const std::size_t start = k + 1 >= static_cast<std::size_t>(window) ? k + 1 - window : 0;
      const auto [lo, hi] = std::minmax_element(raw.begin() + static_cast<std::ptrdiff_t>(start),
                                                raw.begin() + static_cast<std::ptrdiff_t>(k) + 1);
      EXPECT_GE(out[k].value, *lo - 1e-15);
      EXPECT_LE(out[k].value, *hi + 1e-15);
    }
  }
}

TEST(Pearson, Examples) {
  const std::vector<NamedColumn> cols{{"x", {1, 2, 3, 4}}, {"neg", {-1, -2, -3, -4}}, {"flat", {5, 5, 5, 5}}};
  const CorrMatrix m = pearson_matrix(cols);
  EXPECT_EQ(m.names, (std::vector<std::string>{"x", "neg", "flat"}));
  EXPECT_NEAR(*m.r[0][0], 1.0, 1e-15);
  EXPECT_NEAR(*m.r[0][1], -1.0, 1e-15);
  EXPECT_FALSE(m.r[0][2].has_value());
  EXPECT_FALSE(m.r[2][1].has_value());
  const std::vector<NamedColumn> ragged{{"a", {1, 2}}, {"b", {1, 2, 3}}};
  EXPECT_THROW(pearson_matrix(ragged), LengthMismatch);
  const std::vector<NamedColumn> single{{"a", {1}}, {"b", {1}}};
  EXPECT_THROW(pearson_matrix(single), EmptyInput);
}

TEST(PearsonProperty, MatchesTwoPassOracle) {
  Rng rng(203);
  for (int i = 0; i < 200; ++i) {
    const auto n = static_cast<std::size_t>(rng.uniform_int(2, 40));
    std::vector<NamedColumn> cols;
    for (int c = 0, k = static_cast<int>(rng.uniform_int(1, 5)); c < k; ++c) {
      std::vector<double> v;
      const double offset = rng.uniform(-1e3, 1e3);
      for (std::size_t j = 0; j < n; ++j) v.push_back(offset + rng.uniform(-1, 1));
      cols.emplace_back("c" + std::to_string(c), std::move(v));
    }
    const CorrMatrix m = pearson_matrix(cols);
    for (std::size_t a = 0; a < cols.size(); ++a) {
      for (std::size_t b = 0; b < cols.size(); ++b) {
        const auto expected = oracle::two_pass_pearson(cols[a].second, cols[b].second);
        ASSERT_EQ(m.r[a][b].has_value(), expected.has_value());
        if (!expected) continue;
        EXPECT_NEAR(*m.r[a][b], *expected, 1e-12);
        EXPECT_EQ(*m.r[a][b], *m.r[b][a]);
        EXPECT_LE(std::fabs(*m.r[a][b]), 1.0);
      }
      EXPECT_EQ(*m.r[a][a], 1.0);
    }
  }
}

TEST(BestPerModel, Examples) {
  const std::vector<ResultRow> two{row("A", 1, 0.5), row("A", 2, 0.7)};
  const auto best = best_per_model(two);
  ASSERT_EQ(best.size(), 1u);
  EXPECT_EQ(best[0].accuracy, 0.7);
  const std::vector<ResultRow> distinct{row("A", 1, 0.5), row("B", 1, 0.2)};
  EXPECT_EQ(best_per_model(distinct), distinct);
  const std::vector<ResultRow> tie{row("A", 3, 0.5), row("A", 2, 0.5)};
  EXPECT_EQ(best_per_model(tie).at(0).epoch, 2);
}

TEST(Histogram, Examples) {
  const std::vector<double> v{0, 0.5, 1};
  const auto bins = histogram(v, 2);
  ASSERT_EQ(bins.size(), 2u);
  EXPECT_EQ(bins[0].count, 1u);
  EXPECT_EQ(bins[1].count, 2u);
  EXPECT_EQ(bins[0].lo, 0.0);
  EXPECT_EQ(bins[1].hi, 1.0);

  const std::vector<double> same(7, 0.3);
  const auto flat = histogram(same, 4);
  std::size_t occupied = 0, total = 0;
  for (const Bin& b : flat) {
    occupied += b.count > 0;
    total += b.count;
    EXPECT_LE(b.lo, b.hi);
  }
  EXPECT_EQ(occupied, 1u);
  EXPECT_EQ(total, 7u);
  EXPECT_THROW(histogram(std::vector<double>{}, 3), EmptyInput);
}

TEST(HistogramProperty, ConservesCount) {
  Rng rng(204);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> v;
    const auto n = rng.uniform_int(1, 300);
    for (std::int64_t k = 0; k < n; ++k) v.push_back(rng.uniform01() < 0.1 ? 1.0 : rng.uniform01());
    const int bins = static_cast<int>(rng.uniform_int(1, 30));
    const auto h = histogram(v, bins);
    ASSERT_EQ(h.size(), static_cast<std::size_t>(bins));
    std::size_t total = 0;
    for (const Bin& b : h) total += b.count;
    EXPECT_EQ(total, static_cast<std::size_t>(n));
  }
}

TEST(Units, NanosecondsToSeconds) { EXPECT_DOUBLE_EQ(ns_to_seconds(1.5e9), 1.5); }

}  // namespace
}  // namespace lemur::stats
