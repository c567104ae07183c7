/* Copyright 2026 The AppWatch Authors.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "appwatch/analytics.hpp"

namespace appwatch {
namespace {

using std::chrono::days;

ApplicationEvent dated(const std::string& facility, int season_year, Date start, Date end,
                       int serial = 0) {
  ApplicationEvent e;
  e.event_id = facility + "-" + std::to_string(season_year) + "-" + std::to_string(serial);
  e.facility_id = facility;
  e.season = SeasonWindow::winter(season_year);
  e.start_date = start;
  e.end_date = end;
  e.kind = EventKind::kPredicted;
  return e;
}

Date ymd(int y, unsigned m, unsigned d) {
  return Date{std::chrono::year{y} / std::chrono::month{m} / std::chrono::day{d}};
}

TEST(Percentile, LinearInterpolation) {
  std::vector<double> v;
  for (int i = 1; i <= 10; ++i) v.push_back(i);
  EXPECT_NEAR(percentile(v, 90), 9.1, 1e-12);
  EXPECT_DOUBLE_EQ(percentile(v, 0), 1);
  EXPECT_DOUBLE_EQ(percentile(v, 100), 10);
  EXPECT_DOUBLE_EQ(percentile({7}, 90), 7);
  EXPECT_DOUBLE_EQ(percentile({}, 90), 0);
}

TEST(EventCounts, KnownVectorFlagsTopValue) {
  std::vector<ApplicationEvent> events;
  std::vector<PartitionKey> parts;
  for (int f = 1; f <= 10; ++f) {
    const std::string id = "F" + std::to_string(f);
    parts.push_back(PartitionKey{id, 2019});
    for (int k = 0; k < f; ++k) events.push_back(dated(id, 2019, ymd(2019, 12, 1), ymd(2019, 12, 1), k));
  }
  const auto t = events_per_facility_season(events, parts);
  EXPECT_NEAR(t.threshold, 9.1, 1e-12);
  EXPECT_EQ(t.total, 55u);
  for (const auto& row : t.rows) EXPECT_EQ(row.flagged, row.count == 10) << row.facility_id;
}

TEST(EventCounts, NoEventsNoFlags) {
  const auto t = events_per_facility_season({}, {{"A", 2019}, {"B", 2019}, {"A", 2020}});
  ASSERT_EQ(t.rows.size(), 3u);
  for (const auto& row : t.rows) {
    EXPECT_EQ(row.count, 0u);
    EXPECT_FALSE(row.flagged);
  }
  EXPECT_EQ(t.mean, 0.0);
}

TEST(EventCounts, HeavyFacilityFlaggedEverySeason) {
  // 31 facilities over three winters; one applies 15, 42 and 16 times while
  // the fleet averages 5 events per facility-season.
  std::vector<ApplicationEvent> events;
  std::vector<PartitionKey> parts;
  auto add = [&](const std::string& id, int year, std::size_t n) {
    parts.push_back(PartitionKey{id, year});
    for (std::size_t k = 0; k < n; ++k) {
      events.push_back(dated(id, year, ymd(year, 12, 1), ymd(year, 12, 2), int(k)));
    }
  };
  add("HEAVY", 2018, 15);
  add("HEAVY", 2019, 42);
  add("HEAVY", 2020, 16);
  int row = 0;
  for (int f = 0; f < 30; ++f) {
    for (int y = 2018; y <= 2020; ++y, ++row) {
      add("F" + std::to_string(f), y, row < 45 ? 1 : (row < 58 ? 7 : 8));
    }
  }
  const auto t = events_per_facility_season(events, parts);
  EXPECT_DOUBLE_EQ(t.mean, 5.0);
  EXPECT_EQ(t.total, events.size());
  std::size_t heavy_flags = 0;
  for (const auto& r : t.rows) heavy_flags += r.facility_id == "HEAVY" && r.flagged;
  EXPECT_EQ(heavy_flags, 3u);
}

TEST(Gaps, Examples) {
  const auto a = dated("F", 2019, ymd(2019, 12, 20), ymd(2020, 1, 1), 1);
  const auto b = dated("F", 2019, ymd(2020, 1, 8), ymd(2020, 1, 9), 2);
  const auto c = dated("F", 2019, ymd(2020, 1, 9), ymd(2020, 1, 10), 3);
  EXPECT_EQ(inter_event_gaps({b, a}), (std::vector<long>{7}));
  EXPECT_EQ(inter_event_gaps({a, b, c}), (std::vector<long>{7, 0}));
  // Overlapping events floor at zero.
  const auto d = dated("F", 2019, ymd(2019, 12, 25), ymd(2019, 12, 28), 4);
  EXPECT_EQ(inter_event_gaps({a, d}), (std::vector<long>{0}));
  EXPECT_TRUE(inter_event_gaps({a}).empty());
  EXPECT_TRUE(inter_event_gaps({}).empty());
}

TEST(Gaps, PooledEcdfMatchesPlantedShare) {
  // 100 gaps over 10 facility-seasons, 30 of them within one day.
  std::mt19937_64 rng(3);
  std::vector<long> planned;
  for (int i = 0; i < 30; ++i) planned.push_back(long(rng() % 2));
  for (int i = 0; i < 70; ++i) planned.push_back(2 + long(rng() % 5));
  std::shuffle(planned.begin(), planned.end(), rng);
  std::vector<ApplicationEvent> events;
  std::size_t g = 0;
  for (int f = 0; f < 10; ++f) {
    Date cursor = SeasonWindow::winter(2019).start_date;
    for (int k = 0; k <= 10; ++k) {
      const Date start = k == 0 ? cursor : cursor + days{planned[g++]};
      events.push_back(dated("F" + std::to_string(f), 2019, start, start + days{1}, k));
      cursor = start + days{1};
    }
  }
  const auto gaps = pooled_gaps(events);
  ASSERT_EQ(gaps.size(), 100u);
  const auto ecdf = Ecdf::of(gaps);
  EXPECT_NEAR(ecdf(1), 0.30, 0.01);
}

TEST(Ecdf, Properties) {
  std::mt19937_64 rng(1);
  std::vector<double> xs;
  for (int i = 0; i < 200; ++i) xs.push_back(double(rng() % 30));
  const Ecdf f(xs);
  double prev = 0;
  for (double x = -1; x <= 31; x += 0.5) {
    ASSERT_GE(f(x), prev);
    prev = f(x);
  }
  EXPECT_DOUBLE_EQ(f(-1), 0.0);
  EXPECT_DOUBLE_EQ(f(30), 1.0);
  const auto steps = f.steps();
  ASSERT_FALSE(steps.empty());
  EXPECT_DOUBLE_EQ(steps.back().second, 1.0);
  for (const auto& [x, v] : steps) {
    ASSERT_DOUBLE_EQ(f(x), v);  // right-continuous: value at the step includes it
  }
}

TEST(Coverage, Examples) {
  const auto w = SeasonWindow::winter(2020);
  ASSERT_EQ(w.length_days(), 120);
  EXPECT_DOUBLE_EQ(season_coverage({}, w), 0.0);
  EXPECT_DOUBLE_EQ(season_coverage({dated("F", 2020, w.start_date, w.end_date - days{1})}, w), 1.0);
  const auto a = dated("F", 2020, w.start_date, w.start_date + days{11}, 1);
  const auto b = dated("F", 2020, w.start_date + days{9}, w.start_date + days{29}, 2);
  EXPECT_DOUBLE_EQ(season_coverage({a, b}, w), 30.0 / 120.0);
}

TEST(Coverage, BoundedAndMonotone) {
  std::mt19937_64 rng(8);
  const auto w = SeasonWindow::winter(2019);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<ApplicationEvent> events;
    double prev = 0;
    for (int k = 0; k < 15; ++k) {
      const Date s = w.start_date + days{long(rng() % 130) - 5};
      events.push_back(dated("F", 2019, s, s + days{long(rng() % 10)}, k));
      const double c = season_coverage(events, w);
      ASSERT_GE(c, prev);
      ASSERT_LE(c, 1.0);
      prev = c;
    }
  }
}

TEST(Weekly, Examples) {
  const auto one = weekly_series({dated("F", 2019, ymd(2019, 11, 3), ymd(2019, 11, 4))});
  ASSERT_EQ(one.size(), 18u);  // 121 days
  EXPECT_EQ(one[0], 1u);
  for (std::size_t i = 1; i < one.size(); ++i) EXPECT_EQ(one[i], 0u);

  const auto both = weekly_series({dated("F", 2018, ymd(2018, 11, 16), ymd(2018, 11, 16), 1),
                                   dated("G", 2019, ymd(2019, 11, 17), ymd(2019, 11, 18), 2)});
  EXPECT_EQ(both[2], 2u);
  // Late-season weeks exist even when empty.
  const auto seasons = weekly_series({}, {SeasonWindow::winter(2019)});
  EXPECT_EQ(seasons.size(), 18u);
}

TEST(Weekly, SumsToEventCountAndUniformIsFlat) {
  std::mt19937_64 rng(2);
  std::vector<ApplicationEvent> events;
  const int n = 16800;
  for (int k = 0; k < n; ++k) {
    const int year = 2017 + int(rng() % 4);
    const auto w = SeasonWindow::winter(year);
    const Date s = w.start_date + days{long(rng() % 112)};  // 16 full weeks
    events.push_back(dated("F", year, s, s, k));
  }
  const auto series = weekly_series(events);
  std::size_t total = 0;
  for (auto c : series) total += c;
  EXPECT_EQ(total, std::size_t(n));
  const double expected = n / 16.0;
  const double sigma = std::sqrt(expected * (1 - 1 / 16.0));
  for (std::size_t i = 0; i < 16; ++i) EXPECT_LE(std::abs(double(series[i]) - expected), 4 * sigma);
}

TEST(Yoy, Examples) {
  auto rows = [](std::vector<std::size_t> counts) {
    std::vector<FacilitySeasonCount> out;
    for (std::size_t i = 0; i < counts.size(); ++i) {
      out.push_back(FacilitySeasonCount{"F", 2018 + int(i), counts[i], false});
    }
    return out;
  };
  auto flat = yoy_outliers(rows({4, 4, 4}));
  ASSERT_EQ(flat.size(), 1u);
  EXPECT_FALSE(flat[0].flagged);
  EXPECT_DOUBLE_EQ(flat[0].ratio, 1.0);
  auto jump = yoy_outliers(rows({4, 4, 13}));
  EXPECT_TRUE(jump[0].flagged);
  EXPECT_DOUBLE_EQ(jump[0].ratio, 3.25);
  EXPECT_EQ(jump[0].latest_season, 2020);
  auto fresh = yoy_outliers(rows({0, 0, 1}));
  EXPECT_TRUE(fresh[0].flagged);
  EXPECT_TRUE(std::isinf(fresh[0].ratio));
  EXPECT_TRUE(yoy_outliers(rows({9})).empty());
  EXPECT_FALSE(yoy_outliers(rows({4, 4, 13}), 4.0)[0].flagged);
}

TEST(EventCounts, TotalsMatchInput) {
  std::mt19937_64 rng(6);
  std::vector<ApplicationEvent> events;
  for (int k = 0; k < 500; ++k) {
    const int year = 2018 + int(rng() % 3);
    events.push_back(dated("F" + std::to_string(rng() % 20), year, SeasonWindow::winter(year).start_date,
                           SeasonWindow::winter(year).start_date, k));
  }
  const auto t = events_per_facility_season(events, {});
  EXPECT_EQ(t.total, 500u);
  std::size_t sum = 0;
  for (const auto& r : t.rows) sum += r.count;
  EXPECT_EQ(sum, 500u);
}

}  // namespace
}  // namespace appwatch
