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

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "appwatch/dates.hpp"
#include "appwatch/error.hpp"
#include "appwatch/model.hpp"

namespace appwatch {

/// Linear-interpolation percentile (q in [0,100]) of an unsorted sample,
/// positioned at 1 + (n-1) q/100 on the sorted values.
inline double percentile(std::vector<double> values, double q) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const double pos = (double(values.size()) - 1.0) * q / 100.0;
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (values[hi] - values[lo]) * (pos - double(lo));
}

struct FacilitySeasonCount {
  std::string facility_id;
  int season_year = 0;
  std::size_t count = 0;
  bool flagged = false;
};

struct EventCountTable {
  std::vector<FacilitySeasonCount> rows;
  double mean = 0.0;
  double percentile_rank = 90.0;
  double threshold = 0.0;  // count at the percentile rank
  std::size_t total = 0;
};

/// Events per facility-season, counted by the season each event starts in.
/// `partitions` lists the monitored facility-seasons so that quiet ones
/// appear with a zero count. Rows at or above the percentile are flagged;
/// a zero count is never flagged.
inline EventCountTable events_per_facility_season(const std::vector<ApplicationEvent>& events,
                                                  const std::vector<PartitionKey>& partitions,
                                                  double percentile_rank = 90.0) {
  std::map<PartitionKey, std::size_t> counts;
  for (const auto& p : partitions) counts[p];
  for (const auto& e : events) ++counts[PartitionKey{e.facility_id, e.season.season_year}];
  EventCountTable out;
  out.percentile_rank = percentile_rank;
  std::vector<double> values;
  for (const auto& [key, n] : counts) {
    out.rows.push_back(FacilitySeasonCount{key.facility_id, key.season_year, n, false});
    values.push_back(double(n));
    out.total += n;
  }
  if (!values.empty()) out.mean = double(out.total) / double(values.size());
  out.threshold = percentile(values, percentile_rank);
  for (auto& row : out.rows) row.flagged = row.count > 0 && double(row.count) >= out.threshold;
  return out;
}

/// Days from each event's end to the next event's start within one
/// facility-season, floored at zero. Events are ordered by start date.
inline std::vector<long> inter_event_gaps(std::vector<ApplicationEvent> events) {
  std::sort(events.begin(), events.end(), [](const auto& a, const auto& b) {
    return std::tie(a.start_date, a.end_date, a.event_id) <
           std::tie(b.start_date, b.end_date, b.event_id);
  });
  std::vector<long> gaps;
  for (std::size_t i = 1; i < events.size(); ++i) {
    gaps.push_back(std::max(0L, days_between(events[i - 1].end_date, events[i].start_date)));
  }
  return gaps;
}

/// Gaps pooled over every facility-season present in `events`.
inline std::vector<long> pooled_gaps(const std::vector<ApplicationEvent>& events) {
  std::map<PartitionKey, std::vector<ApplicationEvent>> groups;
  for (const auto& e : events) groups[PartitionKey{e.facility_id, e.season.season_year}].push_back(e);
  std::vector<long> out;
  for (auto& [key, group] : groups) {
    auto g = inter_event_gaps(std::move(group));
    out.insert(out.end(), g.begin(), g.end());
  }
  return out;
}

/// Empirical CDF: F(x) = fraction of samples <= x.
class Ecdf {
 public:
  explicit Ecdf(std::vector<double> samples) : sorted_(std::move(samples)) {
    std::sort(sorted_.begin(), sorted_.end());
  }

  template <typename Int>
  static Ecdf of(const std::vector<Int>& samples) {
    return Ecdf(std::vector<double>(samples.begin(), samples.end()));
  }

  std::size_t size() const { return sorted_.size(); }

  double operator()(double x) const {
    if (sorted_.empty()) return 0.0;
    const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), x);
    return double(it - sorted_.begin()) / double(sorted_.size());
  }

  /// Step locations (distinct sample values) with F at each.
  std::vector<std::pair<double, double>> steps() const {
    std::vector<std::pair<double, double>> out;
    for (std::size_t i = 0; i < sorted_.size(); ++i) {
      if (i + 1 < sorted_.size() && sorted_[i + 1] == sorted_[i]) continue;
      out.emplace_back(sorted_[i], double(i + 1) / double(sorted_.size()));
    }
    return out;
  }

 private:
  std::vector<double> sorted_;
};

/// Fraction of the window's days covered by at least one event, counting
/// each event's [start_date, end_date] inclusively.
inline double season_coverage(const std::vector<ApplicationEvent>& events, const SeasonWindow& window) {
  const long days = window.length_days();
  if (days <= 0) return 0.0;
  std::vector<std::pair<long, long>> spans;
  for (const auto& e : events) {
    long a = std::max(0L, days_between(window.start_date, e.start_date));
    long b = std::min(days - 1, days_between(window.start_date, e.end_date));
    if (a <= b) spans.emplace_back(a, b);
  }
  std::sort(spans.begin(), spans.end());
  long covered = 0;
  long cur_a = -1, cur_b = -2;
  for (const auto& [a, b] : spans) {
    if (a > cur_b + 1) {
      covered += cur_b - cur_a + 1;
      cur_a = a;
      cur_b = b;
    } else {
      cur_b = std::max(cur_b, b);
    }
  }
  covered += cur_b - cur_a + 1;
  return double(covered) / double(days);
}

/// Event starts per week of season (week 1 begins on the season's first
/// day), summed across every season in `events`. The result has one entry
/// per week of the longest season seen, plus any later week an event fell in.
inline std::vector<std::size_t> weekly_series(const std::vector<ApplicationEvent>& events,
                                              const std::vector<SeasonWindow>& seasons = {}) {
  long weeks = 0;
  for (const auto& s : seasons) weeks = std::max(weeks, (s.length_days() + 6) / 7);
  for (const auto& e : events) weeks = std::max(weeks, (e.season.length_days() + 6) / 7);
  std::vector<std::size_t> out(static_cast<std::size_t>(weeks), 0);
  for (const auto& e : events) {
    const long offset = days_between(e.season.start_date, e.start_date);
    if (offset < 0) continue;
    const auto week = static_cast<std::size_t>(offset / 7);
    if (week >= out.size()) out.resize(week + 1, 0);
    ++out[week];
  }
  return out;
}

struct YoyFlag {
  std::string facility_id;
  int latest_season = 0;
  std::size_t latest_count = 0;
  double prior_mean = 0.0;
  double ratio = 0.0;  // +infinity when the prior mean is zero
  bool flagged = false;
};

/// Compares each facility's latest season against the mean of its earlier
/// seasons. Facilities with fewer than two seasons are skipped.
inline std::vector<YoyFlag> yoy_outliers(const std::vector<FacilitySeasonCount>& counts,
                                         double ratio_threshold = 1.5) {
  std::map<std::string, std::map<int, std::size_t>> by_facility;
  for (const auto& c : counts) by_facility[c.facility_id][c.season_year] += c.count;
  std::vector<YoyFlag> out;
  for (const auto& [facility, seasons] : by_facility) {
    if (seasons.size() < 2) continue;
    YoyFlag f;
    f.facility_id = facility;
    f.latest_season = seasons.rbegin()->first;
    f.latest_count = seasons.rbegin()->second;
    double sum = 0.0;
    for (auto it = seasons.begin(); it != std::prev(seasons.end()); ++it) sum += double(it->second);
    f.prior_mean = sum / double(seasons.size() - 1);
    if (f.prior_mean > 0.0) {
      f.ratio = double(f.latest_count) / f.prior_mean;
    } else {
      f.ratio = f.latest_count > 0 ? std::numeric_limits<double>::infinity() : 0.0;
    }
    f.flagged = double(f.latest_count) > ratio_threshold * f.prior_mean;
    out.push_back(f);
  }
  return out;
}

}  // namespace appwatch
