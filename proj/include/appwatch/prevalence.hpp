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
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <boost/tokenizer.hpp>

#include "appwatch/dates.hpp"
#include "appwatch/detection_store.hpp"
#include "appwatch/error.hpp"
#include "appwatch/json_io.hpp"
#include "appwatch/model.hpp"
#include "appwatch/random.hpp"

namespace appwatch {

/// One sampling unit: a predicted event (bins 1..J) or an image with no
/// surviving detection (bin 0).
struct SampleUnit {
  std::string unit_id;
  std::string facility_id;
  int season_year = 0;
  Date start_date{};
  Date end_date{};
  double score = 0.0;
  int image_count = 1;
  std::vector<std::string> image_ids;

  friend bool operator==(const SampleUnit&, const SampleUnit&) = default;
};

/// Bin 0 holds images without predictions; bin i >= 1 holds events with
/// score in [edges[i-1], edges[i]), the last bin closed at the top.
struct Stratification {
  std::vector<double> edges{0.25, 0.5, 0.75, 1.0};
  std::vector<std::vector<SampleUnit>> bins;

  std::size_t bin_count() const { return bins.size(); }
  std::size_t bin_size(std::size_t i) const { return bins.at(i).size(); }

  std::vector<std::size_t> sizes() const {
    std::vector<std::size_t> out;
    for (const auto& b : bins) out.push_back(b.size());
    return out;
  }
};

/// Validates edges and closes them at 1.0 when the caller omitted the top.
inline std::vector<double> normalize_edges(std::vector<double> edges) {
  if (edges.empty()) fail(ErrorCode::kValidation, "at least one bin edge is required");
  if (edges.back() < 1.0) edges.push_back(1.0);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (!(edges[i] >= 0.0 && edges[i] <= 1.0)) {
      fail(ErrorCode::kValidation, "bin edges must lie in [0,1]");
    }
    if (i > 0 && !(edges[i] > edges[i - 1])) {
      fail(ErrorCode::kValidation, "bin edges must be strictly increasing");
    }
  }
  if (edges.size() < 2) fail(ErrorCode::kValidation, "need at least one confidence bin");
  return edges;
}

/// 1-based bin index of a confidence score.
inline std::size_t bin_of_score(const std::vector<double>& edges, double score) {
  if (score < edges.front()) {
    fail(ErrorCode::kContract, "event score " + std::to_string(score) +
                                   " is below the lowest bin edge; threshold detections first");
  }
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (score < edges[i]) return i;
  }
  if (score <= edges.back()) return edges.size() - 1;
  fail(ErrorCode::kContract, "event score above the top bin edge");
}

inline SampleUnit unit_of(const ApplicationEvent& e) {
  return SampleUnit{e.event_id,  e.facility_id, e.season.season_year,
                    e.start_date, e.end_date,   e.score,
                    e.length(),   e.member_image_ids};
}

inline SampleUnit unit_of(const ImageRecord& img, int season_year) {
  return SampleUnit{img.image_id, img.facility_id, season_year, img.date(), img.date(),
                    0.0,          1,               {img.image_id}};
}

/// An image together with the season it was monitored in.
struct SeasonImage {
  ImageRecord image;
  int season_year = 0;
};

/// Places every predicted event in its confidence bin and every image
/// whose prediction is negative in bin 0.
inline Stratification stratify(const std::vector<ApplicationEvent>& events,
                               const std::vector<SeasonImage>& images,
                               const std::vector<ImagePrediction>& predictions,
                               std::vector<double> edges = {0.25, 0.5, 0.75, 1.0}) {
  Stratification out;
  out.edges = normalize_edges(std::move(edges));
  out.bins.resize(out.edges.size());
  for (const auto& e : events) {
    if (e.kind != EventKind::kPredicted) {
      fail(ErrorCode::kContract, "stratify takes predicted events only");
    }
    out.bins[bin_of_score(out.edges, e.score)].push_back(unit_of(e));
  }
  std::unordered_map<std::string, const ImagePrediction*> pred_of;
  for (const auto& p : predictions) pred_of[p.image_id] = &p;
  for (const auto& si : images) {
    auto it = pred_of.find(si.image.image_id);
    if (it == pred_of.end()) {
      fail(ErrorCode::kReferential, "no image prediction for '" + si.image.image_id + "'");
    }
    if (!it->second->label) out.bins[0].push_back(unit_of(si.image, si.season_year));
  }
  for (auto& bin : out.bins) {
    std::sort(bin.begin(), bin.end(),
              [](const SampleUnit& a, const SampleUnit& b) { return a.unit_id < b.unit_id; });
    if (std::adjacent_find(bin.begin(), bin.end(), [](const auto& a, const auto& b) {
          return a.unit_id == b.unit_id;
        }) != bin.end()) {
      fail(ErrorCode::kValidation, "duplicate unit ids in stratification");
    }
  }
  return out;
}

struct SampleBatch {
  std::size_t bin = 0;
  std::vector<std::string> unit_ids;
  std::uint64_t seed = 0;
  std::size_t requested = 0;
  bool clamped = false;
};

struct SampleDraw {
  std::vector<SampleBatch> batches;
  std::vector<std::string> warnings;
};

/// Seed of bin `bin`'s generator, derived from the user seed (splitmix64).
inline std::uint64_t bin_seed(std::uint64_t seed, std::size_t bin) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (bin + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Uniform sampling without replacement inside each bin. Requests larger
/// than a bin are clamped to a census of it, with a warning.
inline SampleDraw draw_sample(const Stratification& strat,
                              const std::vector<std::size_t>& sizes, std::uint64_t seed) {
  if (sizes.size() != strat.bin_count()) {
    fail(ErrorCode::kValidation, "expected " + std::to_string(strat.bin_count()) +
                                     " sample sizes, got " + std::to_string(sizes.size()));
  }
  SampleDraw out;
  for (std::size_t i = 0; i < strat.bin_count(); ++i) {
    SampleBatch batch;
    batch.bin = i;
    batch.seed = seed;
    batch.requested = sizes[i];
    const std::size_t available = strat.bin_size(i);
    if (sizes[i] > available) {
      batch.clamped = true;
      out.warnings.push_back("bin " + std::to_string(i) + ": requested " +
                             std::to_string(sizes[i]) + " but only " +
                             std::to_string(available) + " units exist; sampling all");
    }
    Rng rng(bin_seed(seed, i));
    for (std::size_t idx : sample_indices(available, sizes[i], rng)) {
      batch.unit_ids.push_back(strat.bins[i][idx].unit_id);
    }
    out.batches.push_back(std::move(batch));
  }
  return out;
}

struct Verdict {
  std::string unit_id;
  std::string reviewer_id;
  bool is_true_event = false;
  int images_with_application = 0;
  Timestamp submitted_at{};

  friend bool operator==(const Verdict&, const Verdict&) = default;
};

/// Keeps one verdict per (unit, reviewer), replacing older submissions.
inline void upsert_verdict(std::vector<Verdict>& verdicts, Verdict v) {
  for (auto& existing : verdicts) {
    if (existing.unit_id == v.unit_id && existing.reviewer_id == v.reviewer_id) {
      existing = std::move(v);
      return;
    }
  }
  verdicts.push_back(std::move(v));
}

struct UnitDecision {
  bool is_true_event = false;
  int images_with_application = 0;
};

/// Combines the reviewers' verdicts on each unit: majority vote, with ties
/// going to the most recent submission (then the greater reviewer id). The
/// result does not depend on the order of `verdicts`.
inline std::map<std::string, UnitDecision> resolve_verdicts(const std::vector<Verdict>& verdicts) {
  std::map<std::string, std::vector<const Verdict*>> by_unit;
  for (const auto& v : verdicts) by_unit[v.unit_id].push_back(&v);
  std::map<std::string, UnitDecision> out;
  for (auto& [unit, list] : by_unit) {
    std::sort(list.begin(), list.end(), [](const Verdict* a, const Verdict* b) {
      return std::tie(a->submitted_at, a->reviewer_id) < std::tie(b->submitted_at, b->reviewer_id);
    });
    const auto yes = std::count_if(list.begin(), list.end(),
                                   [](const Verdict* v) { return v->is_true_event; });
    const auto no = static_cast<long>(list.size()) - yes;
    UnitDecision d;
    d.is_true_event = yes != no ? yes > no : list.back()->is_true_event;
    // Image count from the latest reviewer agreeing with the decision.
    for (auto it = list.rbegin(); it != list.rend(); ++it) {
      if ((*it)->is_true_event == d.is_true_event) {
        d.images_with_application = (*it)->images_with_application;
        break;
      }
    }
    out[unit] = d;
  }
  return out;
}

struct BinEstimate {
  std::size_t bin = 0;
  std::size_t population = 0;  // |B_i|
  std::size_t sampled = 0;     // units drawn
  std::size_t reviewed = 0;    // n_i: drawn units with a verdict
  std::size_t successes = 0;   // a_i
  double fraction = 0.0;       // p_i = a_i / n_i
  double contribution = 0.0;   // p_i * |B_i|
  std::size_t application_images = 0;
};

/// Stratified expansion estimate of the event total.
struct PrevalenceEstimate {
  double total = 0.0;  // T
  double standard_error = 0.0;
  double z = 1.0;
  double confidence_level = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  bool provisional = false;
  std::vector<std::string> missing_units;
  std::vector<BinEstimate> bins;
};

inline double normal_coverage(double z) { return std::erf(z / std::sqrt(2.0)); }

/// Sampled units keyed by id, with their bin.
inline std::map<std::string, std::pair<std::size_t, const SampleUnit*>> sampled_units(
    const Stratification& strat, const std::vector<SampleBatch>& batches) {
  std::map<std::string, std::pair<std::size_t, const SampleUnit*>> out;
  for (const auto& batch : batches) {
    if (batch.bin >= strat.bin_count()) fail(ErrorCode::kValidation, "sample bin out of range");
    const auto& bin = strat.bins[batch.bin];
    for (const auto& id : batch.unit_ids) {
      auto it = std::lower_bound(bin.begin(), bin.end(), id,
                                 [](const SampleUnit& u, const std::string& key) { return u.unit_id < key; });
      if (it == bin.end() || it->unit_id != id) {
        fail(ErrorCode::kIntegrity, "sampled unit '" + id + "' is not in bin " +
                                        std::to_string(batch.bin));
      }
      out.emplace(id, std::make_pair(batch.bin, &*it));
    }
  }
  return out;
}

/// Validates one verdict against the sample; throws kConflict for units
/// that were never sampled.
inline void check_verdict(const std::map<std::string, std::pair<std::size_t, const SampleUnit*>>& sampled,
                          const Verdict& v) {
  auto it = sampled.find(v.unit_id);
  if (it == sampled.end()) {
    fail(ErrorCode::kConflict, "unit '" + v.unit_id + "' was not sampled");
  }
  if (v.reviewer_id.empty()) fail(ErrorCode::kValidation, "verdict reviewer must not be empty");
  if (v.images_with_application < 0 ||
      v.images_with_application > it->second.second->image_count) {
    fail(ErrorCode::kValidation,
         "images_with_application for '" + v.unit_id + "' must lie in [0, " +
             std::to_string(it->second.second->image_count) + "]");
  }
}

/// T = sum_i (a_i / n_i) |B_i| with standard error
/// sqrt(sum_i |B_i|^2 p_i (1 - p_i) / n_i) over bins that were not fully
/// reviewed, and interval T +/- z SE.
/// Units still awaiting review make the estimate provisional; a non-empty
/// bin with no reviewed units makes it unavailable.
inline PrevalenceEstimate estimate(const Stratification& strat,
                                   const std::vector<SampleBatch>& batches,
                                   const std::vector<Verdict>& verdicts, double z = 1.0) {
  const auto sampled = sampled_units(strat, batches);
  for (const auto& v : verdicts) check_verdict(sampled, v);
  const auto decisions = resolve_verdicts(verdicts);

  PrevalenceEstimate out;
  out.z = z;
  out.confidence_level = normal_coverage(z);
  out.bins.resize(strat.bin_count());
  for (std::size_t i = 0; i < strat.bin_count(); ++i) {
    out.bins[i].bin = i;
    out.bins[i].population = strat.bin_size(i);
  }
  for (const auto& [id, entry] : sampled) {
    BinEstimate& b = out.bins[entry.first];
    ++b.sampled;
    auto d = decisions.find(id);
    if (d == decisions.end()) {
      out.missing_units.push_back(id);
      continue;
    }
    ++b.reviewed;
    if (d->second.is_true_event) ++b.successes;
    b.application_images += static_cast<std::size_t>(d->second.images_with_application);
  }
  out.provisional = !out.missing_units.empty();

  std::vector<std::string> unsampled;
  double variance = 0.0;
  for (auto& b : out.bins) {
    if (b.population == 0) continue;
    if (b.reviewed == 0) {
      unsampled.push_back(std::to_string(b.bin));
      continue;
    }
    b.fraction = double(b.successes) / double(b.reviewed);
    b.contribution = double(b.successes) * double(b.population) / double(b.reviewed);
    out.total += b.contribution;
    // A fully reviewed bin is known exactly and adds no sampling variance.
    if (b.reviewed == b.population) continue;
    const double pop = double(b.population);
    variance += pop * pop * b.fraction * (1.0 - b.fraction) / double(b.reviewed);
  }
  if (!unsampled.empty()) {
    std::string list;
    for (const auto& s : unsampled) list += (list.empty() ? "" : ",") + s;
    fail(ErrorCode::kUnsampledStratum, "unsampled strata: bins " + list +
                                           " have units but no reviewed samples");
  }
  out.standard_error = std::sqrt(variance);
  out.ci_low = std::max(0.0, out.total - z * out.standard_error);
  out.ci_high = out.total + z * out.standard_error;
  return out;
}

struct CalibrationRow {
  std::size_t bin = 0;
  double lower = 0.0;  // confidence range; bin 0 is [0, edges[0])
  double upper = 0.0;
  std::size_t reviewed = 0;
  std::size_t successes = 0;
  double fraction = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

/// Wilson score interval for a binomial proportion.
inline std::pair<double, double> wilson_interval(std::size_t successes, std::size_t n, double z) {
  if (n == 0) return {0.0, 1.0};
  const double nn = double(n);
  const double p = double(successes) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (p + z2 / (2.0 * nn)) / denom;
  const double half = z / denom * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn));
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

/// Empirical true-event fraction per bin with Wilson intervals at `z`.
inline std::vector<CalibrationRow> calibration_report(const Stratification& strat,
                                                      const std::vector<SampleBatch>& batches,
                                                      const std::vector<Verdict>& verdicts,
                                                      double z = 1.0) {
  const PrevalenceEstimate est = estimate(strat, batches, verdicts, z);
  std::vector<CalibrationRow> out;
  for (const auto& b : est.bins) {
    CalibrationRow row;
    row.bin = b.bin;
    row.lower = b.bin == 0 ? 0.0 : strat.edges[b.bin - 1];
    row.upper = b.bin == 0 ? strat.edges.front() : strat.edges[b.bin];
    row.reviewed = b.reviewed;
    row.successes = b.successes;
    row.fraction = b.fraction;
    std::tie(row.ci_low, row.ci_high) = wilson_interval(b.successes, b.reviewed, z);
    out.push_back(row);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Serialization

inline Json to_json(const SampleUnit& u) {
  return Json{{"unit_id", u.unit_id},
              {"facility_id", u.facility_id},
              {"season_year", u.season_year},
              {"start_date", format_date(u.start_date)},
              {"end_date", format_date(u.end_date)},
              {"score", u.score},
              {"image_count", u.image_count},
              {"image_ids", u.image_ids}};
}

inline SampleUnit unit_from_json(const Json& j) {
  using json_detail::require;
  SampleUnit u;
  u.unit_id = require<std::string>(j, "unit_id", "unit");
  u.facility_id = require<std::string>(j, "facility_id", "unit");
  u.season_year = require<int>(j, "season_year", "unit");
  u.start_date = parse_date(require<std::string>(j, "start_date", "unit"));
  u.end_date = parse_date(require<std::string>(j, "end_date", "unit"));
  u.score = require<double>(j, "score", "unit");
  u.image_count = require<int>(j, "image_count", "unit");
  u.image_ids = require<std::vector<std::string>>(j, "image_ids", "unit");
  return u;
}

inline Json to_json(const Stratification& s) {
  Json bins = Json::array();
  for (const auto& b : s.bins) bins.push_back(to_json_array(b));
  return Json{{"edges", s.edges}, {"bins", bins}};
}

inline Stratification stratification_from_json(const Json& j) {
  Stratification s;
  s.edges = normalize_edges(json_detail::require<std::vector<double>>(j, "edges", "stratification"));
  const Json& bins = j.at("bins");
  if (!bins.is_array() || bins.size() != s.edges.size()) {
    fail(ErrorCode::kIntegrity, "stratification bin count disagrees with edges");
  }
  for (const Json& b : bins) {
    std::vector<SampleUnit> units;
    for (const Json& u : b) units.push_back(unit_from_json(u));
    s.bins.push_back(std::move(units));
  }
  return s;
}

inline Json to_json(const SampleBatch& b) {
  return Json{{"bin", b.bin},
              {"unit_ids", b.unit_ids},
              {"seed", b.seed},
              {"requested", b.requested},
              {"clamped", b.clamped}};
}

inline SampleBatch batch_from_json(const Json& j) {
  using json_detail::require;
  SampleBatch b;
  b.bin = require<std::size_t>(j, "bin", "sample");
  b.unit_ids = require<std::vector<std::string>>(j, "unit_ids", "sample");
  b.seed = require<std::uint64_t>(j, "seed", "sample");
  b.requested = require<std::size_t>(j, "requested", "sample");
  b.clamped = require<bool>(j, "clamped", "sample");
  return b;
}

inline Json to_json(const Verdict& v) {
  return Json{{"unit_id", v.unit_id},
              {"reviewer", v.reviewer_id},
              {"is_true_event", v.is_true_event},
              {"images_with_application", v.images_with_application},
              {"submitted_at", format_rfc3339(v.submitted_at)}};
}

inline Verdict verdict_from_json(const Json& j) {
  using json_detail::require;
  Verdict v;
  v.unit_id = require<std::string>(j, "unit_id", "verdict");
  v.reviewer_id = require<std::string>(j, "reviewer", "verdict");
  v.is_true_event = require<bool>(j, "is_true_event", "verdict");
  v.images_with_application = require<int>(j, "images_with_application", "verdict");
  if (j.contains("submitted_at")) {
    v.submitted_at = parse_rfc3339(require<std::string>(j, "submitted_at", "verdict"));
  }
  return v;
}

/// Stable field order so every surface renders identical bytes.
inline OrderedJson to_ordered_json(const PrevalenceEstimate& e) {
  OrderedJson bins = OrderedJson::array();
  for (const auto& b : e.bins) {
    OrderedJson jb;
    jb["bin"] = b.bin;
    jb["population"] = b.population;
    jb["sampled"] = b.sampled;
    jb["reviewed"] = b.reviewed;
    jb["successes"] = b.successes;
    jb["fraction"] = b.fraction;
    jb["contribution"] = b.contribution;
    jb["application_images"] = b.application_images;
    jb["unit"] = b.bin == 0 ? "images" : "events";
    bins.push_back(std::move(jb));
  }
  OrderedJson j;
  j["schema"] = "appwatch.estimate/1";
  j["total"] = e.total;
  j["standard_error"] = e.standard_error;
  j["z"] = e.z;
  j["confidence_level"] = e.confidence_level;
  j["ci"] = OrderedJson::array({e.ci_low, e.ci_high});
  j["provisional"] = e.provisional;
  j["missing_units"] = e.missing_units;
  j["bins"] = std::move(bins);
  j["notes"] =
      "bin 0 counts images without predictions, so its contribution estimates "
      "missed application-bearing images; bins 1+ count predicted events";
  return j;
}

inline Json to_json(const CalibrationRow& r) {
  return Json{{"bin", r.bin},           {"lower", r.lower},       {"upper", r.upper},
              {"reviewed", r.reviewed}, {"successes", r.successes}, {"fraction", r.fraction},
              {"ci", Json::array({r.ci_low, r.ci_high})}};
}

// ---------------------------------------------------------------------------
// CSV surfaces

/// Reviewer dispatch manifest: `bin,unit_id,facility_id,start_date,end_date,score`.
inline std::string sample_manifest_csv(const Stratification& strat,
                                       const std::vector<SampleBatch>& batches) {
  const auto sampled = sampled_units(strat, batches);
  std::ostringstream out;
  out << "bin,unit_id,facility_id,start_date,end_date,score\n";
  for (const auto& batch : batches) {
    for (const auto& id : batch.unit_ids) {
      const SampleUnit& u = *sampled.at(id).second;
      char score[32];
      std::snprintf(score, sizeof score, "%.6g", u.score);
      auto quote = [](const std::string& s) {
        if (s.find_first_of(",\"\n") == std::string::npos) return s;
        std::string q = "\"";
        for (char c : s) {
          if (c == '"') q += '"';
          q += c;
        }
        return q + "\"";
      };
      out << batch.bin << ',' << quote(u.unit_id) << ',' << quote(u.facility_id) << ','
          << format_date(u.start_date) << ',' << format_date(u.end_date) << ',' << score
          << '\n';
    }
  }
  return out.str();
}

/// Verdict CSV: `unit_id,reviewer,is_true_event,images_with_application[,submitted_at]`.
inline std::vector<Verdict> parse_verdicts_csv(std::istream& in,
                                               const std::string& source = "verdicts") {
  using Tokenizer = boost::tokenizer<boost::escaped_list_separator<char>>;
  std::vector<Verdict> out;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  bool has_time = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    try {
      Tokenizer tok(line);
      cells.assign(tok.begin(), tok.end());
    } catch (const boost::escaped_list_error& e) {
      fail(ErrorCode::kParse, source + ":" + std::to_string(line_no) + ": " + e.what());
    }
    const std::string where = source + ":" + std::to_string(line_no);
    if (!header_seen) {
      header_seen = true;
      const std::vector<std::string> base{"unit_id", "reviewer", "is_true_event",
                                          "images_with_application"};
      auto with_time = base;
      with_time.push_back("submitted_at");
      if (cells == with_time) {
        has_time = true;
      } else if (cells != base) {
        fail(ErrorCode::kParse,
             where + ": header must be unit_id,reviewer,is_true_event,images_with_application[,submitted_at]");
      }
      continue;
    }
    if (cells.size() != (has_time ? 5u : 4u)) fail(ErrorCode::kParse, where + ": wrong column count");
    Verdict v;
    v.unit_id = cells[0];
    v.reviewer_id = cells[1];
    const std::string& flag = cells[2];
    if (flag == "true" || flag == "1" || flag == "yes") {
      v.is_true_event = true;
    } else if (flag == "false" || flag == "0" || flag == "no") {
      v.is_true_event = false;
    } else {
      fail(ErrorCode::kParse, where + ": is_true_event must be true/false");
    }
    try {
      std::size_t used = 0;
      v.images_with_application = std::stoi(cells[3], &used);
      if (used != cells[3].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      fail(ErrorCode::kParse, where + ": images_with_application must be an integer");
    }
    if (has_time) v.submitted_at = parse_rfc3339(cells[4]);
    out.push_back(std::move(v));
  }
  if (!header_seen) fail(ErrorCode::kParse, source + ": empty verdict file");
  return out;
}

}  // namespace appwatch
