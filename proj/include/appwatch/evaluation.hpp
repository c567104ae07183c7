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
#include <numeric>
#include <set>
#include <string>
#include <tuple>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "appwatch/detection_store.hpp"
#include "appwatch/error.hpp"
#include "appwatch/events.hpp"
#include "appwatch/geometry.hpp"
#include "appwatch/model.hpp"
#include "appwatch/random.hpp"

namespace appwatch {

// ---------------------------------------------------------------------------
// Location-based split

enum class Split { kTrain, kVal, kTest };

constexpr std::string_view to_string(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "?";
}

struct SplitRatios {
  double train = 0.7;
  double val = 0.1;
  double test = 0.2;
};

struct SplitAssignment {
  std::map<std::string, Split> by_facility;

  std::size_t count(Split s) const {
    return static_cast<std::size_t>(std::count_if(
        by_facility.begin(), by_facility.end(), [&](const auto& kv) { return kv.second == s; }));
  }

  std::vector<std::string> members(Split s) const {
    std::vector<std::string> out;
    for (const auto& [id, split] : by_facility) {
      if (split == s) out.push_back(id);
    }
    return out;
  }
};

/// Assigns whole facilities to train/val/test. Validation and test sizes
/// are the rounded ratio shares (at least one facility each when their
/// ratio is positive); train takes the remainder.
inline SplitAssignment split_by_location(std::vector<std::string> facility_ids,
                                         SplitRatios ratios, std::uint64_t seed) {
  for (double r : {ratios.train, ratios.val, ratios.test}) {
    if (!(r >= 0.0 && r <= 1.0)) fail(ErrorCode::kValidation, "split ratios must lie in [0,1]");
  }
  if (std::abs(ratios.train + ratios.val + ratios.test - 1.0) > 1e-9) {
    fail(ErrorCode::kValidation, "split ratios must sum to 1");
  }
  std::sort(facility_ids.begin(), facility_ids.end());
  if (std::adjacent_find(facility_ids.begin(), facility_ids.end()) != facility_ids.end()) {
    fail(ErrorCode::kValidation, "duplicate facility ids in split input");
  }
  const std::size_t n = facility_ids.size();
  if (n < 3) {
    fail(ErrorCode::kInfeasibleSplit,
         "need at least 3 facilities to split, got " + std::to_string(n));
  }
  auto share = [&](double r) {
    auto k = static_cast<std::size_t>(std::llround(double(n) * r));
    if (r > 0.0) k = std::max<std::size_t>(k, 1);
    return k;
  };
  const std::size_t n_val = share(ratios.val);
  const std::size_t n_test = share(ratios.test);
  if (n_val + n_test > n) fail(ErrorCode::kInfeasibleSplit, "split ratios leave no room");

  Rng rng(seed);
  fisher_yates(std::span<std::string>(facility_ids), rng);
  SplitAssignment out;
  const std::size_t n_train = n - n_val - n_test;
  for (std::size_t i = 0; i < n; ++i) {
    const Split s = i < n_train ? Split::kTrain : (i < n_train + n_val ? Split::kVal : Split::kTest);
    out.by_facility.emplace(facility_ids[i], s);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Image classification curves

struct CurvePoint {
  double threshold = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double fpr = 0.0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;
};

/// Curve points ordered by descending threshold. `pr_defined` is false when
/// the truth has no positives; `roc_defined` is false when it has no
/// negatives. Undefined areas read as 0.
struct CurveResult {
  std::vector<CurvePoint> points;
  double auc_pr = 0.0;
  double auc_roc = 0.0;
  bool pr_defined = true;
  bool roc_defined = true;
};

/// Sweeps every distinct score as a threshold (score >= t is positive).
/// PR AUC is average precision, sum of (recall step x precision); ROC AUC is
/// trapezoidal from (0,0) to (1,1).
inline CurveResult classification_curves(const std::vector<ImagePrediction>& preds,
                                         const std::map<std::string, bool>& truth) {
  if (preds.size() != truth.size()) {
    fail(ErrorCode::kContract, "predictions and truth cover different image sets");
  }
  struct Item {
    double score;
    bool positive;
  };
  std::vector<Item> items;
  items.reserve(preds.size());
  std::unordered_set<std::string> seen;
  for (const auto& p : preds) {
    auto it = truth.find(p.image_id);
    if (it == truth.end() || !seen.insert(p.image_id).second) {
      fail(ErrorCode::kContract, "image '" + p.image_id + "' missing from truth or repeated");
    }
    items.push_back(Item{p.score, it->second});
  }
  std::sort(items.begin(), items.end(),
            [](const Item& a, const Item& b) { return a.score > b.score; });
  const std::size_t pos =
      static_cast<std::size_t>(std::count_if(items.begin(), items.end(), [](const Item& i) { return i.positive; }));
  const std::size_t neg = items.size() - pos;

  CurveResult out;
  out.pr_defined = pos > 0;
  out.roc_defined = pos > 0 && neg > 0;
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < items.size();) {
    const double t = items[i].score;
    while (i < items.size() && items[i].score == t) {
      items[i].positive ? ++tp : ++fp;
      ++i;
    }
    CurvePoint pt;
    pt.threshold = t;
    pt.tp = tp;
    pt.fp = fp;
    pt.fn = pos - tp;
    pt.tn = neg - fp;
    pt.precision = double(tp) / double(tp + fp);
    pt.recall = pos > 0 ? double(tp) / double(pos) : 0.0;
    pt.fpr = neg > 0 ? double(fp) / double(neg) : 0.0;
    out.points.push_back(pt);
  }
  if (out.pr_defined) {
    double prev_recall = 0.0;
    for (const auto& pt : out.points) {
      out.auc_pr += (pt.recall - prev_recall) * pt.precision;
      prev_recall = pt.recall;
    }
  }
  if (out.roc_defined) {
    double px = 0.0, py = 0.0;
    for (const auto& pt : out.points) {
      out.auc_roc += (pt.fpr - px) * (pt.recall + py) / 2.0;
      px = pt.fpr;
      py = pt.recall;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// F-beta

struct FScore {
  double value = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  bool degenerate = false;  // precision or recall undefined, or both zero
};

inline FScore f_beta(std::size_t tp, std::size_t fp, std::size_t fn, double beta) {
  if (!(beta > 0.0)) fail(ErrorCode::kValidation, "beta must be positive");
  FScore out;
  const bool p_defined = tp + fp > 0;
  const bool r_defined = tp + fn > 0;
  out.precision = p_defined ? double(tp) / double(tp + fp) : 0.0;
  out.recall = r_defined ? double(tp) / double(tp + fn) : 0.0;
  const double b2 = beta * beta;
  const double denom = b2 * out.precision + out.recall;
  if (!p_defined || !r_defined || denom == 0.0) {
    out.degenerate = true;
    return out;
  }
  out.value = (1.0 + b2) * out.precision * out.recall / denom;
  return out;
}

// ---------------------------------------------------------------------------
// Box-level average precision

struct APResult {
  double ap = 0.0;
  bool degenerate = false;  // no truth boxes
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t n_truth = 0;
  std::vector<std::pair<double, double>> pr;  // (recall, precision) after each detection
};

/// Single-class AP at an IoU threshold. Detections are taken in descending
/// confidence (ties keep input order); each claims the highest-IoU truth box
/// on its image that no earlier detection claimed, and is a true positive
/// when that IoU reaches the threshold. AP integrates the all-points
/// interpolated precision envelope.
inline APResult average_precision(const std::vector<Detection>& detections,
                                  const std::vector<LabelBox>& truth,
                                  double iou_threshold = 0.5) {
  APResult out;
  out.n_truth = truth.size();
  std::unordered_map<std::string, std::vector<std::size_t>> truth_on_image;
  for (std::size_t i = 0; i < truth.size(); ++i) truth_on_image[truth[i].image_id].push_back(i);
  std::vector<bool> claimed(truth.size(), false);

  std::vector<std::size_t> order(detections.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return detections[a].confidence > detections[b].confidence;
  });

  for (std::size_t idx : order) {
    const Detection& d = detections[idx];
    double best = -1.0;
    std::size_t best_truth = truth.size();
    if (auto it = truth_on_image.find(d.image_id); it != truth_on_image.end()) {
      for (std::size_t t : it->second) {
        if (claimed[t]) continue;
        const double v = iou(d.box, truth[t].box);
        if (v > best) {
          best = v;
          best_truth = t;
        }
      }
    }
    if (best_truth < truth.size() && best >= iou_threshold) {
      claimed[best_truth] = true;
      ++out.tp;
    } else {
      ++out.fp;
    }
    const double recall = out.n_truth > 0 ? double(out.tp) / double(out.n_truth) : 0.0;
    out.pr.emplace_back(recall, double(out.tp) / double(out.tp + out.fp));
  }

  if (out.n_truth == 0) {
    out.degenerate = true;
    return out;
  }
  // Precision envelope: max precision at any recall >= r.
  std::vector<double> envelope(out.pr.size());
  double running = 0.0;
  for (std::size_t i = out.pr.size(); i-- > 0;) {
    running = std::max(running, out.pr[i].second);
    envelope[i] = running;
  }
  double prev_recall = 0.0;
  for (std::size_t i = 0; i < out.pr.size(); ++i) {
    if (out.pr[i].first > prev_recall) {
      out.ap += (out.pr[i].first - prev_recall) * envelope[i];
      prev_recall = out.pr[i].first;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Event matching

/// A predicted event overlaps a true event when their union boxes intersect
/// with positive area and their date ranges touch or overlap.
inline bool events_overlap(const ApplicationEvent& predicted, const ApplicationEvent& truth) {
  return intersects(predicted.union_box, truth.union_box) &&
         predicted.start_date <= truth.end_date && truth.start_date <= predicted.end_date;
}

enum class MatchOutcome {
  kTruePositive,  // first predicted event to overlap its true event
  kRedundant,     // overlaps a true event that an earlier prediction already found
  kFalsePositive, // overlaps no true event
};

constexpr std::string_view to_string(MatchOutcome m) {
  switch (m) {
    case MatchOutcome::kTruePositive: return "tp";
    case MatchOutcome::kRedundant: return "redundant";
    case MatchOutcome::kFalsePositive: return "fp";
  }
  return "?";
}

struct PredictedOutcome {
  std::string event_id;
  MatchOutcome outcome = MatchOutcome::kFalsePositive;
  std::size_t application_images = 0;  // member images inside an overlapped true event
};

struct EventMatchResult {
  std::vector<std::pair<std::string, std::string>> matches;  // (true id, predicted id)
  std::vector<PredictedOutcome> predicted;                   // parallel to the input
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t redundant = 0;
  std::size_t application_images = 0;

  EventMatchResult& operator+=(const EventMatchResult& o) {
    matches.insert(matches.end(), o.matches.begin(), o.matches.end());
    predicted.insert(predicted.end(), o.predicted.begin(), o.predicted.end());
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    redundant += o.redundant;
    application_images += o.application_images;
    return *this;
  }
};

namespace detail {

inline auto event_time_key(const ApplicationEvent& e) {
  return std::make_tuple(e.start_date, e.end_date, std::cref(e.event_id));
}

inline void check_same_partition(const std::vector<ApplicationEvent>& a,
                                 const std::vector<ApplicationEvent>& b) {
  const ApplicationEvent* first = !a.empty() ? &a.front() : (!b.empty() ? &b.front() : nullptr);
  if (first == nullptr) return;
  for (const auto* list : {&a, &b}) {
    for (const auto& e : *list) {
      if (e.facility_id != first->facility_id ||
          e.season.season_year != first->season.season_year) {
        fail(ErrorCode::kContract, "match_events given events from more than one facility-season");
      }
    }
  }
}

}  // namespace detail

/// Matches predicted to true events of one facility-season. True events are
/// visited in date order; each credits the earliest-starting overlapping
/// prediction (then earliest end, then event id) not already credited.
/// Predictions that overlap a true event without being credited are
/// redundant: neither true nor false positives, though their images still
/// count toward application hits.
inline EventMatchResult match_events(const std::vector<ApplicationEvent>& predicted,
                                     const std::vector<ApplicationEvent>& truth) {
  detail::check_same_partition(predicted, truth);
  EventMatchResult out;
  std::vector<std::size_t> t_order(truth.size());
  std::iota(t_order.begin(), t_order.end(), std::size_t{0});
  std::sort(t_order.begin(), t_order.end(), [&](std::size_t a, std::size_t b) {
    return detail::event_time_key(truth[a]) < detail::event_time_key(truth[b]);
  });
  std::vector<std::size_t> p_order(predicted.size());
  std::iota(p_order.begin(), p_order.end(), std::size_t{0});
  std::sort(p_order.begin(), p_order.end(), [&](std::size_t a, std::size_t b) {
    return detail::event_time_key(predicted[a]) < detail::event_time_key(predicted[b]);
  });

  std::vector<bool> credited(predicted.size(), false);
  std::vector<bool> overlaps_any(predicted.size(), false);
  for (std::size_t t : t_order) {
    bool found = false;
    for (std::size_t p : p_order) {
      if (!events_overlap(predicted[p], truth[t])) continue;
      overlaps_any[p] = true;
      if (!found && !credited[p]) {
        credited[p] = true;
        found = true;
        out.matches.emplace_back(truth[t].event_id, predicted[p].event_id);
      }
    }
    found ? ++out.tp : ++out.fn;
  }

  out.predicted.reserve(predicted.size());
  for (std::size_t p = 0; p < predicted.size(); ++p) {
    PredictedOutcome po;
    po.event_id = predicted[p].event_id;
    if (credited[p]) {
      po.outcome = MatchOutcome::kTruePositive;
    } else if (overlaps_any[p]) {
      po.outcome = MatchOutcome::kRedundant;
      ++out.redundant;
    } else {
      po.outcome = MatchOutcome::kFalsePositive;
      ++out.fp;
    }
    if (overlaps_any[p]) {
      std::unordered_set<std::string> app_images;
      for (const auto& t : truth) {
        if (events_overlap(predicted[p], t)) {
          app_images.insert(t.member_image_ids.begin(), t.member_image_ids.end());
        }
      }
      for (const auto& id : predicted[p].member_image_ids) {
        if (app_images.contains(id)) ++po.application_images;
      }
    }
    out.application_images += po.application_images;
    out.predicted.push_back(std::move(po));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Event-level PR curve

struct EventPartition {
  std::vector<ApplicationEvent> predicted;
  std::vector<ApplicationEvent> truth;
};

struct EventCurvePoint {
  double threshold = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t redundant = 0;
};

/// `degenerate` marks an empty truth set; `no_predictions` marks a curve with
/// no points (AUC and recall are then 0).
struct EventCurveResult {
  std::vector<EventCurvePoint> points;
  double auc_pr = 0.0;
  bool degenerate = false;
  bool no_predictions = false;
};

namespace detail {

inline double average_precision_steps(const std::vector<EventCurvePoint>& points) {
  double auc = 0.0, prev_recall = 0.0;
  for (const auto& pt : points) {
    auc += (pt.recall - prev_recall) * pt.precision;
    prev_recall = pt.recall;
  }
  return auc;
}

inline EventCurvePoint tally_point(double threshold, const EventMatchResult& m,
                                   std::size_t n_truth) {
  EventCurvePoint pt;
  pt.threshold = threshold;
  pt.tp = m.tp;
  pt.fp = m.fp;
  pt.fn = m.fn;
  pt.redundant = m.redundant;
  pt.precision = m.tp + m.fp > 0 ? double(m.tp) / double(m.tp + m.fp) : 0.0;
  pt.recall = n_truth > 0 ? double(m.tp) / double(n_truth) : 0.0;
  return pt;
}

}  // namespace detail

/// Sweeps predicted-event scores as thresholds (score >= t kept), matching
/// per partition and pooling counts. Precision excludes redundant events.
inline EventCurveResult event_pr_curve(const std::vector<EventPartition>& partitions) {
  EventCurveResult out;
  std::size_t n_truth = 0;
  std::set<double, std::greater<>> thresholds;
  for (const auto& part : partitions) {
    n_truth += part.truth.size();
    for (const auto& e : part.predicted) thresholds.insert(e.score);
  }
  out.degenerate = n_truth == 0;
  out.no_predictions = thresholds.empty();
  for (double t : thresholds) {
    EventMatchResult pooled;
    for (const auto& part : partitions) {
      std::vector<ApplicationEvent> kept;
      for (const auto& e : part.predicted) {
        if (e.score >= t) kept.push_back(e);
      }
      pooled += match_events(kept, part.truth);
    }
    out.points.push_back(detail::tally_point(t, pooled, n_truth));
  }
  if (!out.degenerate) out.auc_pr = detail::average_precision_steps(out.points);
  return out;
}

/// One facility-season's raw inputs for the detection-threshold sweep.
struct DetectionPartition {
  EventContext context;
  std::vector<Detection> detections;
  std::vector<ImageRecord> images;  // retained, ordered
  std::vector<ApplicationEvent> truth;
};

/// Event PR curve that thresholds detections before clustering: for every
/// distinct detection confidence t, events are rebuilt from detections with
/// confidence >= t and matched against the truth.
inline EventCurveResult event_pr_curve_from_detections(
    const std::vector<DetectionPartition>& partitions) {
  EventCurveResult out;
  std::size_t n_truth = 0;
  std::set<double, std::greater<>> thresholds;
  for (const auto& part : partitions) {
    n_truth += part.truth.size();
    for (const auto& d : part.detections) thresholds.insert(d.confidence);
  }
  out.degenerate = n_truth == 0;
  out.no_predictions = thresholds.empty();
  for (double t : thresholds) {
    EventMatchResult pooled;
    for (const auto& part : partitions) {
      pooled += match_events(events_from_detections(part.context, part.detections, part.images, t),
                             part.truth);
    }
    out.points.push_back(detail::tally_point(t, pooled, n_truth));
  }
  if (!out.degenerate) out.auc_pr = detail::average_precision_steps(out.points);
  return out;
}

}  // namespace appwatch
