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

#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "appwatch/analytics.hpp"
#include "appwatch/detection_store.hpp"
#include "appwatch/evaluation.hpp"
#include "appwatch/events.hpp"
#include "appwatch/ingestion.hpp"
#include "appwatch/json_io.hpp"
#include "appwatch/prevalence.hpp"
#include "appwatch/store.hpp"

namespace appwatch {

struct IngestFacilitySummary {
  std::string facility_id;
  std::size_t total = 0;
  std::size_t retained = 0;
  std::size_t skipped = 0;
};

struct IngestSummary {
  std::vector<IngestFacilitySummary> facilities;
  std::vector<std::string> warnings;

  std::size_t total() const {
    std::size_t n = 0;
    for (const auto& f : facilities) n += f.total;
    return n;
  }
  std::size_t retained() const {
    std::size_t n = 0;
    for (const auto& f : facilities) n += f.retained;
    return n;
  }
};

struct ImportSummary {
  std::size_t records = 0;
  std::map<PartitionKey, std::size_t> per_partition;
};

struct EventsSummary {
  EventKind kind = EventKind::kPredicted;
  double threshold = 0.0;
  std::map<std::string, std::size_t> per_facility;
  std::size_t total = 0;
  std::size_t ignored_boxes = 0;  // boxes on images the quality filter dropped
};

struct EvaluateOptions {
  std::uint64_t split_seed = 0;
  SplitRatios ratios;
  bool all_partitions = false;     // ignore the split and score every labeled partition
  double curve_threshold = 0.0;    // detection threshold before image scoring
  double decision_threshold = 0.5; // classification threshold for F-beta
  double iou_threshold = 0.5;
};

/// The batch workflow over one store: ingestion, imports, event building,
/// evaluation, stratified review and analytics. Shared by the CLI and the
/// HTTP service so both render identical results.
class Pipeline {
 public:
  static constexpr std::string_view kFacilities = "facilities";
  static constexpr std::string_view kSeason = "season";
  static constexpr std::string_view kStratification = "stratification";
  static constexpr std::string_view kSamples = "samples";
  static constexpr std::string_view kVerdicts = "verdicts";
  static constexpr std::string_view kEstimate = "estimate";
  static constexpr std::string_view kEvaluation = "evaluation";
  static constexpr std::string_view kAnalytics = "analytics";

  explicit Pipeline(std::filesystem::path store_dir) : store_(std::move(store_dir)) {}

  Store& store() { return store_; }
  const Store& store() const { return store_; }

  // -- facilities & seasons -------------------------------------------------

  std::vector<FacilityRecord> facilities() const {
    std::vector<FacilityRecord> out;
    if (auto j = store_.get_global(kFacilities)) {
      for (const Json& f : *j) out.push_back(facility_from_json(f));
    }
    return out;
  }

  SeasonWindow season_of(const PartitionKey& key) const {
    if (auto j = store_.get(key, kSeason)) return season_from_json(*j);
    return SeasonWindow::winter(key.season_year);
  }

  // -- ingestion ------------------------------------------------------------

  IngestSummary ingest(const std::vector<FacilityRecord>& facilities, const SeasonWindow& window,
                       ImageryProvider& provider, const FilterConfig& cfg,
                       double aoi_side = 1000.0) {
    cfg.validate();
    merge_facilities(facilities);
    IngestSummary summary;
    for (const auto& f : facilities) {
      const GeoBox aoi = make_aoi(f, aoi_side);
      CatalogResult catalog =
          fetch_catalog(provider, ProviderQuery{aoi, window, 1.0}, f.facility_id);
      FilterResult filtered = filter_images(std::move(catalog.records), cfg);
      const PartitionKey key{f.facility_id, window.season_year};
      store_.put(key, kSeason, to_json(window));
      store_.put_images(key, filtered.records);
      summary.facilities.push_back(IngestFacilitySummary{
          f.facility_id, filtered.records.size(), filtered.retained_count, catalog.skipped});
      for (auto& w : catalog.warnings) summary.warnings.push_back(f.facility_id + ": " + w);
    }
    return summary;
  }

  /// image_id -> owning partition, over every stored catalog.
  std::unordered_map<std::string, PartitionKey> image_index() const {
    std::unordered_map<std::string, PartitionKey> out;
    for (const auto& key : store_.partitions()) {
      for (const auto& img : store_.get_images(key)) out.emplace(img.image_id, key);
    }
    return out;
  }

  // -- imports --------------------------------------------------------------

  ImportSummary import_detections(const std::filesystem::path& file) {
    const auto index = image_index();
    const auto known = key_set(index);
    auto detections = parse_detection_file(file, &known);
    return store_grouped(detections, index, [&](const PartitionKey& k, const auto& items) {
      store_.put_detections(k, items);
    });
  }

  ImportSummary import_labels(const std::filesystem::path& file) {
    const auto index = image_index();
    const auto known = key_set(index);
    auto labels = parse_label_file(file, &known);
    ImportSummary s = store_grouped(labels, index, [&](const PartitionKey& k, const auto& items) {
      store_.put_labels(k, items);
    });
    // A labeled partition with no boxes is still labeled: every image negative.
    for (const auto& key : store_.partitions()) {
      if (!s.per_partition.contains(key) && !store_.get(key, Store::kLabels)) {
        store_.put_labels(key, {});
      }
    }
    return s;
  }

  // -- events ---------------------------------------------------------------

  EventsSummary build_events(EventKind kind, double threshold) {
    EventsSummary s;
    s.kind = kind;
    s.threshold = threshold;
    for (const auto& key : store_.partitions()) {
      const auto all_images = store_.get_images(key);
      if (all_images.empty()) continue;
      const auto images = retained_sequence(all_images);
      std::unordered_set<std::string> retained_ids;
      for (const auto& img : images) retained_ids.insert(img.image_id);
      const EventContext ctx{key.facility_id, season_of(key)};
      std::vector<ApplicationEvent> events;
      if (kind == EventKind::kPredicted) {
        auto detections = store_.get_detections(key);
        s.ignored_boxes += std::erase_if(detections, [&](const Detection& d) {
          return !retained_ids.contains(d.image_id);
        });
        events = events_from_detections(ctx, detections, images, threshold);
      } else {
        auto labels = store_.get_labels(key);
        s.ignored_boxes += std::erase_if(labels, [&](const LabelBox& l) {
          return !retained_ids.contains(l.image_id);
        });
        events = events_from_labels(ctx, labels, images);
      }
      store_.put_events(key, kind, events);
      s.per_facility[key.facility_id] += events.size();
      s.total += events.size();
    }
    return s;
  }

  std::vector<ApplicationEvent> all_events(EventKind kind) const {
    std::vector<ApplicationEvent> out;
    for (const auto& key : store_.partitions()) {
      auto ev = store_.get_events(key, kind);
      out.insert(out.end(), ev.begin(), ev.end());
    }
    return out;
  }

  // -- evaluation -----------------------------------------------------------

  OrderedJson evaluate(const EvaluateOptions& opt) {
    std::vector<std::string> ids;
    for (const auto& f : facilities()) ids.push_back(f.facility_id);
    OrderedJson report;
    report["schema"] = "appwatch.evaluation/1";
    std::set<std::string> selected;
    if (opt.all_partitions) {
      report["subset"] = "all";
      selected.insert(ids.begin(), ids.end());
    } else {
      const SplitAssignment split = split_by_location(ids, opt.ratios, opt.split_seed);
      report["subset"] = "test";
      OrderedJson js;
      js["seed"] = opt.split_seed;
      js["train"] = split.count(Split::kTrain);
      js["val"] = split.count(Split::kVal);
      js["test"] = split.count(Split::kTest);
      OrderedJson assign;
      for (const auto& [id, s] : split.by_facility) assign[id] = std::string(to_string(s));
      js["assignment"] = assign;
      report["split"] = js;
      const auto test = split.members(Split::kTest);
      selected.insert(test.begin(), test.end());
    }

    std::vector<ImagePrediction> preds;
    std::map<std::string, bool> truth;
    std::vector<Detection> all_dets;
    std::vector<LabelBox> all_labels;
    std::vector<DetectionPartition> parts;
    std::size_t labeled_partitions = 0;
    for (const auto& key : store_.partitions()) {
      if (!selected.contains(key.facility_id)) continue;
      if (!store_.get(key, Store::kLabels)) continue;  // unlabeled
      ++labeled_partitions;
      const auto images = retained_sequence(store_.get_images(key));
      std::unordered_set<std::string> ids_here;
      for (const auto& img : images) ids_here.insert(img.image_id);
      auto dets = store_.get_detections(key);
      std::erase_if(dets, [&](const Detection& d) { return !ids_here.contains(d.image_id); });
      auto labels = store_.get_labels(key);
      std::erase_if(labels, [&](const LabelBox& l) { return !ids_here.contains(l.image_id); });
      for (const auto& p : image_predictions(images, dets, opt.curve_threshold)) preds.push_back(p);
      std::unordered_set<std::string> positive;
      for (const auto& l : labels) positive.insert(l.image_id);
      for (const auto& img : images) truth[img.image_id] = positive.contains(img.image_id);
      all_dets.insert(all_dets.end(), dets.begin(), dets.end());
      all_labels.insert(all_labels.end(), labels.begin(), labels.end());
      const EventContext ctx{key.facility_id, season_of(key)};
      parts.push_back(DetectionPartition{ctx, dets, images, events_from_labels(ctx, labels, images)});
    }
    report["labeled_partitions"] = labeled_partitions;
    report["images"] = preds.size();

    const CurveResult curves = classification_curves(preds, truth);
    std::size_t tp = 0, fp = 0, fn = 0;
    for (const auto& p : preds) {
      const bool predicted = p.label && p.score >= opt.decision_threshold;
      const bool actual = truth.at(p.image_id);
      if (predicted && actual) ++tp;
      if (predicted && !actual) ++fp;
      if (!predicted && actual) ++fn;
    }
    const FScore f05 = f_beta(tp, fp, fn, 0.5), f1 = f_beta(tp, fp, fn, 1.0),
                 f2 = f_beta(tp, fp, fn, 2.0);
    const APResult ap = average_precision(all_dets, all_labels, opt.iou_threshold);
    const EventCurveResult ev = event_pr_curve_from_detections(parts);

    OrderedJson t1;
    t1["pr_auc"] = curves.auc_pr;
    t1["pr_defined"] = curves.pr_defined;
    t1["roc_auc"] = curves.auc_roc;
    t1["roc_defined"] = curves.roc_defined;
    t1["decision_threshold"] = opt.decision_threshold;
    t1["tp"] = tp;
    t1["fp"] = fp;
    t1["fn"] = fn;
    t1["f0_5"] = f05.value;
    t1["f1"] = f1.value;
    t1["f2"] = f2.value;
    OrderedJson pts = OrderedJson::array();
    for (const auto& pt : curves.points) {
      pts.push_back(OrderedJson{{"threshold", pt.threshold},
                                {"precision", pt.precision},
                                {"recall", pt.recall},
                                {"fpr", pt.fpr}});
    }
    t1["curve"] = pts;
    report["task1_image_classification"] = t1;

    OrderedJson t2;
    t2["ap"] = ap.ap;
    t2["iou_threshold"] = opt.iou_threshold;
    t2["degenerate"] = ap.degenerate;
    t2["tp"] = ap.tp;
    t2["fp"] = ap.fp;
    t2["truth_boxes"] = ap.n_truth;
    report["task2_object_detection"] = t2;

    OrderedJson t3;
    t3["pr_auc"] = ev.auc_pr;
    t3["degenerate"] = ev.degenerate;
    t3["no_predictions"] = ev.no_predictions;
    std::size_t truth_events = 0;
    for (const auto& p : parts) truth_events += p.truth.size();
    t3["truth_events"] = truth_events;
    OrderedJson epts = OrderedJson::array();
    for (const auto& pt : ev.points) {
      epts.push_back(OrderedJson{{"threshold", pt.threshold}, {"precision", pt.precision},
                                 {"recall", pt.recall},       {"tp", pt.tp},
                                 {"fp", pt.fp},               {"fn", pt.fn},
                                 {"redundant", pt.redundant}});
    }
    t3["curve"] = epts;
    report["task3_event_detection"] = t3;

    OrderedJson summary;
    summary["image_pr_auc"] = curves.auc_pr;
    summary["image_roc_auc"] = curves.auc_roc;
    summary["f0.5@0.5"] = f05.value;
    summary["f1@0.5"] = f1.value;
    summary["f2@0.5"] = f2.value;
    summary["ap@0.5"] = ap.ap;
    summary["event_pr_auc"] = ev.auc_pr;
    report["summary"] = summary;

    store_.put_global(kEvaluation, Json::parse(report.dump()));
    return report;
  }

  // -- stratified review ----------------------------------------------------

  Stratification stratify(const std::vector<double>& edges, bool force = false) {
    guard_reset(force);
    const auto norm = normalize_edges(edges);
    std::vector<SeasonImage> images;
    std::vector<ImagePrediction> preds;
    for (const auto& key : store_.partitions()) {
      const auto seq = retained_sequence(store_.get_images(key));
      auto dets = store_.get_detections(key);
      for (const auto& p : image_predictions(seq, dets, norm.front())) preds.push_back(p);
      for (const auto& img : seq) images.push_back(SeasonImage{img, key.season_year});
    }
    Stratification strat = appwatch::stratify(all_events(EventKind::kPredicted), images, preds, norm);
    store_.put_global(kStratification, to_json(strat));
    store_.put_global(kSamples, Json::array());
    return strat;
  }

  std::optional<Stratification> stratification() const {
    auto j = store_.get_global(kStratification);
    if (!j) return std::nullopt;
    return stratification_from_json(*j);
  }

  Stratification require_stratification() const {
    auto s = stratification();
    if (!s) fail(ErrorCode::kNotFound, "no stratification yet; run `stratify` first");
    return *s;
  }

  SampleDraw sample(const std::vector<std::size_t>& sizes, std::uint64_t seed, bool force = false) {
    guard_reset(force);
    const Stratification strat = require_stratification();
    SampleDraw draw = draw_sample(strat, sizes, seed);
    Json arr = Json::array();
    for (const auto& b : draw.batches) arr.push_back(to_json(b));
    store_.put_global(kSamples, arr);
    return draw;
  }

  std::vector<SampleBatch> samples() const {
    std::vector<SampleBatch> out;
    if (auto j = store_.get_global(kSamples)) {
      for (const Json& b : *j) out.push_back(batch_from_json(b));
    }
    return out;
  }

  std::string manifest_csv() const {
    return sample_manifest_csv(require_stratification(), samples());
  }

  std::vector<Verdict> verdicts() const {
    std::vector<Verdict> out;
    if (auto j = store_.get_global(kVerdicts)) {
      for (const Json& v : *j) out.push_back(verdict_from_json(v));
    }
    return out;
  }

  /// Upserts verdicts by (unit, reviewer) after validating them against the
  /// current sample. Returns how many were new rather than replacements.
  std::size_t submit_verdicts(const std::vector<Verdict>& incoming) {
    const Stratification strat = require_stratification();
    const auto batches = samples();
    const auto sampled = sampled_units(strat, batches);
    for (const auto& v : incoming) check_verdict(sampled, v);
    std::size_t added = 0;
    store_.update_global(kVerdicts, [&](const Json& current) {
      std::vector<Verdict> all;
      if (current.is_array()) {
        for (const Json& v : current) all.push_back(verdict_from_json(v));
      }
      for (const auto& v : incoming) {
        const std::size_t before = all.size();
        upsert_verdict(all, v);
        added += all.size() - before;
      }
      std::sort(all.begin(), all.end(), [](const Verdict& a, const Verdict& b) {
        return std::tie(a.unit_id, a.reviewer_id) < std::tie(b.unit_id, b.reviewer_id);
      });
      Json arr = Json::array();
      for (const auto& v : all) arr.push_back(to_json(v));
      return arr;
    });
    return added;
  }

  PrevalenceEstimate current_estimate(double z = 1.0) const {
    return estimate(require_stratification(), samples(), verdicts(), z);
  }

  /// Canonical estimate document: the exact bytes both the CLI and the
  /// service emit.
  std::string estimate_document(double z = 1.0) const {
    return to_ordered_json(current_estimate(z)).dump(2) + "\n";
  }

  std::string persist_estimate(double z = 1.0) {
    const std::string doc = estimate_document(z);
    store_.put_global(kEstimate, Json::parse(doc));
    return doc;
  }

  Json calibration(double z = 1.0) const {
    Json rows = Json::array();
    for (const auto& r : calibration_report(require_stratification(), samples(), verdicts(), z)) {
      rows.push_back(to_json(r));
    }
    return rows;
  }

  // -- analytics ------------------------------------------------------------

  /// Builds every analytics table from the stored events of `kind`, stores
  /// them, and writes JSON/CSV/plot-data files under `out_dir` when given.
  Json report(EventKind kind, const std::filesystem::path& out_dir = {},
              double yoy_ratio = 1.5) {
    const auto events = all_events(kind);
    const auto keys = store_.partitions();
    Json bundle;
    bundle["schema"] = "appwatch.analytics/1";
    bundle["kind"] = std::string(to_string(kind));
    bundle["total_events"] = events.size();

    const EventCountTable counts = events_per_facility_season(events, keys);
    Json rows = Json::array();
    for (const auto& r : counts.rows) {
      rows.push_back(Json{{"facility_id", r.facility_id}, {"season_year", r.season_year},
                          {"count", r.count}, {"flagged", r.flagged}});
    }
    bundle["events_per_facility_season"] = Json{{"rows", rows},
                                                 {"mean", counts.mean},
                                                 {"percentile", counts.percentile_rank},
                                                 {"threshold", counts.threshold},
                                                 {"total", counts.total}};

    const auto gaps = pooled_gaps(events);
    const Ecdf ecdf = Ecdf::of(gaps);
    Json steps = Json::array();
    for (const auto& [x, f] : ecdf.steps()) steps.push_back(Json{{"gap_days", x}, {"ecdf", f}});
    bundle["inter_event_gaps"] = Json{{"gaps", gaps},
                                      {"ecdf", steps},
                                      {"within_1_day", ecdf(1.0)},
                                      {"within_7_days", ecdf(7.0)}};

    std::map<PartitionKey, std::vector<ApplicationEvent>> grouped;
    for (const auto& e : events) grouped[PartitionKey{e.facility_id, e.season.season_year}].push_back(e);
    Json cov = Json::array();
    std::vector<SeasonWindow> seasons;
    for (const auto& key : keys) {
      const SeasonWindow w = season_of(key);
      seasons.push_back(w);
      cov.push_back(Json{{"facility_id", key.facility_id},
                         {"season_year", key.season_year},
                         {"coverage", season_coverage(grouped[key], w)}});
    }
    bundle["season_coverage"] = Json{
        {"rows", cov},
        {"note", "coverage counts calendar days between member-image dates; image cadence bounds its resolution"}};

    const auto weekly = weekly_series(events, seasons);
    bundle["weekly_series"] = Json{{"week_counts", weekly}};

    std::vector<FacilitySeasonCount> all_counts = counts.rows;
    Json yoy = Json::array();
    for (const auto& f : yoy_outliers(all_counts, yoy_ratio)) {
      Json row{{"facility_id", f.facility_id}, {"latest_season", f.latest_season},
               {"latest_count", f.latest_count}, {"prior_mean", f.prior_mean},
               {"flagged", f.flagged}};
      row["ratio"] = std::isinf(f.ratio) ? Json("inf") : Json(f.ratio);
      yoy.push_back(row);
    }
    bundle["yoy_outliers"] = Json{{"ratio_threshold", yoy_ratio}, {"rows", yoy}};

    store_.put_global(kAnalytics, bundle);
    if (!out_dir.empty()) write_report_files(bundle, out_dir);
    return bundle;
  }

 private:
  void merge_facilities(const std::vector<FacilityRecord>& incoming) {
    std::map<std::string, FacilityRecord> merged;
    for (auto& f : facilities()) merged[f.facility_id] = f;
    for (const auto& f : incoming) merged[f.facility_id] = f;
    Json arr = Json::array();
    for (const auto& [id, f] : merged) arr.push_back(to_json(f));
    store_.put_global(kFacilities, arr);
  }

  /// Replacing the stratification or sample orphans recorded verdicts, so
  /// it needs `force`, which also discards them.
  void guard_reset(bool force) {
    if (verdicts().empty()) return;
    if (!force) {
      fail(ErrorCode::kConflict,
           "verdicts already recorded against the current sample; pass --force to discard them");
    }
    store_.put_global(kVerdicts, Json::array());
  }

  static std::unordered_set<std::string> key_set(
      const std::unordered_map<std::string, PartitionKey>& index) {
    std::unordered_set<std::string> out;
    for (const auto& [id, key] : index) out.insert(id);
    return out;
  }

  template <typename Item, typename Put>
  ImportSummary store_grouped(const std::vector<Item>& items,
                              const std::unordered_map<std::string, PartitionKey>& index,
                              Put put) {
    std::map<PartitionKey, std::vector<Item>> grouped;
    for (const auto& item : items) grouped[index.at(item.image_id)].push_back(item);
    ImportSummary s;
    s.records = items.size();
    for (const auto& [key, group] : grouped) {
      put(key, group);
      s.per_partition[key] = group.size();
    }
    return s;
  }

  static void write_report_files(const Json& bundle, const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    auto write = [&](const std::string& name, const std::string& text) {
      std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
      if (!out) fail(ErrorCode::kIntegrity, "cannot write '" + (dir / name).string() + "'");
      out << text;
    };
    write("analytics.json", bundle.dump(2) + "\n");
    std::ostringstream counts;
    counts << "facility_id,season_year,count,flagged\n";
    for (const auto& r : bundle["events_per_facility_season"]["rows"]) {
      counts << r["facility_id"].get<std::string>() << ',' << r["season_year"] << ','
             << r["count"] << ',' << (r["flagged"].get<bool>() ? "true" : "false") << '\n';
    }
    write("events_per_facility_season.csv", counts.str());
    std::ostringstream ecdf;
    ecdf << "gap_days,ecdf\n";
    for (const auto& s : bundle["inter_event_gaps"]["ecdf"]) ecdf << s["gap_days"] << ',' << s["ecdf"] << '\n';
    write("gap_ecdf.csv", ecdf.str());
    std::ostringstream cov;
    cov << "facility_id,season_year,coverage\n";
    for (const auto& r : bundle["season_coverage"]["rows"]) {
      cov << r["facility_id"].get<std::string>() << ',' << r["season_year"] << ',' << r["coverage"] << '\n';
    }
    write("season_coverage.csv", cov.str());
    std::ostringstream weekly;
    weekly << "week,events\n";
    const auto& w = bundle["weekly_series"]["week_counts"];
    for (std::size_t i = 0; i < w.size(); ++i) weekly << i + 1 << ',' << w[i] << '\n';
    write("weekly_series.csv", weekly.str());
    std::ostringstream yoy;
    yoy << "facility_id,latest_season,latest_count,prior_mean,ratio,flagged\n";
    for (const auto& r : bundle["yoy_outliers"]["rows"]) {
      yoy << r["facility_id"].get<std::string>() << ',' << r["latest_season"] << ','
          << r["latest_count"] << ',' << r["prior_mean"] << ','
          << (r["ratio"].is_string() ? r["ratio"].get<std::string>() : r["ratio"].dump()) << ','
          << (r["flagged"].get<bool>() ? "true" : "false") << '\n';
    }
    write("yoy_outliers.csv", yoy.str());
  }

  Store store_;
};

}  // namespace appwatch
