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
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "appwatch/dates.hpp"
#include "appwatch/error.hpp"
#include "appwatch/geometry.hpp"
#include "appwatch/projection.hpp"

namespace appwatch {

struct FacilityRecord {
  std::string facility_id;
  LonLat centroid;
  std::optional<std::string> name;

  friend bool operator==(const FacilityRecord& a, const FacilityRecord& b) {
    return a.facility_id == b.facility_id && a.centroid.lon == b.centroid.lon &&
           a.centroid.lat == b.centroid.lat && a.name == b.name;
  }
};

/// The facility's local metric frame: transverse Mercator centered on the
/// facility itself.
inline LocalTransverseMercator facility_frame(const FacilityRecord& facility) {
  return LocalTransverseMercator(facility.centroid);
}

inline ProjectedPoint project_centroid(const FacilityRecord& facility) {
  return facility_frame(facility).forward(facility.centroid);
}

struct QualityMeta {
  double cloud_fraction = 0.0;
  bool clarity_ok = true;
  bool artifact_free = true;
  bool snow_present = false;
  bool footprint_complete = true;

  friend bool operator==(const QualityMeta&, const QualityMeta&) = default;
};

struct ImageRecord {
  std::string image_id;
  std::string facility_id;
  Timestamp captured_at{};
  GeoBox aoi;
  int pixel_width = 0;
  int pixel_height = 0;
  double resolution = 0.0;  // meters per pixel
  QualityMeta quality;
  bool retained = false;

  Date date() const { return date_of(captured_at); }

  void validate() const {
    auto bad = [&](const std::string& why) {
      fail(ErrorCode::kValidation, "image '" + image_id + "': " + why);
    };
    if (image_id.empty()) fail(ErrorCode::kValidation, "image with empty image_id");
    if (!(resolution > 0.0) || !std::isfinite(resolution)) bad("resolution must be > 0");
    if (pixel_width <= 0 || pixel_height <= 0) bad("pixel dimensions must be > 0");
    if (!aoi.valid()) bad("aoi is not a valid box");
    if (std::abs(aoi.width() - pixel_width * resolution) > resolution ||
        std::abs(aoi.height() - pixel_height * resolution) > resolution) {
      bad("aoi size disagrees with pixel dimensions x resolution");
    }
    if (!(quality.cloud_fraction >= 0.0 && quality.cloud_fraction <= 1.0)) {
      bad("cloud_fraction outside [0,1]");
    }
  }

  friend bool operator==(const ImageRecord&, const ImageRecord&) = default;
};

/// Strict total order on images of one (facility, season): capture time,
/// then image_id.
inline bool image_order(const ImageRecord& a, const ImageRecord& b) {
  if (a.captured_at != b.captured_at) return a.captured_at < b.captured_at;
  return a.image_id < b.image_id;
}

inline void sort_images(std::vector<ImageRecord>& images) {
  std::sort(images.begin(), images.end(), image_order);
}

struct Detection {
  std::string image_id;
  GeoBox box;
  double confidence = 0.0;
  std::string model_id;

  friend bool operator==(const Detection&, const Detection&) = default;
};

struct LabelBox {
  std::string image_id;
  GeoBox box;
  std::set<std::string> annotator_ids;

  friend bool operator==(const LabelBox&, const LabelBox&) = default;
};

enum class EventKind { kGroundTruth, kPredicted };

constexpr std::string_view to_string(EventKind kind) {
  return kind == EventKind::kGroundTruth ? "ground_truth" : "predicted";
}

inline EventKind parse_event_kind(std::string_view s) {
  if (s == "ground_truth" || s == "truth") return EventKind::kGroundTruth;
  if (s == "predicted") return EventKind::kPredicted;
  fail(ErrorCode::kValidation, "unknown event kind '" + std::string(s) + "'");
}

/// A run of consecutive retained images [start_index, end_index] (1-based)
/// whose boxes chain together, with the envelope of every member box.
struct ApplicationEvent {
  std::string event_id;
  std::string facility_id;
  SeasonWindow season;
  int start_index = 0;
  int end_index = 0;
  Date start_date{};
  Date end_date{};
  GeoBox union_box;
  std::vector<std::string> member_image_ids;
  EventKind kind = EventKind::kGroundTruth;
  double score = 0.0;  // predicted events only

  int length() const { return end_index - start_index + 1; }

  friend bool operator==(const ApplicationEvent&, const ApplicationEvent&) = default;
};

/// Identifies one monitored (facility, season) partition.
struct PartitionKey {
  std::string facility_id;
  int season_year = 0;

  std::string to_string() const {
    return facility_id + "/" + std::to_string(season_year);
  }

  friend auto operator<=>(const PartitionKey&, const PartitionKey&) = default;
};

}  // namespace appwatch
