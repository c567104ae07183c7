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

#include <string>
#include <vector>

#include "appwatch/dates.hpp"
#include "appwatch/error.hpp"
#include "appwatch/geometry.hpp"
#include "appwatch/model.hpp"
#include "json.hpp"

namespace appwatch {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

namespace json_detail {

template <typename T>
T require(const Json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) {
    fail(ErrorCode::kValidation, where + ": missing field '" + key + "'");
  }
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    fail(ErrorCode::kValidation, where + ": field '" + key + "' has the wrong type");
  }
}

}  // namespace json_detail

inline Json box_to_json(const GeoBox& b) {
  return Json::array({b.min_e, b.min_n, b.max_e, b.max_n});
}

inline GeoBox box_from_json(const Json& j, const std::string& where,
                            std::string crs_id = {}) {
  if (!j.is_array() || j.size() != 4) {
    fail(ErrorCode::kValidation, where + ": box must be [min_e,min_n,max_e,max_n]");
  }
  for (const auto& v : j) {
    if (!v.is_number()) fail(ErrorCode::kValidation, where + ": box holds a non-number");
  }
  GeoBox box{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(),
             j[3].get<double>(), std::move(crs_id)};
  if (!box.valid()) {
    fail(ErrorCode::kValidation, where + ": box must have finite coordinates and positive area");
  }
  return box;
}

inline Json to_json(const FacilityRecord& f) {
  Json j{{"facility_id", f.facility_id},
         {"longitude", f.centroid.lon},
         {"latitude", f.centroid.lat}};
  j["name"] = f.name ? Json(*f.name) : Json(nullptr);
  return j;
}

inline FacilityRecord facility_from_json(const Json& j) {
  const std::string where = "facility";
  FacilityRecord f;
  f.facility_id = json_detail::require<std::string>(j, "facility_id", where);
  f.centroid.lon = json_detail::require<double>(j, "longitude", where);
  f.centroid.lat = json_detail::require<double>(j, "latitude", where);
  if (j.contains("name") && j["name"].is_string()) f.name = j["name"].get<std::string>();
  return f;
}

inline Json to_json(const SeasonWindow& s) {
  return Json{{"season_year", s.season_year},
              {"start_date", format_date(s.start_date)},
              {"end_date", format_date(s.end_date)}};
}

inline SeasonWindow season_from_json(const Json& j) {
  const std::string where = "season";
  return SeasonWindow::make(
      json_detail::require<int>(j, "season_year", where),
      parse_date(json_detail::require<std::string>(j, "start_date", where)),
      parse_date(json_detail::require<std::string>(j, "end_date", where)));
}

/// Scene metadata document shape: the mock provider's file format and the
/// HTTP provider's catalog entries.
inline Json scene_to_json(const ImageRecord& r) {
  return Json{{"image_id", r.image_id},
              {"captured_at", format_rfc3339(r.captured_at)},
              {"cloud_fraction", r.quality.cloud_fraction},
              {"clarity_ok", r.quality.clarity_ok},
              {"artifact_free", r.quality.artifact_free},
              {"snow_present", r.quality.snow_present},
              {"footprint_complete", r.quality.footprint_complete},
              {"resolution_m", r.resolution},
              {"width_px", r.pixel_width},
              {"height_px", r.pixel_height},
              {"aoi", box_to_json(r.aoi)},
              {"crs_id", r.aoi.crs_id}};
}

inline ImageRecord scene_from_json(const Json& j) {
  using json_detail::require;
  std::string where = "scene";
  if (j.is_object() && j.contains("image_id") && j["image_id"].is_string()) {
    where += " '" + j["image_id"].get<std::string>() + "'";
  }
  ImageRecord r;
  r.image_id = require<std::string>(j, "image_id", where);
  r.captured_at = parse_rfc3339(require<std::string>(j, "captured_at", where));
  r.quality.cloud_fraction = require<double>(j, "cloud_fraction", where);
  r.quality.clarity_ok = require<bool>(j, "clarity_ok", where);
  r.quality.artifact_free = require<bool>(j, "artifact_free", where);
  r.quality.snow_present = require<bool>(j, "snow_present", where);
  r.quality.footprint_complete = require<bool>(j, "footprint_complete", where);
  r.resolution = require<double>(j, "resolution_m", where);
  r.pixel_width = require<int>(j, "width_px", where);
  r.pixel_height = require<int>(j, "height_px", where);
  r.aoi = box_from_json(j.at("aoi"), where, require<std::string>(j, "crs_id", where));
  r.validate();
  return r;
}

/// Catalog entry: scene metadata plus ownership and the retention flag.
inline Json to_json(const ImageRecord& r) {
  Json j = scene_to_json(r);
  j["facility_id"] = r.facility_id;
  j["retained"] = r.retained;
  return j;
}

inline ImageRecord image_from_json(const Json& j) {
  ImageRecord r = scene_from_json(j);
  r.facility_id = json_detail::require<std::string>(j, "facility_id", "image");
  r.retained = json_detail::require<bool>(j, "retained", "image");
  return r;
}

inline Json to_json(const Detection& d) {
  return Json{{"image_id", d.image_id},
              {"box", box_to_json(d.box)},
              {"confidence", d.confidence},
              {"model_id", d.model_id}};
}

inline Json to_json(const LabelBox& l) {
  return Json{{"image_id", l.image_id},
              {"box", box_to_json(l.box)},
              {"annotator_ids", Json(l.annotator_ids)}};
}

inline Json to_json(const ApplicationEvent& e) {
  Json j{{"event_id", e.event_id},
         {"facility_id", e.facility_id},
         {"season", to_json(e.season)},
         {"start_index", e.start_index},
         {"end_index", e.end_index},
         {"start_date", format_date(e.start_date)},
         {"end_date", format_date(e.end_date)},
         {"union_box", box_to_json(e.union_box)},
         {"crs_id", e.union_box.crs_id},
         {"member_image_ids", e.member_image_ids},
         {"kind", std::string(to_string(e.kind))}};
  if (e.kind == EventKind::kPredicted) j["score"] = e.score;
  return j;
}

inline ApplicationEvent event_from_json(const Json& j) {
  using json_detail::require;
  const std::string where = "event";
  ApplicationEvent e;
  e.event_id = require<std::string>(j, "event_id", where);
  e.facility_id = require<std::string>(j, "facility_id", where);
  e.season = season_from_json(j.at("season"));
  e.start_index = require<int>(j, "start_index", where);
  e.end_index = require<int>(j, "end_index", where);
  e.start_date = parse_date(require<std::string>(j, "start_date", where));
  e.end_date = parse_date(require<std::string>(j, "end_date", where));
  e.union_box = box_from_json(j.at("union_box"), where,
                              j.value("crs_id", std::string{}));
  e.member_image_ids = require<std::vector<std::string>>(j, "member_image_ids", where);
  e.kind = parse_event_kind(require<std::string>(j, "kind", where));
  if (e.kind == EventKind::kPredicted) e.score = require<double>(j, "score", where);
  return e;
}

template <typename T>
Json to_json_array(const std::vector<T>& items) {
  Json arr = Json::array();
  for (const auto& item : items) arr.push_back(to_json(item));
  return arr;
}

}  // namespace appwatch
