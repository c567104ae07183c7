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

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "appwatch/error.hpp"
#include "appwatch/json_io.hpp"
#include "appwatch/model.hpp"

namespace appwatch {

/// Image-level classification derived from the detections on one image.
struct ImagePrediction {
  std::string image_id;
  bool label = false;
  double score = 0.0;

  friend bool operator==(const ImagePrediction&, const ImagePrediction&) = default;
};

/// Drops detections below `threshold`; the score is the highest surviving
/// confidence, or 0 with a negative label when nothing survives.
inline ImagePrediction image_score(std::string_view image_id,
                                   std::span<const Detection> detections,
                                   double threshold) {
  ImagePrediction out{std::string(image_id), false, 0.0};
  for (const Detection& d : detections) {
    if (d.image_id != image_id) {
      fail(ErrorCode::kContract, "image_score given detection for '" + d.image_id +
                                     "' while scoring '" + std::string(image_id) + "'");
    }
    if (d.confidence < threshold) continue;
    out.label = true;
    out.score = std::max(out.score, d.confidence);
  }
  return out;
}

inline std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

/// Content-addressed event identifier, stable across runs and platforms.
inline std::string make_event_id(EventKind kind, std::string_view facility_id,
                                 int season_year, int k1, int k2,
                                 const GeoBox& union_box) {
  auto cm = [](double v) { return std::to_string(std::llround(v * 100.0)); };
  std::string key;
  key.append(facility_id).append("|").append(std::to_string(season_year));
  key.append("|").append(std::to_string(k1)).append("|").append(std::to_string(k2));
  key.append("|").append(cm(union_box.min_e)).append(",").append(cm(union_box.min_n));
  key.append(",").append(cm(union_box.max_e)).append(",").append(cm(union_box.max_n));
  return std::string(kind == EventKind::kPredicted ? "pe-" : "gt-") +
         hex64(fnv1a64(key));
}

namespace detail {

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kNotFound, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Json parse_json_text(std::string_view text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t upto = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < upto; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    fail(ErrorCode::kParse, source + ":" + std::to_string(line) + ":" +
                                std::to_string(col) + ": malformed JSON (offset " +
                                std::to_string(e.byte) + ")");
  }
}

inline std::string record_name(const std::string& source, std::size_t index,
                               const Json& rec) {
  std::string s = source + " record " + std::to_string(index);
  if (rec.is_object() && rec.contains("image_id") && rec["image_id"].is_string()) {
    s += " (image_id '" + rec["image_id"].get<std::string>() + "')";
  }
  return s;
}

inline void check_known(const std::string& image_id,
                        const std::unordered_set<std::string>* known,
                        const std::string& where) {
  if (known != nullptr && !known->contains(image_id)) {
    fail(ErrorCode::kReferential, where + ": unknown image_id '" + image_id + "'");
  }
}

}  // namespace detail

/// Parses the detection wire format: a JSON array of
/// {image_id, box:[min_e,min_n,max_e,max_n], confidence, model_id}.
/// Out-of-range confidences are rejected rather than clamped. When
/// `known_images` is given, every image_id must be in it.
inline std::vector<Detection> parse_detections(
    std::string_view text, const std::string& source = "<detections>",
    const std::unordered_set<std::string>* known_images = nullptr) {
  const Json doc = detail::parse_json_text(text, source);
  if (!doc.is_array()) fail(ErrorCode::kValidation, source + ": expected a JSON array");
  std::vector<Detection> out;
  out.reserve(doc.size());
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const Json& rec = doc[i];
    const std::string where = detail::record_name(source, i, rec);
    Detection d;
    d.image_id = json_detail::require<std::string>(rec, "image_id", where);
    if (!rec.contains("box")) fail(ErrorCode::kValidation, where + ": missing field 'box'");
    d.box = box_from_json(rec["box"], where);
    d.confidence = json_detail::require<double>(rec, "confidence", where);
    if (!(d.confidence >= 0.0 && d.confidence <= 1.0)) {
      fail(ErrorCode::kValidation,
           where + ": confidence " + rec["confidence"].dump() + " outside [0,1]");
    }
    d.model_id = json_detail::require<std::string>(rec, "model_id", where);
    detail::check_known(d.image_id, known_images, where);
    out.push_back(std::move(d));
  }
  return out;
}

inline std::vector<Detection> parse_detection_file(
    const std::filesystem::path& path,
    const std::unordered_set<std::string>* known_images = nullptr) {
  return parse_detections(detail::read_text_file(path), path.string(), known_images);
}

/// Ground-truth labels: like detections minus confidence, plus a non-empty
/// annotator_ids array.
inline std::vector<LabelBox> parse_labels(
    std::string_view text, const std::string& source = "<labels>",
    const std::unordered_set<std::string>* known_images = nullptr) {
  const Json doc = detail::parse_json_text(text, source);
  if (!doc.is_array()) fail(ErrorCode::kValidation, source + ": expected a JSON array");
  std::vector<LabelBox> out;
  out.reserve(doc.size());
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const Json& rec = doc[i];
    const std::string where = detail::record_name(source, i, rec);
    LabelBox l;
    l.image_id = json_detail::require<std::string>(rec, "image_id", where);
    if (!rec.contains("box")) fail(ErrorCode::kValidation, where + ": missing field 'box'");
    l.box = box_from_json(rec["box"], where);
    const auto ids = json_detail::require<std::vector<std::string>>(rec, "annotator_ids", where);
    if (ids.empty()) fail(ErrorCode::kValidation, where + ": annotator_ids is empty");
    l.annotator_ids.insert(ids.begin(), ids.end());
    detail::check_known(l.image_id, known_images, where);
    out.push_back(std::move(l));
  }
  return out;
}

inline std::vector<LabelBox> parse_label_file(
    const std::filesystem::path& path,
    const std::unordered_set<std::string>* known_images = nullptr) {
  return parse_labels(detail::read_text_file(path), path.string(), known_images);
}

inline std::string serialize_detections(const std::vector<Detection>& detections) {
  return to_json_array(detections).dump(2);
}

inline std::string serialize_labels(const std::vector<LabelBox>& labels) {
  return to_json_array(labels).dump(2);
}

/// Groups detections by image, keeping input order inside each group.
template <typename Box>
std::map<std::string, std::vector<Box>> group_by_image(const std::vector<Box>& items) {
  std::map<std::string, std::vector<Box>> out;
  for (const Box& item : items) out[item.image_id].push_back(item);
  return out;
}

/// Image-level predictions for every image in `images`, in order.
inline std::vector<ImagePrediction> image_predictions(
    const std::vector<ImageRecord>& images, const std::vector<Detection>& detections,
    double threshold) {
  const auto grouped = group_by_image(detections);
  std::vector<ImagePrediction> out;
  out.reserve(images.size());
  for (const ImageRecord& img : images) {
    auto it = grouped.find(img.image_id);
    if (it == grouped.end()) {
      out.push_back(ImagePrediction{img.image_id, false, 0.0});
    } else {
      out.push_back(image_score(img.image_id, it->second, threshold));
    }
  }
  return out;
}

}  // namespace appwatch
