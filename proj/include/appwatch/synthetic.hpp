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
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "appwatch/detection_store.hpp"
#include "appwatch/ingestion.hpp"
#include "appwatch/json_io.hpp"
#include "appwatch/random.hpp"

namespace appwatch {

/// Knobs for a planted-event season. Events are spread round-robin over
/// facilities and never touch each other in time, so the planted count is
/// also the number of ground-truth events.
struct SyntheticOptions {
  std::size_t facilities = 10;
  std::size_t events = 20;
  int season_year = 2019;
  int cadence_days = 3;
  int cloudy_every = 7;       // every n-th capture is cloudy; 0 disables
  double dropout = 0.0;       // fraction of events the detector misses entirely
  std::uint64_t seed = 1;
  double resolution = 3.0;
  std::string model_id = "synthetic-detector";
};

struct PlantedEvent {
  std::string facility_id;
  std::vector<std::string> image_ids;  // retained images, in order
  bool detected = true;
};

struct SyntheticSeason {
  SyntheticOptions options;
  SeasonWindow window;
  std::vector<FacilityRecord> facilities;
  std::vector<ImageRecord> scenes;  // every capture, retained flag unset
  std::vector<PlantedEvent> planted;
  std::vector<LabelBox> labels;
  std::vector<Detection> detections;

  std::size_t detected_count() const {
    std::size_t n = 0;
    for (const auto& p : planted) n += p.detected ? 1 : 0;
    return n;
  }
};

inline SyntheticSeason make_synthetic_season(const SyntheticOptions& opt) {
  if (opt.facilities == 0) fail(ErrorCode::kValidation, "need at least one facility");
  if (!(opt.dropout >= 0.0 && opt.dropout <= 1.0)) {
    fail(ErrorCode::kValidation, "dropout must lie in [0,1]");
  }
  SyntheticSeason out;
  out.options = opt;
  out.window = SeasonWindow::winter(opt.season_year);
  Rng rng(opt.seed);

  const FilterConfig default_filter;
  std::vector<std::vector<std::string>> retained_ids(opt.facilities);
  std::vector<GeoBox> aois;
  for (std::size_t f = 0; f < opt.facilities; ++f) {
    char id[32];
    std::snprintf(id, sizeof id, "F%03zu", f + 1);
    FacilityRecord fac{id, LonLat{-90.0 + 0.05 * double(f % 40), 43.0 + 0.04 * double(f / 40)},
                       std::string("Synthetic dairy ") + id};
    out.facilities.push_back(fac);
    const GeoBox aoi = make_aoi(fac);
    aois.push_back(aoi);
    const int px = static_cast<int>(std::lround(aoi.width() / opt.resolution));
    int n = 0;
    for (Date d = out.window.start_date; d < out.window.end_date;
         d += std::chrono::days{opt.cadence_days}, ++n) {
      ImageRecord img;
      char buf[64];
      std::snprintf(buf, sizeof buf, "%s-%s", id, format_date(d).c_str());
      img.image_id = buf;
      img.facility_id = id;
      img.captured_at = Timestamp{d} + std::chrono::hours{17};
      img.aoi = aoi;
      img.pixel_width = px;
      img.pixel_height = px;
      img.resolution = opt.resolution;
      img.quality.snow_present = true;
      img.quality.cloud_fraction =
          opt.cloudy_every > 0 && (n + int(f)) % opt.cloudy_every == opt.cloudy_every - 1 ? 0.6 : 0.02;
      if (default_filter.passes(img.quality)) retained_ids[f].push_back(img.image_id);
      out.scenes.push_back(img);
    }
  }

  // Event j of a facility occupies retained positions starting at
  // 1 + j * 6 with length 2..4, leaving at least two boxless images between.
  std::vector<std::size_t> per_facility(opt.facilities, 0);
  const auto dropped_idx =
      sample_indices(opt.events, static_cast<std::size_t>(std::llround(double(opt.events) * opt.dropout)), rng);
  const std::set<std::size_t> dropped(dropped_idx.begin(), dropped_idx.end());
  for (std::size_t k = 0; k < opt.events; ++k) {
    const std::size_t f = k % opt.facilities;
    const std::size_t j = per_facility[f]++;
    const std::size_t len = 2 + static_cast<std::size_t>(uniform_below(rng, 3));
    const std::size_t start = 1 + j * 6;
    if (start + len > retained_ids[f].size()) {
      fail(ErrorCode::kValidation, "too many events for the season length");
    }
    PlantedEvent ev;
    ev.facility_id = out.facilities[f].facility_id;
    ev.detected = !dropped.contains(k);
    const GeoBox& aoi = aois[f];
    const double w = 40.0 + 40.0 * uniform_unit(rng);
    const double h = 40.0 + 40.0 * uniform_unit(rng);
    const double e0 = aoi.min_e + 100.0 + (aoi.width() - 300.0) * uniform_unit(rng);
    const double n0 = aoi.min_n + 100.0 + (aoi.height() - 300.0) * uniform_unit(rng);
    for (std::size_t i = 0; i < len; ++i) {
      const std::string& image_id = retained_ids[f][start + i];
      ev.image_ids.push_back(image_id);
      // Small drift keeps consecutive boxes overlapping.
      const double de = 5.0 * uniform_unit(rng), dn = 5.0 * uniform_unit(rng);
      const GeoBox box{e0 + de, n0 + dn, e0 + de + w, n0 + dn + h, aoi.crs_id};
      out.labels.push_back(LabelBox{image_id, box, {"annotator-1"}});
      if (ev.detected) {
        const double conf = std::round((0.55 + 0.44 * uniform_unit(rng)) * 1000.0) / 1000.0;
        out.detections.push_back(Detection{image_id, box, conf, opt.model_id});
      }
    }
    out.planted.push_back(std::move(ev));
  }
  return out;
}

/// Writes the season as CLI inputs: facilities.csv, scenes/<facility>/*.json,
/// detections.json and labels.json.
inline void write_synthetic_season(const SyntheticSeason& s, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  auto write = [](const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::kIntegrity, "cannot write '" + path.string() + "'");
    out << text;
  };
  std::string csv = "facility_id,longitude,latitude,name\n";
  for (const auto& f : s.facilities) {
    char line[160];
    std::snprintf(line, sizeof line, "%s,%.6f,%.6f,%s\n", f.facility_id.c_str(), f.centroid.lon,
                  f.centroid.lat, f.name.value_or("").c_str());
    csv += line;
  }
  write(dir / "facilities.csv", csv);
  for (const auto& img : s.scenes) {
    const fs::path sub = dir / "scenes" / img.facility_id;
    fs::create_directories(sub);
    write(sub / (img.image_id + ".json"), scene_to_json(img).dump(2) + "\n");
  }
  write(dir / "detections.json", serialize_detections(s.detections));
  write(dir / "labels.json", serialize_labels(s.labels));
}

}  // namespace appwatch
