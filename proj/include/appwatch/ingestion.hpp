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
#include <filesystem>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <boost/tokenizer.hpp>

#include "appwatch/dates.hpp"
#include "appwatch/detection_store.hpp"
#include "appwatch/error.hpp"
#include "appwatch/geometry.hpp"
#include "appwatch/json_io.hpp"
#include "appwatch/model.hpp"

namespace appwatch {

/// Square area of interest of side `side` meters centered on the facility,
/// in the facility's local frame.
inline GeoBox make_aoi(const FacilityRecord& facility, double side = 1000.0) {
  if (!(side > 0.0) || !std::isfinite(side)) {
    fail(ErrorCode::kValidation, "aoi side must be positive");
  }
  const ProjectedPoint c = project_centroid(facility);
  const double h = side / 2.0;
  return GeoBox{c.easting - h, c.northing - h, c.easting + h, c.northing + h, c.crs_id};
}

struct FilterConfig {
  double max_cloud_fraction = 0.1;
  bool require_clarity = true;
  bool require_artifact_free = true;
  bool require_complete_footprint = true;
  bool require_snow = false;

  bool passes(const QualityMeta& q) const {
    if (q.cloud_fraction > max_cloud_fraction) return false;
    if (require_clarity && !q.clarity_ok) return false;
    if (require_artifact_free && !q.artifact_free) return false;
    if (require_complete_footprint && !q.footprint_complete) return false;
    if (require_snow && !q.snow_present) return false;
    return true;
  }

  void validate() const {
    if (!(max_cloud_fraction >= 0.0 && max_cloud_fraction <= 1.0)) {
      fail(ErrorCode::kValidation, "max_cloud_fraction must lie in [0,1]");
    }
  }
};

/// Reads the `[filter]` section of a key=value config file. Missing keys
/// keep their defaults; an absent section yields the default config.
inline FilterConfig load_filter_config(std::istream& in) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    fail(ErrorCode::kParse, std::string("config: ") + e.what());
  }
  FilterConfig cfg;
  const auto section = tree.get_child_optional("filter");
  if (!section) return cfg;
  // get<T> without a default throws on values that do not convert.
  auto read = [&](const char* key, auto& field) {
    if (section->get_child_optional(key)) field = section->get<std::decay_t<decltype(field)>>(key);
  };
  try {
    read("max_cloud_fraction", cfg.max_cloud_fraction);
    read("require_clarity", cfg.require_clarity);
    read("require_artifact_free", cfg.require_artifact_free);
    read("require_complete_footprint", cfg.require_complete_footprint);
    read("require_snow", cfg.require_snow);
  } catch (const boost::property_tree::ptree_bad_data& e) {
    fail(ErrorCode::kParse, std::string("config [filter]: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

inline FilterConfig load_filter_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kNotFound, "cannot open config '" + path.string() + "'");
  return load_filter_config(in);
}

struct FilterResult {
  std::vector<ImageRecord> records;  // input order, `retained` flags set
  std::size_t retained_count = 0;

  double retention_ratio() const {
    return records.empty() ? 0.0 : double(retained_count) / double(records.size());
  }

  std::vector<ImageRecord> retained() const {
    std::vector<ImageRecord> out;
    out.reserve(retained_count);
    for (const auto& r : records) {
      if (r.retained) out.push_back(r);
    }
    return out;
  }
};

/// Applies the quality filter to one (facility, season) catalog.
inline FilterResult filter_images(std::vector<ImageRecord> records, const FilterConfig& cfg) {
  cfg.validate();
  FilterResult out;
  for (auto& r : records) {
    r.retained = cfg.passes(r.quality);
    if (r.retained) ++out.retained_count;
  }
  out.records = std::move(records);
  return out;
}

struct ProviderQuery {
  GeoBox aoi;
  SeasonWindow window;
  double max_cloud = 1.0;
};

struct CatalogResult {
  std::vector<ImageRecord> records;
  std::size_t skipped = 0;
  std::vector<std::string> warnings;
};

/// Source of scene metadata for an area and time window.
class ImageryProvider {
 public:
  virtual ~ImageryProvider() = default;
  virtual CatalogResult fetch(const ProviderQuery& query) = 0;
  virtual std::string describe() const = 0;
};

namespace detail {

/// Shared post-processing: keep scenes that overlap the query in space and
/// time, drop duplicates, sort into sequence order.
inline void finish_catalog(CatalogResult& result, const ProviderQuery& query) {
  std::erase_if(result.records, [&](const ImageRecord& r) {
    if (!query.aoi.crs_id.empty() && r.aoi.crs_id != query.aoi.crs_id) return true;
    if (!intersects(r.aoi, query.aoi)) return true;
    if (!query.window.contains(r.captured_at)) return true;
    return r.quality.cloud_fraction > query.max_cloud;
  });
  sort_images(result.records);
  std::set<std::string> seen;
  std::erase_if(result.records, [&](const ImageRecord& r) {
    if (seen.insert(r.image_id).second) return false;
    ++result.skipped;
    result.warnings.push_back("duplicate image_id '" + r.image_id + "' dropped");
    return true;
  });
}

}  // namespace detail

/// Mock provider reading one scene-metadata JSON document per file from a
/// directory. Malformed documents are skipped and counted.
class FilesystemProvider : public ImageryProvider {
 public:
  explicit FilesystemProvider(std::filesystem::path dir) : dir_(std::move(dir)) {}

  CatalogResult fetch(const ProviderQuery& query) override {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir_)) {
      fail(ErrorCode::kProviderIo, "scene directory '" + dir_.string() + "' does not exist");
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir_)) {
      if (entry.is_regular_file() && entry.path().extension() == ".json") {
        files.push_back(entry.path());
      }
    }
    std::sort(files.begin(), files.end());
    CatalogResult result;
    for (const auto& file : files) {
      try {
        const Json doc = detail::parse_json_text(detail::read_text_file(file), file.string());
        result.records.push_back(scene_from_json(doc));
      } catch (const Error& e) {
        ++result.skipped;
        result.warnings.push_back(file.filename().string() + ": " + e.what());
      }
    }
    detail::finish_catalog(result, query);
    return result;
  }

  std::string describe() const override { return "mock:" + dir_.string(); }

 private:
  std::filesystem::path dir_;
};

/// Catalog of one facility for one season.
inline CatalogResult fetch_catalog(ImageryProvider& provider, const ProviderQuery& query,
                                   const std::string& facility_id) {
  CatalogResult result = provider.fetch(query);
  for (auto& r : result.records) r.facility_id = facility_id;
  return result;
}

/// Facility list: CSV with header `facility_id,longitude,latitude,name`.
inline std::vector<FacilityRecord> parse_facilities_csv(std::istream& in,
                                                        const std::string& source = "facilities") {
  using Tokenizer = boost::tokenizer<boost::escaped_list_separator<char>>;
  auto split = [&](const std::string& line, std::size_t line_no) {
    try {
      Tokenizer tok(line);
      return std::vector<std::string>(tok.begin(), tok.end());
    } catch (const boost::escaped_list_error& e) {
      fail(ErrorCode::kParse, source + ":" + std::to_string(line_no) + ": " + e.what());
    }
  };
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) return true;
    }
    return false;
  };
  if (!next_line()) fail(ErrorCode::kParse, source + ": empty facility list");
  const auto header = split(line, line_no);
  const std::vector<std::string> expected{"facility_id", "longitude", "latitude", "name"};
  if (header != expected) {
    fail(ErrorCode::kParse, source + ":1: header must be facility_id,longitude,latitude,name");
  }
  std::vector<FacilityRecord> out;
  std::set<std::string> ids;
  while (next_line()) {
    const auto cells = split(line, line_no);
    const std::string where = source + ":" + std::to_string(line_no);
    if (cells.size() != 4) fail(ErrorCode::kParse, where + ": expected 4 columns");
    FacilityRecord f;
    f.facility_id = cells[0];
    if (f.facility_id.empty()) fail(ErrorCode::kValidation, where + ": empty facility_id");
    try {
      std::size_t used = 0;
      f.centroid.lon = std::stod(cells[1], &used);
      if (used != cells[1].size()) throw std::invalid_argument("trailing");
      f.centroid.lat = std::stod(cells[2], &used);
      if (used != cells[2].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      fail(ErrorCode::kParse, where + ": longitude/latitude must be numbers");
    }
    if (f.centroid.lon < -180 || f.centroid.lon > 180 || f.centroid.lat < -90 ||
        f.centroid.lat > 90) {
      fail(ErrorCode::kValidation, where + ": coordinates out of range");
    }
    if (!cells[3].empty()) f.name = cells[3];
    if (!ids.insert(f.facility_id).second) {
      fail(ErrorCode::kValidation, where + ": duplicate facility_id '" + f.facility_id + "'");
    }
    out.push_back(std::move(f));
  }
  return out;
}

inline std::vector<FacilityRecord> parse_facilities_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kNotFound, "cannot open '" + path.string() + "'");
  return parse_facilities_csv(in, path.string());
}

}  // namespace appwatch
