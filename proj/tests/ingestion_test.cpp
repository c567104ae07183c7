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

#include <fstream>
#include <sstream>
#include <thread>

#include <gtest/gtest.h>

#include "appwatch/http_provider.hpp"
#include "appwatch/ingestion.hpp"
#include "test_support.hpp"

namespace appwatch {
namespace {

using testing::TempDir;

const FacilityRecord kFacility{"WI-001", LonLat{-89.40, 43.07}, std::string("Example Dairy")};

ImageRecord scene(const std::string& id, Date d, double cloud = 0.0) {
  ImageRecord r;
  r.image_id = id;
  r.captured_at = Timestamp{d} + std::chrono::hours{17};
  r.aoi = make_aoi(kFacility);
  r.pixel_width = r.pixel_height = 333;
  r.resolution = 3.0;
  r.quality.cloud_fraction = cloud;
  return r;
}

void write_scene(const std::filesystem::path& dir, const ImageRecord& r) {
  std::ofstream(dir / (r.image_id + ".json")) << scene_to_json(r).dump(2);
}

ProviderQuery season_query(int year = 2019) {
  return ProviderQuery{make_aoi(kFacility), SeasonWindow::winter(year), 1.0};
}

TEST(FilterConfig, Defaults) {
  const FilterConfig cfg;
  EXPECT_DOUBLE_EQ(cfg.max_cloud_fraction, 0.1);
  EXPECT_TRUE(cfg.require_clarity);
  EXPECT_TRUE(cfg.require_artifact_free);
  EXPECT_TRUE(cfg.require_complete_footprint);
  EXPECT_FALSE(cfg.require_snow);
}

TEST(FilterConfig, LoadsIniSection) {
  std::istringstream in("# quality\n[filter]\nmax_cloud_fraction = 0.3\nrequire_snow = true\n");
  const FilterConfig cfg = load_filter_config(in);
  EXPECT_DOUBLE_EQ(cfg.max_cloud_fraction, 0.3);
  EXPECT_TRUE(cfg.require_snow);
  EXPECT_TRUE(cfg.require_clarity);

  std::istringstream other("[other]\nx = 1\n");
  EXPECT_DOUBLE_EQ(load_filter_config(other).max_cloud_fraction, 0.1);
  std::istringstream bad("[filter]\nmax_cloud_fraction = lots\n");
  EXPECT_THROW(load_filter_config(bad), Error);
  std::istringstream range("[filter]\nmax_cloud_fraction = 1.5\n");
  EXPECT_THROW(load_filter_config(range), Error);
}

TEST(FilterImages, ThresholdsAndFlags) {
  const Date d = make_date(2019, 11, 5);
  std::vector<ImageRecord> recs{scene("a", d), scene("b", d, 0.5), scene("c", d, 0.1),
                                scene("d", d), scene("e", d)};
  recs[3].quality.clarity_ok = false;
  recs[4].quality.footprint_complete = false;
  const auto res = filter_images(recs, FilterConfig{});
  EXPECT_EQ(res.retained_count, 2u);
  EXPECT_TRUE(res.records[0].retained);
  EXPECT_FALSE(res.records[1].retained);
  EXPECT_TRUE(res.records[2].retained);  // boundary: cloud == max passes
  EXPECT_DOUBLE_EQ(res.retention_ratio(), 0.4);

  FilterConfig snow;
  snow.require_snow = true;
  EXPECT_EQ(filter_images(recs, snow).retained_count, 0u);

  std::vector<ImageRecord> perfect{scene("x", d), scene("y", d)};
  EXPECT_EQ(filter_images(perfect, FilterConfig{}).retained_count, 2u);
}

TEST(FilterImages, IdempotentAndOrderPreserving) {
  std::mt19937_64 rng(9);
  std::vector<ImageRecord> recs;
  for (int i = 0; i < 200; ++i) {
    auto r = scene("s" + std::to_string(i), make_date(2019, 11, 1) + std::chrono::days{i % 120},
                   double(rng() % 100) / 100.0);
    r.quality.artifact_free = rng() % 4 != 0;
    recs.push_back(r);
  }
  const auto once = filter_images(recs, FilterConfig{});
  const auto twice = filter_images(once.retained(), FilterConfig{});
  EXPECT_EQ(twice.retained(), once.retained());
  // Retained sequence is a subsequence of the input.
  const auto kept = once.retained();
  std::size_t j = 0;
  for (const auto& r : recs) {
    if (j < kept.size() && kept[j].image_id == r.image_id) ++j;
  }
  EXPECT_EQ(j, kept.size());
}

TEST(FilterImages, DailySeasonKeepsRoughlyWeeklyCadence) {
  // Quality flags drawn so that each day passes with probability 1/7.
  std::mt19937_64 rng(2019);
  std::vector<ImageRecord> recs;
  const auto w = SeasonWindow::winter(2019);
  for (Date d = w.start_date; d < w.end_date; d += std::chrono::days{1}) {
    const bool pass = rng() % 7 == 0;
    recs.push_back(scene(format_date(d), d, pass ? 0.05 : 0.4));
  }
  const auto res = filter_images(recs, FilterConfig{});
  EXPECT_EQ(recs.size(), 121u);
  const double weeks = 121.0 / 7.0;
  EXPECT_NEAR(double(res.retained_count), weeks, 3 * std::sqrt(121.0 * (1.0 / 7) * (6.0 / 7)));
}

TEST(FilesystemProvider, EmptyDirectoryGivesEmptyCatalog) {
  TempDir dir;
  FilesystemProvider p(dir.path());
  EXPECT_TRUE(p.fetch(season_query()).records.empty());
}

TEST(FilesystemProvider, DropsScenesOutsideWindow) {
  TempDir dir;
  write_scene(dir.path(), scene("in-1", make_date(2019, 11, 2)));
  write_scene(dir.path(), scene("in-2", make_date(2020, 2, 29)));
  write_scene(dir.path(), scene("out", make_date(2020, 3, 1)));
  FilesystemProvider p(dir.path());
  const auto res = fetch_catalog(p, season_query(), kFacility.facility_id);
  ASSERT_EQ(res.records.size(), 2u);
  EXPECT_EQ(res.records[0].image_id, "in-1");
  EXPECT_EQ(res.records[1].facility_id, "WI-001");
}

TEST(FilesystemProvider, DailySeasonHas121RecordsAndIsIdempotent) {
  TempDir dir;
  const auto w = SeasonWindow::winter(2019);
  std::vector<Date> days;
  for (Date d = w.start_date; d < w.end_date; d += std::chrono::days{1}) days.push_back(d);
  // Written in reverse so ordering comes from the provider, not the files.
  for (auto it = days.rbegin(); it != days.rend(); ++it) write_scene(dir.path(), scene("d" + format_date(*it), *it));
  FilesystemProvider p(dir.path());
  const auto first = p.fetch(season_query());
  ASSERT_EQ(first.records.size(), 121u);
  for (std::size_t i = 1; i < first.records.size(); ++i) {
    EXPECT_TRUE(image_order(first.records[i - 1], first.records[i]));
  }
  EXPECT_EQ(p.fetch(season_query()).records, first.records);
}

TEST(FilesystemProvider, MalformedScenesAreSkippedWithWarnings) {
  TempDir dir;
  write_scene(dir.path(), scene("good", make_date(2019, 12, 1)));
  std::ofstream(dir.path() / "broken.json") << "{ not json";
  std::ofstream(dir.path() / "missing.json") << R"({"image_id": "m"})";
  FilesystemProvider p(dir.path());
  const auto res = p.fetch(season_query());
  EXPECT_EQ(res.records.size(), 1u);
  EXPECT_EQ(res.skipped, 2u);
  EXPECT_EQ(res.warnings.size(), 2u);
}

TEST(FilesystemProvider, MissingDirectoryIsRetryableProviderError) {
  FilesystemProvider p("/nonexistent/appwatch/scenes");
  try {
    p.fetch(season_query());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kProviderIo);
    EXPECT_TRUE(e.retryable());
  }
}

TEST(FacilitiesCsv, ParsesAndValidates) {
  std::istringstream ok(
      "facility_id,longitude,latitude,name\nWI-001,-89.40,43.07,\"Dairy, Inc\"\nWI-002,-89.5,43.1,\n");
  const auto f = parse_facilities_csv(ok);
  ASSERT_EQ(f.size(), 2u);
  EXPECT_EQ(f[0].name, "Dairy, Inc");
  EXPECT_FALSE(f[1].name.has_value());
  EXPECT_DOUBLE_EQ(f[1].centroid.lat, 43.1);

  std::istringstream header("id,lon,lat,name\n");
  EXPECT_THROW(parse_facilities_csv(header), Error);
  std::istringstream dup("facility_id,longitude,latitude,name\nA,1,1,\nA,2,2,\n");
  EXPECT_THROW(parse_facilities_csv(dup), Error);
  std::istringstream range("facility_id,longitude,latitude,name\nA,200,1,\n");
  EXPECT_THROW(parse_facilities_csv(range), Error);
}

TEST(HttpProvider, SendsQueryAndBearerToken) {
  httplib::Server server;
  std::string auth, crs, start, end;
  const Json body = Json::array({scene_to_json(scene("h1", make_date(2019, 11, 9))),
                                 scene_to_json(scene("h0", make_date(2019, 11, 8))),
                                 Json{{"image_id", "bad"}}});
  server.Get("/v1/scenes", [&](const httplib::Request& req, httplib::Response& res) {
    auth = req.get_header_value("Authorization");
    crs = req.get_param_value("crs_id");
    start = req.get_param_value("start");
    end = req.get_param_value("end");
    res.set_content(body.dump(), "application/json");
  });
  server.Get("/broken/scenes", [](const httplib::Request&, httplib::Response& res) {
    res.status = 503;
    res.set_content("down", "text/plain");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  HttpProvider p("http://127.0.0.1:" + std::to_string(port) + "/v1", "tok");
  const auto res = p.fetch(season_query());
  ASSERT_EQ(res.records.size(), 2u);
  EXPECT_EQ(res.records[0].image_id, "h0");
  EXPECT_EQ(res.skipped, 1u);
  EXPECT_EQ(auth, "Bearer tok");
  EXPECT_EQ(crs, make_aoi(kFacility).crs_id);
  EXPECT_EQ(start, "2019-11-01");
  EXPECT_EQ(end, "2020-03-01");

  HttpProvider broken("http://127.0.0.1:" + std::to_string(port) + "/broken");
  try {
    broken.fetch(season_query());
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kProviderIo);
    EXPECT_NE(std::string(e.what()).find("503"), std::string::npos);
  }
  server.stop();
  t.join();
}

}  // namespace
}  // namespace appwatch
