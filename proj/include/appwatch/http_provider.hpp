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

#include <cstdio>
#include <string>

#include "appwatch/ingestion.hpp"
#include "httplib.h"

namespace appwatch {

/// Generic authenticated JSON catalog client.
///
/// Issues `GET <base>/scenes?crs_id=&min_e=&min_n=&max_e=&max_n=&start=&end=&max_cloud=`
/// with an optional bearer token and expects a JSON array of scene-metadata
/// documents (the same shape the filesystem provider reads).
class HttpProvider : public ImageryProvider {
 public:
  HttpProvider(std::string base_url, std::string token = {})
      : base_url_(std::move(base_url)), token_(std::move(token)) {
    while (!base_url_.empty() && base_url_.back() == '/') base_url_.pop_back();
    const auto scheme_end = base_url_.find("://");
    const auto path_start =
        base_url_.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
    if (path_start != std::string::npos) {
      prefix_ = base_url_.substr(path_start);
      host_ = base_url_.substr(0, path_start);
    } else {
      host_ = base_url_;
    }
  }

  CatalogResult fetch(const ProviderQuery& query) override {
    httplib::Client client(host_);
    client.set_connection_timeout(10);
    client.set_read_timeout(60);
    httplib::Headers headers;
    if (!token_.empty()) headers.emplace("Authorization", "Bearer " + token_);
    httplib::Params params{
        {"crs_id", query.aoi.crs_id},
        {"min_e", fmt(query.aoi.min_e)},
        {"min_n", fmt(query.aoi.min_n)},
        {"max_e", fmt(query.aoi.max_e)},
        {"max_n", fmt(query.aoi.max_n)},
        {"start", format_date(query.window.start_date)},
        {"end", format_date(query.window.end_date)},
        {"max_cloud", fmt(query.max_cloud)},
    };
    auto res = client.Get(prefix_ + "/scenes", params, headers);
    if (!res) {
      fail(ErrorCode::kProviderIo,
           "catalog request to " + base_url_ + " failed: " + httplib::to_string(res.error()));
    }
    if (res->status != 200) {
      fail(ErrorCode::kProviderIo, "catalog request to " + base_url_ + " returned HTTP " +
                                       std::to_string(res->status) + ": " + res->body);
    }
    Json doc;
    try {
      doc = Json::parse(res->body);
    } catch (const nlohmann::json::exception&) {
      fail(ErrorCode::kProviderIo, "catalog response from " + base_url_ + " is not JSON");
    }
    if (!doc.is_array()) {
      fail(ErrorCode::kProviderIo, "catalog response from " + base_url_ + " is not an array");
    }
    CatalogResult result;
    for (const Json& scene : doc) {
      try {
        result.records.push_back(scene_from_json(scene));
      } catch (const Error& e) {
        ++result.skipped;
        result.warnings.push_back(e.what());
      }
    }
    detail::finish_catalog(result, query);
    return result;
  }

  std::string describe() const override { return "http:" + base_url_; }

 private:
  static std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
  }

  std::string base_url_;
  std::string host_;
  std::string prefix_;
  std::string token_;
};

}  // namespace appwatch
