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

#include <cstdlib>
#include <filesystem>
#include <memory>
#include <string>

#include "appwatch/pipeline.hpp"
#include "httplib.h"

namespace appwatch {

inline int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kValidation:
    case ErrorCode::kParse:
    case ErrorCode::kUsage:
      return 400;
    case ErrorCode::kNotFound:
    case ErrorCode::kReferential:
      return 404;
    case ErrorCode::kConflict:
    case ErrorCode::kUnsampledStratum:
      return 409;
    default:
      return 500;
  }
}

/// JSON-over-HTTP surface for reviewers and dashboards. Every response is
/// computed from the durable store; nothing lives only in memory.
///
/// When `token` is non-empty every request must carry
/// `Authorization: Bearer <token>`.
class Service {
 public:
  Service(std::filesystem::path store_dir, std::string token)
      : pipeline_(std::make_unique<Pipeline>(std::move(store_dir))), token_(std::move(token)) {
    routes();
  }

  /// Token from APPWATCH_TOKEN, when set.
  static std::string token_from_env() {
    const char* t = std::getenv("APPWATCH_TOKEN");
    return t ? std::string(t) : std::string();
  }

  httplib::Server& server() { return server_; }
  Pipeline& pipeline() { return *pipeline_; }

  bool listen(const std::string& host, int port) { return server_.listen(host, port); }
  int bind_to_any_port(const std::string& host) { return server_.bind_to_any_port(host); }
  bool listen_after_bind() { return server_.listen_after_bind(); }
  void stop() { server_.stop(); }

 private:
  static void send_json(httplib::Response& res, int status, const std::string& body) {
    res.status = status;
    res.set_content(body, "application/json");
  }

  static void send_error(httplib::Response& res, const Error& e) {
    Json body{{"error", std::string(to_string(e.code()))}, {"detail", e.what()}};
    if (e.code() == ErrorCode::kUnsampledStratum) body["provisional"] = true;
    send_json(res, http_status(e.code()), body.dump() + "\n");
  }

  template <typename Fn>
  httplib::Server::Handler guarded(Fn fn) {
    return [fn](const httplib::Request& req, httplib::Response& res) {
      try {
        fn(req, res);
      } catch (const Error& e) {
        send_error(res, e);
      } catch (const std::exception& e) {
        send_json(res, 500, Json{{"error", "internal"}, {"detail", e.what()}}.dump() + "\n");
      }
    };
  }

  /// Field-level validation of a verdict submission.
  static Verdict parse_verdict_body(const std::string& text) {
    Json body;
    try {
      body = Json::parse(text);
    } catch (const nlohmann::json::exception&) {
      throw ValidationFailure(Json{{"body", "must be a JSON object"}});
    }
    if (!body.is_object()) throw ValidationFailure(Json{{"body", "must be a JSON object"}});
    Json fields = Json::object();
    Verdict v;
    if (body.contains("unit_id") && body["unit_id"].is_string() &&
        !body["unit_id"].get<std::string>().empty()) {
      v.unit_id = body["unit_id"];
    } else {
      fields["unit_id"] = "required non-empty string";
    }
    if (body.contains("reviewer") && body["reviewer"].is_string() &&
        !body["reviewer"].get<std::string>().empty()) {
      v.reviewer_id = body["reviewer"];
    } else {
      fields["reviewer"] = "required non-empty string";
    }
    if (body.contains("is_true_event") && body["is_true_event"].is_boolean()) {
      v.is_true_event = body["is_true_event"];
    } else {
      fields["is_true_event"] = "required boolean";
    }
    if (body.contains("images_with_application") &&
        body["images_with_application"].is_number_integer() &&
        body["images_with_application"].get<long>() >= 0) {
      v.images_with_application = body["images_with_application"].get<int>();
    } else {
      fields["images_with_application"] = "required non-negative integer";
    }
    if (body.contains("submitted_at")) {
      try {
        v.submitted_at = parse_rfc3339(body["submitted_at"].get<std::string>());
      } catch (const std::exception&) {
        fields["submitted_at"] = "must be an RFC 3339 date-time";
      }
    } else {
      v.submitted_at = std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
    }
    if (!fields.empty()) throw ValidationFailure(fields);
    return v;
  }

  struct ValidationFailure {
    Json fields;
  };

  void routes() {
    server_.set_pre_routing_handler([this](const httplib::Request& req, httplib::Response& res) {
      if (token_.empty()) return httplib::Server::HandlerResponse::Unhandled;
      if (req.get_header_value("Authorization") == "Bearer " + token_) {
        return httplib::Server::HandlerResponse::Unhandled;
      }
      send_json(res, 401, R"({"error":"unauthorized"})" "\n");
      return httplib::Server::HandlerResponse::Handled;
    });

    server_.Get("/facilities", guarded([this](const httplib::Request&, httplib::Response& res) {
      std::map<std::string, std::vector<int>> seasons;
      for (const auto& key : pipeline_->store().partitions()) {
        seasons[key.facility_id].push_back(key.season_year);
      }
      Json out = Json::array();
      for (const auto& f : pipeline_->facilities()) {
        Json j = to_json(f);
        j["seasons"] = seasons[f.facility_id];
        out.push_back(j);
      }
      send_json(res, 200, out.dump() + "\n");
    }));

    server_.Get(R"(/facilities/([^/]+)/events)",
                guarded([this](const httplib::Request& req, httplib::Response& res) {
      const std::string id = req.matches[1];
      bool known = false;
      for (const auto& f : pipeline_->facilities()) known = known || f.facility_id == id;
      if (!known) fail(ErrorCode::kNotFound, "unknown facility '" + id + "'");
      const EventKind kind = req.has_param("kind") ? parse_event_kind(req.get_param_value("kind"))
                                                   : EventKind::kPredicted;
      std::optional<int> season;
      if (req.has_param("season") && !req.get_param_value("season").empty()) {
        try {
          season = std::stoi(req.get_param_value("season"));
        } catch (const std::exception&) {
          fail(ErrorCode::kValidation, "season must be a year");
        }
      }
      Json out = Json::array();
      for (const auto& key : pipeline_->store().partitions()) {
        if (key.facility_id != id || (season && key.season_year != *season)) continue;
        for (const auto& e : pipeline_->store().get_events(key, kind)) out.push_back(to_json(e));
      }
      send_json(res, 200, out.dump() + "\n");
    }));

    server_.Get("/stratification", guarded([this](const httplib::Request&, httplib::Response& res) {
      const Stratification s = pipeline_->require_stratification();
      Json bins = Json::array();
      for (std::size_t i = 0; i < s.bin_count(); ++i) {
        bins.push_back(Json{{"bin", i},
                            {"lower", i == 0 ? 0.0 : s.edges[i - 1]},
                            {"upper", i == 0 ? s.edges.front() : s.edges[i]},
                            {"size", s.bin_size(i)},
                            {"unit", i == 0 ? "images" : "events"}});
      }
      send_json(res, 200, Json{{"edges", s.edges}, {"bins", bins}}.dump() + "\n");
    }));

    server_.Get("/samples", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const Stratification s = pipeline_->require_stratification();
      const auto batches = pipeline_->samples();
      const auto sampled = sampled_units(s, batches);
      std::map<std::string, std::vector<std::string>> reviewers;
      for (const auto& v : pipeline_->verdicts()) reviewers[v.unit_id].push_back(v.reviewer_id);
      const bool include_done = req.has_param("all") && req.get_param_value("all") != "0";
      Json units = Json::array();
      Json progress = Json::array();
      for (const auto& batch : batches) {
        std::size_t done = 0;
        for (const auto& id : batch.unit_ids) {
          const bool reviewed = reviewers.contains(id);
          if (reviewed) ++done;
          if (reviewed && !include_done) continue;
          Json u = to_json(*sampled.at(id).second);
          u["bin"] = batch.bin;
          u["reviewed_by"] = reviewed ? Json(reviewers[id]) : Json::array();
          units.push_back(u);
        }
        progress.push_back(Json{{"bin", batch.bin}, {"labeled", done}, {"total", batch.unit_ids.size()}});
      }
      send_json(res, 200, Json{{"units", units}, {"progress", progress}}.dump() + "\n");
    }));

    server_.Post("/verdicts", [this](const httplib::Request& req, httplib::Response& res) {
      try {
        const Verdict v = parse_verdict_body(req.body);
        pipeline_->submit_verdicts({v});
        send_json(res, 201, to_json(v).dump() + "\n");
      } catch (const ValidationFailure& f) {
        send_json(res, 400, Json{{"error", "validation"}, {"fields", f.fields}}.dump() + "\n");
      } catch (const Error& e) {
        send_error(res, e);
      } catch (const std::exception& e) {
        send_json(res, 500, Json{{"error", "internal"}, {"detail", e.what()}}.dump() + "\n");
      }
    });

    server_.Get("/estimate", guarded([this](const httplib::Request&, httplib::Response& res) {
      send_json(res, 200, pipeline_->estimate_document());
    }));

    server_.Get("/calibration", guarded([this](const httplib::Request&, httplib::Response& res) {
      send_json(res, 200, pipeline_->calibration().dump() + "\n");
    }));

    server_.Get(R"(/analytics/([^/]+))",
                guarded([this](const httplib::Request& req, httplib::Response& res) {
      const std::string name = req.matches[1];
      auto bundle = pipeline_->store().get_global(Pipeline::kAnalytics);
      if (!bundle) fail(ErrorCode::kNotFound, "no analytics yet; run `report` first");
      if (name == "all") {
        send_json(res, 200, bundle->dump() + "\n");
        return;
      }
      if (!bundle->contains(name) || !(*bundle)[name].is_object()) {
        fail(ErrorCode::kNotFound, "unknown analytics report '" + name + "'");
      }
      send_json(res, 200, (*bundle)[name].dump() + "\n");
    }));

    server_.Get(R"(/images/([^/]+)/chips)",
                guarded([this](const httplib::Request& req, httplib::Response& res) {
      const std::string id = req.matches[1];
      const auto index = pipeline_->image_index();
      if (!index.contains(id)) fail(ErrorCode::kNotFound, "unknown image '" + id + "'");
      const auto chip = pipeline_->store().root() / "chips" / (id + ".png");
      res.status = 200;
      if (std::filesystem::exists(chip)) {
        res.set_content(detail::read_text_file(chip), "image/png");
        res.set_header("X-Placeholder", "false");
      } else {
        res.set_content(placeholder_png(), "image/png");
        res.set_header("X-Placeholder", "true");
      }
    }));
  }

  /// 1x1 transparent PNG served when pixels were never downloaded.
  static std::string placeholder_png() {
    static const unsigned char kBytes[] = {
        0x89, 0x50, 0x4E, 0x47, 0x0D, 0x0A, 0x1A, 0x0A, 0x00, 0x00, 0x00, 0x0D, 0x49, 0x48,
        0x44, 0x52, 0x00, 0x00, 0x00, 0x01, 0x00, 0x00, 0x00, 0x01, 0x08, 0x06, 0x00, 0x00,
        0x00, 0x1F, 0x15, 0xC4, 0x89, 0x00, 0x00, 0x00, 0x0A, 0x49, 0x44, 0x41, 0x54, 0x78,
        0x9C, 0x63, 0x00, 0x01, 0x00, 0x00, 0x05, 0x00, 0x01, 0x0D, 0x0A, 0x2D, 0xB4, 0x00,
        0x00, 0x00, 0x00, 0x49, 0x45, 0x4E, 0x44, 0xAE, 0x42, 0x60, 0x82};
    return std::string(reinterpret_cast<const char*>(kBytes), sizeof kBytes);
  }

  std::unique_ptr<Pipeline> pipeline_;
  std::string token_;
  httplib::Server server_;
};

}  // namespace appwatch
