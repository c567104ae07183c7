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
#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "appwatch/detection_store.hpp"
#include "appwatch/error.hpp"
#include "appwatch/json_io.hpp"
#include "appwatch/model.hpp"

namespace appwatch {

/// Embedded file-backed store.
///
/// Layout under the root directory:
///
///     store.json                              {"format_version": N}
///     partitions/<facility>/<season>/<kind>.json
///     global/<kind>.json
///
/// Every entity file is an envelope {format_version, key, checksum, payload}
/// where checksum is FNV-1a over the canonical payload dump. Writes go to a
/// temporary file and are renamed into place, so readers never observe a
/// torn file. Writers are serialized per partition inside one process.
class Store {
 public:
  static constexpr int kFormatVersion = 1;

  static constexpr std::string_view kImages = "images";
  static constexpr std::string_view kDetections = "detections";
  static constexpr std::string_view kLabels = "labels";
  static constexpr std::string_view kPredictedEvents = "events_predicted";
  static constexpr std::string_view kTruthEvents = "events_truth";

  explicit Store(std::filesystem::path root) : root_(std::move(root)) {
    namespace fs = std::filesystem;
    const fs::path meta = root_ / "store.json";
    if (fs::exists(meta)) {
      Json j;
      try {
        j = Json::parse(detail::read_text_file(meta));
      } catch (const nlohmann::json::exception&) {
        fail(ErrorCode::kIntegrity, "store.json is not valid JSON");
      }
      const int version = j.value("format_version", -1);
      if (version > kFormatVersion) {
        fail(ErrorCode::kUnsupportedVersion,
             "store format version " + std::to_string(version) +
                 " is newer than supported version " + std::to_string(kFormatVersion));
      }
      if (version < 1) fail(ErrorCode::kIntegrity, "store.json lacks a format_version");
    } else {
      fs::create_directories(root_);
      write_atomic(meta, Json{{"format_version", kFormatVersion}}.dump(2));
    }
  }

  const std::filesystem::path& root() const { return root_; }

  // Raw envelope access.

  void put(const PartitionKey& key, std::string_view kind, const Json& payload) {
    check_kind(kind);
    auto lock = lock_for(key.to_string());
    write_entity(partition_path(key, kind), key.to_string() + "/" + std::string(kind),
                 payload);
  }

  std::optional<Json> get(const PartitionKey& key, std::string_view kind) const {
    check_kind(kind);
    return read_entity(partition_path(key, kind),
                       key.to_string() + "/" + std::string(kind));
  }

  void put_global(std::string_view kind, const Json& payload) {
    check_kind(kind);
    auto lock = lock_for("global");
    write_entity(global_path(kind), "global/" + std::string(kind), payload);
  }

  std::optional<Json> get_global(std::string_view kind) const {
    check_kind(kind);
    return read_entity(global_path(kind), "global/" + std::string(kind));
  }

  /// Runs `fn` on the current global payload (null when absent) and stores
  /// the returned value, all under the global writer lock.
  template <typename Fn>
  Json update_global(std::string_view kind, Fn&& fn) {
    check_kind(kind);
    auto lock = lock_for("global");
    const std::string key = "global/" + std::string(kind);
    const auto current = read_entity(global_path(kind), key);
    Json next = fn(current ? *current : Json(nullptr));
    write_entity(global_path(kind), key, next);
    return next;
  }

  /// Every (facility, season) partition that holds at least one entity.
  std::vector<PartitionKey> partitions() const {
    namespace fs = std::filesystem;
    std::vector<PartitionKey> out;
    const fs::path base = root_ / "partitions";
    if (!fs::exists(base)) return out;
    for (const auto& fdir : fs::directory_iterator(base)) {
      if (!fdir.is_directory()) continue;
      const std::string facility = decode(fdir.path().filename().string());
      for (const auto& sdir : fs::directory_iterator(fdir.path())) {
        if (!sdir.is_directory()) continue;
        try {
          out.push_back(PartitionKey{facility, std::stoi(sdir.path().filename().string())});
        } catch (const std::exception&) {
          fail(ErrorCode::kIntegrity, "unexpected directory '" + sdir.path().string() + "'");
        }
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  // Typed helpers. Missing entities read back as empty collections.

  void put_images(const PartitionKey& key, const std::vector<ImageRecord>& images) {
    put(key, kImages, to_json_array(images));
  }
  std::vector<ImageRecord> get_images(const PartitionKey& key) const {
    return read_list<ImageRecord>(key, kImages, image_from_json);
  }

  void put_detections(const PartitionKey& key, const std::vector<Detection>& d) {
    put(key, kDetections, to_json_array(d));
  }
  std::vector<Detection> get_detections(const PartitionKey& key) const {
    auto j = get(key, kDetections);
    if (!j) return {};
    return parse_detections(j->dump(), key.to_string() + "/detections");
  }

  void put_labels(const PartitionKey& key, const std::vector<LabelBox>& l) {
    put(key, kLabels, to_json_array(l));
  }
  std::vector<LabelBox> get_labels(const PartitionKey& key) const {
    auto j = get(key, kLabels);
    if (!j) return {};
    return parse_labels(j->dump(), key.to_string() + "/labels");
  }

  void put_events(const PartitionKey& key, EventKind kind,
                  const std::vector<ApplicationEvent>& events) {
    put(key, kind == EventKind::kPredicted ? kPredictedEvents : kTruthEvents,
        to_json_array(events));
  }
  std::vector<ApplicationEvent> get_events(const PartitionKey& key, EventKind kind) const {
    return read_list<ApplicationEvent>(
        key, kind == EventKind::kPredicted ? kPredictedEvents : kTruthEvents,
        event_from_json);
  }

 private:
  static void check_kind(std::string_view kind) {
    const bool ok = !kind.empty() && std::all_of(kind.begin(), kind.end(), [](char c) {
      return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
    });
    if (!ok) fail(ErrorCode::kValidation, "invalid entity kind '" + std::string(kind) + "'");
  }

  // Percent-encodes anything outside [A-Za-z0-9_.-] so facility ids are
  // safe directory names.
  static std::string encode(std::string_view s) {
    static constexpr char kHex[] = "0123456789ABCDEF";
    std::string out;
    for (unsigned char c : s) {
      if (std::isalnum(c) || c == '_' || c == '-' || (c == '.' && !out.empty())) {
        out.push_back(static_cast<char>(c));
      } else {
        out.push_back('%');
        out.push_back(kHex[c >> 4]);
        out.push_back(kHex[c & 15]);
      }
    }
    return out;
  }

  static std::string decode(std::string_view s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] == '%' && i + 2 < s.size()) {
        out.push_back(static_cast<char>(std::stoi(std::string(s.substr(i + 1, 2)), nullptr, 16)));
        i += 2;
      } else {
        out.push_back(s[i]);
      }
    }
    return out;
  }

  std::filesystem::path partition_path(const PartitionKey& key, std::string_view kind) const {
    return root_ / "partitions" / encode(key.facility_id) /
           std::to_string(key.season_year) / (std::string(kind) + ".json");
  }

  std::filesystem::path global_path(std::string_view kind) const {
    return root_ / "global" / (std::string(kind) + ".json");
  }

  std::unique_lock<std::mutex> lock_for(const std::string& partition) {
    std::shared_ptr<std::mutex> m;
    {
      std::lock_guard<std::mutex> guard(locks_mutex_);
      auto& slot = locks_[partition];
      if (!slot) slot = std::make_shared<std::mutex>();
      m = slot;
    }
    // The map owns the mutex for the Store's lifetime, so the raw
    // reference stays valid after `m` goes out of scope.
    return std::unique_lock<std::mutex>(*m);
  }

  static void write_atomic(const std::filesystem::path& path, const std::string& text) {
    namespace fs = std::filesystem;
    fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) fail(ErrorCode::kIntegrity, "cannot write '" + tmp.string() + "'");
      out << text;
      out.flush();
      if (!out) fail(ErrorCode::kIntegrity, "short write to '" + tmp.string() + "'");
    }
    fs::rename(tmp, path);
  }

  static void write_entity(const std::filesystem::path& path, const std::string& key,
                           const Json& payload) {
    const std::string canonical = payload.dump();
    Json envelope{{"format_version", kFormatVersion},
                  {"key", key},
                  {"checksum", hex64(fnv1a64(canonical))},
                  {"payload", payload}};
    write_atomic(path, envelope.dump());
  }

  static std::optional<Json> read_entity(const std::filesystem::path& path,
                                         const std::string& key) {
    if (!std::filesystem::exists(path)) return std::nullopt;
    Json envelope;
    try {
      envelope = Json::parse(detail::read_text_file(path));
    } catch (const nlohmann::json::exception&) {
      fail(ErrorCode::kIntegrity, "corrupt entity '" + key + "': not valid JSON");
    }
    if (!envelope.is_object() || !envelope.contains("payload") ||
        !envelope.contains("checksum")) {
      fail(ErrorCode::kIntegrity, "corrupt entity '" + key + "': missing envelope fields");
    }
    const int version = envelope.value("format_version", -1);
    if (version > kFormatVersion) {
      fail(ErrorCode::kUnsupportedVersion,
           "entity '" + key + "' has newer format version " + std::to_string(version));
    }
    if (envelope.value("key", std::string{}) != key) {
      fail(ErrorCode::kIntegrity, "corrupt entity '" + key + "': key mismatch");
    }
    const Json& payload = envelope["payload"];
    if (envelope["checksum"] != hex64(fnv1a64(payload.dump()))) {
      fail(ErrorCode::kIntegrity, "corrupt entity '" + key + "': checksum mismatch");
    }
    return payload;
  }

  template <typename T, typename Decode>
  std::vector<T> read_list(const PartitionKey& key, std::string_view kind,
                           Decode decode) const {
    auto j = get(key, kind);
    std::vector<T> out;
    if (!j) return out;
    if (!j->is_array()) {
      fail(ErrorCode::kIntegrity,
           "corrupt entity '" + key.to_string() + "/" + std::string(kind) + "': not a list");
    }
    out.reserve(j->size());
    for (const Json& item : *j) out.push_back(decode(item));
    return out;
  }

  std::filesystem::path root_;
  std::mutex locks_mutex_;
  std::map<std::string, std::shared_ptr<std::mutex>> locks_;
};

}  // namespace appwatch
