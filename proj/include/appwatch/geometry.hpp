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
#include <span>
#include <string>

#include "appwatch/error.hpp"

namespace appwatch {

/// Axis-aligned rectangle in projected meters.
///
/// Boxes always have strictly positive area and finite coordinates; use
/// GeoBox::make to construct one from untrusted input.
struct GeoBox {
  double min_e = 0.0;
  double min_n = 0.0;
  double max_e = 0.0;
  double max_n = 0.0;
  std::string crs_id;

  static GeoBox make(double min_e, double min_n, double max_e, double max_n,
                     std::string crs_id = {}) {
    GeoBox box{min_e, min_n, max_e, max_n, std::move(crs_id)};
    if (!box.valid()) {
      fail(ErrorCode::kValidation,
           "invalid box [" + std::to_string(min_e) + "," +
               std::to_string(min_n) + "," + std::to_string(max_e) + "," +
               std::to_string(max_n) + "]: needs finite coordinates and positive area");
    }
    return box;
  }

  bool valid() const {
    return std::isfinite(min_e) && std::isfinite(min_n) &&
           std::isfinite(max_e) && std::isfinite(max_n) && min_e < max_e &&
           min_n < max_n;
  }

  double width() const { return max_e - min_e; }
  double height() const { return max_n - min_n; }
  double area() const { return width() * height(); }

  bool contains(double e, double n) const {
    return e >= min_e && e <= max_e && n >= min_n && n <= max_n;
  }
  bool contains(const GeoBox& other) const {
    return other.min_e >= min_e && other.max_e <= max_e &&
           other.min_n >= min_n && other.max_n <= max_n;
  }

  friend bool operator==(const GeoBox&, const GeoBox&) = default;
};

/// Area of the overlap of two boxes; zero when they are disjoint or only touch.
inline double intersection_area(const GeoBox& a, const GeoBox& b) {
  const double w = std::min(a.max_e, b.max_e) - std::max(a.min_e, b.min_e);
  const double h = std::min(a.max_n, b.max_n) - std::max(a.min_n, b.min_n);
  if (w <= 0.0 || h <= 0.0) return 0.0;
  return w * h;
}

/// True iff the overlap has strictly positive area. Shared edges do not count.
inline bool intersects(const GeoBox& a, const GeoBox& b) {
  return std::min(a.max_e, b.max_e) > std::max(a.min_e, b.min_e) &&
         std::min(a.max_n, b.max_n) > std::max(a.min_n, b.min_n);
}

inline double iou(const GeoBox& a, const GeoBox& b) {
  const double inter = intersection_area(a, b);
  if (inter <= 0.0) return 0.0;
  const double uni = a.area() + b.area() - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

/// Coordinate-wise min/max envelope of two boxes.
inline GeoBox envelope(const GeoBox& a, const GeoBox& b) {
  return GeoBox{std::min(a.min_e, b.min_e), std::min(a.min_n, b.min_n),
                std::max(a.max_e, b.max_e), std::max(a.max_n, b.max_n),
                a.crs_id};
}

inline std::optional<GeoBox> envelope(std::span<const GeoBox> boxes) {
  if (boxes.empty()) return std::nullopt;
  GeoBox out = boxes.front();
  for (const GeoBox& b : boxes.subspan(1)) out = envelope(out, b);
  return out;
}

}  // namespace appwatch
