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
#include <numbers>
#include <string>

#include "appwatch/error.hpp"

namespace appwatch {

struct LonLat {
  double lon = 0.0;  // degrees
  double lat = 0.0;  // degrees
};

struct ProjectedPoint {
  double easting = 0.0;   // meters
  double northing = 0.0;  // meters
  std::string crs_id;
};

/// WGS84 transverse Mercator with unit scale, centered on an arbitrary
/// origin so that the origin projects to (0, 0). Series accurate to well
/// under a millimeter within tens of kilometers of the origin.
class LocalTransverseMercator {
 public:
  static constexpr double kSemiMajor = 6378137.0;
  static constexpr double kFlattening = 1.0 / 298.257223563;
  static constexpr double kMaxAbsLatitude = 85.0;

  explicit LocalTransverseMercator(LonLat origin) : origin_(origin) {
    check_lonlat(origin);
    m0_ = meridian_arc(rad(origin.lat));
  }

  const LonLat& origin() const { return origin_; }

  std::string crs_id() const {
    char buf[64];
    std::snprintf(buf, sizeof buf, "ltm:%.6f,%.6f", origin_.lon, origin_.lat);
    return buf;
  }

  ProjectedPoint forward(LonLat p) const {
    check_lonlat(p);
    const double phi = rad(p.lat);
    const double sin_phi = std::sin(phi);
    const double cos_phi = std::cos(phi);
    const double n = kSemiMajor / std::sqrt(1.0 - kE2 * sin_phi * sin_phi);
    const double t = std::tan(phi) * std::tan(phi);
    const double c = kEp2 * cos_phi * cos_phi;
    const double a = rad(wrap_lon(p.lon - origin_.lon)) * cos_phi;
    const double a2 = a * a;
    const double x =
        n * (a + (1 - t + c) * a2 * a / 6.0 +
             (5 - 18 * t + t * t + 72 * c - 58 * kEp2) * a2 * a2 * a / 120.0);
    const double y =
        meridian_arc(phi) - m0_ +
        n * std::tan(phi) *
            (a2 / 2.0 + (5 - t + 9 * c + 4 * c * c) * a2 * a2 / 24.0 +
             (61 - 58 * t + t * t + 600 * c - 330 * kEp2) * a2 * a2 * a2 / 720.0);
    return ProjectedPoint{x, y, crs_id()};
  }

  LonLat inverse(double easting, double northing) const {
    const double m = m0_ + northing;
    const double mu =
        m / (kSemiMajor * (1 - kE2 / 4 - 3 * kE4 / 64 - 5 * kE6 / 256));
    const double e1 = (1 - std::sqrt(1 - kE2)) / (1 + std::sqrt(1 - kE2));
    const double phi1 =
        mu + (3 * e1 / 2 - 27 * std::pow(e1, 3) / 32) * std::sin(2 * mu) +
        (21 * e1 * e1 / 16 - 55 * std::pow(e1, 4) / 32) * std::sin(4 * mu) +
        (151 * std::pow(e1, 3) / 96) * std::sin(6 * mu) +
        (1097 * std::pow(e1, 4) / 512) * std::sin(8 * mu);
    const double sin1 = std::sin(phi1);
    const double cos1 = std::cos(phi1);
    const double tan1 = std::tan(phi1);
    const double c1 = kEp2 * cos1 * cos1;
    const double t1 = tan1 * tan1;
    const double w = 1 - kE2 * sin1 * sin1;
    const double n1 = kSemiMajor / std::sqrt(w);
    const double r1 = kSemiMajor * (1 - kE2) / (w * std::sqrt(w));
    const double d = easting / n1;
    const double d2 = d * d;
    const double phi =
        phi1 - (n1 * tan1 / r1) *
                   (d2 / 2 -
                    (5 + 3 * t1 + 10 * c1 - 4 * c1 * c1 - 9 * kEp2) * d2 * d2 / 24 +
                    (61 + 90 * t1 + 298 * c1 + 45 * t1 * t1 - 252 * kEp2 -
                     3 * c1 * c1) *
                        d2 * d2 * d2 / 720);
    const double dlon =
        (d - (1 + 2 * t1 + c1) * d2 * d / 6 +
         (5 - 2 * c1 + 28 * t1 - 3 * c1 * c1 + 8 * kEp2 + 24 * t1 * t1) * d2 *
             d2 * d / 120) /
        cos1;
    return LonLat{wrap_lon(origin_.lon + deg(dlon)), deg(phi)};
  }

  static void check_lonlat(LonLat p) {
    if (!std::isfinite(p.lon) || !std::isfinite(p.lat) || p.lon < -180.0 ||
        p.lon > 180.0 || p.lat < -90.0 || p.lat > 90.0) {
      fail(ErrorCode::kValidation, "longitude/latitude out of range");
    }
    if (std::abs(p.lat) > kMaxAbsLatitude) {
      fail(ErrorCode::kUnsupportedLatitude,
           "latitude " + std::to_string(p.lat) + " outside [-85, 85]");
    }
  }

 private:
  static constexpr double kE2 = kFlattening * (2.0 - kFlattening);
  static constexpr double kE4 = kE2 * kE2;
  static constexpr double kE6 = kE4 * kE2;
  static constexpr double kEp2 = kE2 / (1.0 - kE2);

  static double rad(double d) { return d * std::numbers::pi / 180.0; }
  static double deg(double r) { return r * 180.0 / std::numbers::pi; }
  static double wrap_lon(double d) {
    while (d > 180.0) d -= 360.0;
    while (d < -180.0) d += 360.0;
    return d;
  }

  static double meridian_arc(double phi) {
    return kSemiMajor *
           ((1 - kE2 / 4 - 3 * kE4 / 64 - 5 * kE6 / 256) * phi -
            (3 * kE2 / 8 + 3 * kE4 / 32 + 45 * kE6 / 1024) * std::sin(2 * phi) +
            (15 * kE4 / 256 + 45 * kE6 / 1024) * std::sin(4 * phi) -
            (35 * kE6 / 3072) * std::sin(6 * phi));
  }

  LonLat origin_;
  double m0_ = 0.0;
};

}  // namespace appwatch
