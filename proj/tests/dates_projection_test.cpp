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

#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "appwatch/dates.hpp"
#include "appwatch/ingestion.hpp"
#include "appwatch/projection.hpp"

namespace appwatch {
namespace {

TEST(Dates, ParseFormatRoundTrip) {
  const Date d = parse_date("2020-02-29");
  EXPECT_EQ(format_date(d), "2020-02-29");
  EXPECT_EQ(days_between(parse_date("2019-12-31"), parse_date("2020-01-01")), 1);
  EXPECT_THROW(parse_date("2019-02-29"), Error);
  EXPECT_THROW(parse_date("2019-13-01"), Error);
  EXPECT_THROW(parse_date("2019-1-01"), Error);
}

TEST(Dates, Rfc3339OffsetsAndFractions) {
  const Timestamp z = parse_rfc3339("2019-11-03T17:30:00Z");
  EXPECT_EQ(parse_rfc3339("2019-11-03T12:30:00-05:00"), z);
  EXPECT_EQ(parse_rfc3339("2019-11-03T17:30:00.250Z"), z);
  EXPECT_EQ(format_rfc3339(z), "2019-11-03T17:30:00Z");
  EXPECT_EQ(format_date(date_of(parse_rfc3339("2019-11-03T23:30:00-05:00"))), "2019-11-04");
  EXPECT_THROW(parse_rfc3339("2019-11-03T17:30:00"), Error);
  EXPECT_THROW(parse_rfc3339("2019-11-03"), Error);
  EXPECT_THROW(parse_rfc3339("2019-13-03T17:30:00Z"), Error);
}

TEST(SeasonWindow, WinterDefaultAndLength) {
  const auto w = SeasonWindow::winter(2019);
  EXPECT_EQ(format_date(w.start_date), "2019-11-01");
  EXPECT_EQ(format_date(w.end_date), "2020-03-01");
  // Nov 30 + Dec 31 + Jan 31 + Feb 29 (leap year)
  EXPECT_EQ(w.length_days(), 121);
  EXPECT_EQ(SeasonWindow::winter(2020).length_days(), 120);
  EXPECT_TRUE(w.contains(parse_date("2019-11-01")));
  EXPECT_TRUE(w.contains(parse_date("2020-02-29")));
  EXPECT_FALSE(w.contains(parse_date("2020-03-01")));
  EXPECT_THROW(SeasonWindow::make(2019, w.end_date, w.start_date), Error);
}

TEST(Projection, OriginMapsToZero) {
  const LocalTransverseMercator tm(LonLat{0.0, 0.0});
  const auto p = tm.forward(LonLat{0.0, 0.0});
  EXPECT_NEAR(p.easting, 0.0, 1e-9);
  EXPECT_NEAR(p.northing, 0.0, 1e-9);
  const FacilityRecord f{"W", LonLat{-89.40, 43.07}, std::nullopt};
  const auto c = project_centroid(f);
  EXPECT_NEAR(c.easting, 0.0, 1e-9);
  EXPECT_NEAR(c.northing, 0.0, 1e-9);
  EXPECT_EQ(c.crs_id, "ltm:-89.400000,43.070000");
}

TEST(Projection, RoundTripNearFacility) {
  const LocalTransverseMercator tm(LonLat{-89.40, 43.07});
  for (double de = -2000; de <= 2000; de += 250) {
    for (double dn = -2000; dn <= 2000; dn += 250) {
      const LonLat ll = tm.inverse(de, dn);
      const auto back = tm.forward(ll);
      ASSERT_NEAR(back.easting, de, 0.01);
      ASSERT_NEAR(back.northing, dn, 0.01);
    }
  }
  const auto p = tm.forward(LonLat{-89.40, 43.07});
  const LonLat ll = tm.inverse(p.easting, p.northing);
  EXPECT_NEAR(ll.lon, -89.40, 1e-5);
  EXPECT_NEAR(ll.lat, 43.07, 1e-5);
}

// Meridian arc length by Simpson quadrature of the meridional radius of
// curvature, independent of the projection's series.
double meridian_distance(double lat1_deg, double lat2_deg) {
  const double a = 6378137.0, f = 1.0 / 298.257223563, e2 = f * (2 - f);
  const double p1 = lat1_deg * std::numbers::pi / 180, p2 = lat2_deg * std::numbers::pi / 180;
  const int n = 2000;
  const double h = (p2 - p1) / n;
  auto m = [&](double phi) {
    const double s = std::sin(phi);
    return a * (1 - e2) / std::pow(1 - e2 * s * s, 1.5);
  };
  double sum = m(p1) + m(p2);
  for (int i = 1; i < n; ++i) sum += (i % 2 ? 4 : 2) * m(p1 + i * h);
  return sum * h / 3;
}

TEST(Projection, MeridianDistanceMatchesQuadrature) {
  for (double lat : {-60.0, -10.0, 0.0, 43.07, 70.0, 84.0}) {
    // Latitude 1000 m north of `lat` by bisection on the quadrature oracle.
    double lo = lat, hi = lat + 0.02;
    for (int i = 0; i < 100; ++i) {
      const double mid = (lo + hi) / 2;
      (meridian_distance(lat, mid) < 1000.0 ? lo : hi) = mid;
    }
    const LocalTransverseMercator tm(LonLat{-89.40, lat});
    const auto a = tm.forward(LonLat{-89.40, lat});
    const auto b = tm.forward(LonLat{-89.40, lo});
    EXPECT_NEAR(b.northing - a.northing, 1000.0, 1e-3) << "lat " << lat;
    EXPECT_NEAR(b.easting - a.easting, 0.0, 1e-9);
  }
}

TEST(Projection, UnsupportedLatitudeAndBadLongitude) {
  try {
    LocalTransverseMercator tm(LonLat{10.0, 86.0});
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnsupportedLatitude);
  }
  EXPECT_NO_THROW(LocalTransverseMercator(LonLat{10.0, -85.0}));
  EXPECT_THROW(LocalTransverseMercator(LonLat{181.0, 10.0}), Error);
  const FacilityRecord polar{"P", LonLat{0.0, -89.0}, std::nullopt};
  EXPECT_THROW(project_centroid(polar), Error);
}

TEST(MakeAoi, CenteredSquare) {
  const FacilityRecord f{"W", LonLat{-89.40, 43.07}, std::nullopt};
  const GeoBox a = make_aoi(f);
  EXPECT_NEAR(a.min_e, -500, 1e-9);
  EXPECT_NEAR(a.max_n, 500, 1e-9);
  EXPECT_DOUBLE_EQ(a.area(), 1000.0 * 1000.0);
  const GeoBox b = make_aoi(f, 2000);
  EXPECT_NEAR(b.min_e, -1000, 1e-9);
  EXPECT_NEAR(b.max_e, 1000, 1e-9);
  EXPECT_DOUBLE_EQ(b.area(), 2000.0 * 2000.0);
  const auto c = project_centroid(f);
  EXPECT_TRUE(a.contains(c.easting, c.northing));
  EXPECT_EQ(a.crs_id, c.crs_id);
  EXPECT_THROW(make_aoi(f, 0), Error);
}

}  // namespace
}  // namespace appwatch
