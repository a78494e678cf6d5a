// Copyright (c) 2026 satstereo contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SATSTEREO_GEODESY_HPP_
#define SATSTEREO_GEODESY_HPP_

#include <cmath>
#include <limits>

#include "satstereo/types.hpp"

namespace satstereo {

// WGS84 ellipsoid.
inline constexpr double kWgs84A = 6378137.0;
inline constexpr double kWgs84F = 1.0 / 298.257223563;
inline constexpr double kWgs84B = kWgs84A * (1.0 - kWgs84F);
inline constexpr double kWgs84E2 = kWgs84F * (2.0 - kWgs84F);

inline constexpr double kDegToRad = M_PI / 180.0;
inline constexpr double kRadToDeg = 180.0 / M_PI;

/// Geodetic coordinates on the WGS84 ellipsoid. Longitude is normalized to
/// [-180, 180); latitudes outside [-90, 90] are rejected.
struct GeodeticPoint {
  double lat = 0.0;  // degrees
  double lon = 0.0;  // degrees
  double alt = 0.0;  // meters above the ellipsoid

  GeodeticPoint() = default;
  GeodeticPoint(double lat_deg, double lon_deg, double alt_m)
      : lat(lat_deg), lon(lon_deg), alt(alt_m) {
    if (!(lat >= -90.0 && lat <= 90.0)) {
      throw ConfigError("latitude out of [-90, 90]: " + std::to_string(lat));
    }
    lon = std::remainder(lon, 360.0);
    if (lon >= 180.0) lon -= 360.0;  // remainder returns (-180, 180]
  }
};

inline Vec3 geodetic_to_ecef(const GeodeticPoint& p) {
  const double phi = p.lat * kDegToRad;
  const double lam = p.lon * kDegToRad;
  const double sp = std::sin(phi), cp = std::cos(phi);
  const double sl = std::sin(lam), cl = std::cos(lam);
  const double n = kWgs84A / std::sqrt(1.0 - kWgs84E2 * sp * sp);
  return Vec3((n + p.alt) * cp * cl, (n + p.alt) * cp * sl,
              (n * (1.0 - kWgs84E2) + p.alt) * sp);
}

/// Bowring's iteration, run to 1e-12 rad.
inline GeodeticPoint ecef_to_geodetic(const Vec3& ecef) {
  const double x = ecef.x(), y = ecef.y(), z = ecef.z();
  const double p = std::hypot(x, y);
  const double lon = (p > 0.0) ? std::atan2(y, x) : 0.0;
  const double ep2 = (kWgs84A * kWgs84A - kWgs84B * kWgs84B) / (kWgs84B * kWgs84B);

  double beta = std::atan2(z * kWgs84A, p * kWgs84B);
  double phi = 0.0;
  for (int it = 0; it < 50; ++it) {
    const double sb = std::sin(beta), cb = std::cos(beta);
    const double next = std::atan2(z + ep2 * kWgs84B * sb * sb * sb,
                                   p - kWgs84E2 * kWgs84A * cb * cb * cb);
    const double delta = std::abs(next - phi);
    phi = next;
    beta = std::atan2((1.0 - kWgs84F) * std::sin(phi), std::cos(phi));
    if (it > 0 && delta < 1e-12) break;
  }
  const double sp = std::sin(phi), cp = std::cos(phi);
  const double alt = p * cp + z * sp - kWgs84A * std::sqrt(1.0 - kWgs84E2 * sp * sp);
  GeodeticPoint out;
  out.lat = phi * kRadToDeg;
  out.lon = lon * kRadToDeg;
  if (out.lon >= 180.0) out.lon -= 360.0;
  out.alt = alt;
  return out;
}

/// Local East-North-Up frame anchored at an observer point. The conversion is
/// the exact ECEF route, not a small-angle approximation.
class EnuFrame {
 public:
  EnuFrame() : EnuFrame(GeodeticPoint(0.0, 0.0, 0.0)) {}

  explicit EnuFrame(const GeodeticPoint& observer)
      : observer_(observer), origin_ecef_(geodetic_to_ecef(observer)) {
    const double phi = observer.lat * kDegToRad;
    const double lam = observer.lon * kDegToRad;
    const double sp = std::sin(phi), cp = std::cos(phi);
    const double sl = std::sin(lam), cl = std::cos(lam);
    rot_ << -sl, cl, 0.0,
        -sp * cl, -sp * sl, cp,
        cp * cl, cp * sl, sp;
  }

  const GeodeticPoint& observer() const { return observer_; }
  const Mat3& rotation_ecef_to_enu() const { return rot_; }
  const Vec3& origin_ecef() const { return origin_ecef_; }

  Vec3 to_enu(const GeodeticPoint& p) const {
    return rot_ * (geodetic_to_ecef(p) - origin_ecef_);
  }

  GeodeticPoint to_geodetic(const Vec3& enu) const {
    return ecef_to_geodetic(origin_ecef_ + rot_.transpose() * enu);
  }

 private:
  GeodeticPoint observer_;
  Vec3 origin_ecef_;
  Mat3 rot_;
};

/// Geodetic area of interest, a lat/lon rectangle.
struct AoiRect {
  double lat_min = 0.0, lat_max = 0.0;
  double lon_min = 0.0, lon_max = 0.0;
};

/// Axis-aligned box in ENU meters.
struct BoundingCube {
  Vec3 lo = Vec3::Zero();
  Vec3 hi = Vec3::Zero();

  bool contains(const Vec3& p) const {
    return (p.array() >= lo.array()).all() && (p.array() <= hi.array()).all();
  }
  Vec3 extent() const { return hi - lo; }
  Vec3 center() const { return 0.5 * (lo + hi); }
};

/// Default observer: AOI center at the low end of the altitude range.
inline GeodeticPoint default_observer(const AoiRect& aoi, double z_lo) {
  return GeodeticPoint(0.5 * (aoi.lat_min + aoi.lat_max),
                       0.5 * (aoi.lon_min + aoi.lon_max), z_lo);
}

/// ENU box covering the geodetic AOI over [z_lo, z_hi], each axis grown by
/// `margin` about its center.
inline BoundingCube make_bounding_cube(const AoiRect& aoi, double z_lo,
                                       double z_hi, const EnuFrame& frame,
                                       double margin = 0.05) {
  if (!(aoi.lat_min < aoi.lat_max) || !(aoi.lon_min < aoi.lon_max)) {
    throw ConfigError("degenerate AOI rectangle");
  }
  if (!(z_lo < z_hi)) {
    throw ConfigError("degenerate altitude range");
  }
  if (!(z_hi - z_lo <= 10000.0)) {
    throw ConfigError("altitude range exceeds 10 km");
  }
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (double lat : {aoi.lat_min, aoi.lat_max}) {
    for (double lon : {aoi.lon_min, aoi.lon_max}) {
      for (double alt : {z_lo, z_hi}) {
        const Vec3 p = frame.to_enu(GeodeticPoint(lat, lon, alt));
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
      }
    }
  }
  const Vec3 c = 0.5 * (lo + hi);
  const Vec3 half = 0.5 * (hi - lo) * (1.0 + margin);
  return BoundingCube{c - half, c + half};
}

}  // namespace satstereo

#endif  // SATSTEREO_GEODESY_HPP_
