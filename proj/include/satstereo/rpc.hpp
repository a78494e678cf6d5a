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

#ifndef SATSTEREO_RPC_HPP_
#define SATSTEREO_RPC_HPP_

#include <array>
#include <cmath>
#include <vector>

#include "satstereo/geodesy.hpp"
#include "satstereo/parallel.hpp"
#include "satstereo/types.hpp"

namespace satstereo {

inline constexpr int kRpcCoeffCount = 20;
using RpcCoeffs = std::array<double, kRpcCoeffCount>;

// Cubic monomial basis in normalized (x, y, z) = (lat, lon, alt), RPC00B
// order:
//   1, x, y, z, xy, xz, yz, x^2, y^2, z^2, xyz, x^3, xy^2, xz^2, x^2y,
//   y^3, yz^2, x^2z, y^2z, z^3
inline std::array<double, kRpcCoeffCount> rpc_basis(double x, double y,
                                                    double z) {
  return {1.0,     x,         y,         z,         x * y,
          x * z,   y * z,     x * x,     y * y,     z * z,
          x * y * z, x * x * x, x * y * y, x * z * z, x * x * y,
          y * y * y, y * z * z, x * x * z, y * y * z, z * z * z};
}

/// Gradient of each basis monomial with respect to (x, y, z).
inline std::array<Vec3, kRpcCoeffCount> rpc_basis_grad(double x, double y,
                                                       double z) {
  return {Vec3(0, 0, 0),
          Vec3(1, 0, 0),
          Vec3(0, 1, 0),
          Vec3(0, 0, 1),
          Vec3(y, x, 0),
          Vec3(z, 0, x),
          Vec3(0, z, y),
          Vec3(2 * x, 0, 0),
          Vec3(0, 2 * y, 0),
          Vec3(0, 0, 2 * z),
          Vec3(y * z, x * z, x * y),
          Vec3(3 * x * x, 0, 0),
          Vec3(y * y, 2 * x * y, 0),
          Vec3(z * z, 0, 2 * x * z),
          Vec3(2 * x * y, x * x, 0),
          Vec3(0, 3 * y * y, 0),
          Vec3(0, z * z, 2 * y * z),
          Vec3(2 * x * z, 0, x * x),
          Vec3(0, 2 * y * z, y * y),
          Vec3(0, 0, 3 * z * z)};
}

inline double rpc_poly_eval(const RpcCoeffs& c, const std::array<double, 20>& b) {
  double s = 0.0;
  for (int i = 0; i < kRpcCoeffCount; ++i) s += c[i] * b[i];
  return s;
}

/// Rational polynomial camera: (lat, lon, alt) -> (u, v) pixels, u = sample
/// (column), v = line (row). Both denominators have constant term 1, leaving
/// 78 free coefficients plus the 10 normalization constants.
struct RpcCamera {
  RpcCoeffs samp_num{}, samp_den{}, line_num{}, line_den{};
  double lat_off = 0, lat_scale = 1;
  double lon_off = 0, lon_scale = 1;
  double alt_off = 0, alt_scale = 1;
  double col_off = 0, col_scale = 1;  // u
  double row_off = 0, row_scale = 1;  // v
  int width = 0, height = 0;

  void validate() const {
    if (!(lat_scale > 0 && lon_scale > 0 && alt_scale > 0 && col_scale > 0 &&
          row_scale > 0)) {
      throw ConfigError("RPC normalization scales must be positive");
    }
    if (samp_den[0] != 1.0 || line_den[0] != 1.0) {
      throw ConfigError("RPC denominator constant terms must be 1");
    }
    if (width <= 0 || height <= 0) {
      throw ConfigError("RPC image dimensions must be positive");
    }
  }

  Vec3 normalize(const GeodeticPoint& p) const {
    return Vec3((p.lat - lat_off) / lat_scale, (p.lon - lon_off) / lon_scale,
                (p.alt - alt_off) / alt_scale);
  }

  bool pixel_in_bounds(const Vec2& pix) const {
    return pix.x() >= 0.0 && pix.x() <= width - 1.0 && pix.y() >= 0.0 &&
           pix.y() <= height - 1.0;
  }
};

inline Vec2 rpc_project_normalized(const RpcCamera& cam, const Vec3& n) {
  const auto b = rpc_basis(n.x(), n.y(), n.z());
  const double du = rpc_poly_eval(cam.samp_den, b);
  const double dv = rpc_poly_eval(cam.line_den, b);
  if (std::abs(du) < 1e-12 || std::abs(dv) < 1e-12) {
    throw StageError("degenerate RPC: denominator vanishes");
  }
  return Vec2(cam.col_off + cam.col_scale * rpc_poly_eval(cam.samp_num, b) / du,
              cam.row_off + cam.row_scale * rpc_poly_eval(cam.line_num, b) / dv);
}

inline Vec2 rpc_project(const RpcCamera& cam, const GeodeticPoint& p) {
  return rpc_project_normalized(cam, cam.normalize(p));
}

/// d(u, v) / d(normalized lat, lon, alt), 2x3.
inline Eigen::Matrix<double, 2, 3> rpc_jacobian_normalized(const RpcCamera& cam,
                                                           const Vec3& n) {
  const auto b = rpc_basis(n.x(), n.y(), n.z());
  const auto g = rpc_basis_grad(n.x(), n.y(), n.z());
  const double nu = rpc_poly_eval(cam.samp_num, b);
  const double du = rpc_poly_eval(cam.samp_den, b);
  const double nv = rpc_poly_eval(cam.line_num, b);
  const double dv = rpc_poly_eval(cam.line_den, b);
  Vec3 gnu = Vec3::Zero(), gdu = Vec3::Zero(), gnv = Vec3::Zero(),
       gdv = Vec3::Zero();
  for (int i = 0; i < kRpcCoeffCount; ++i) {
    gnu += cam.samp_num[i] * g[i];
    gdu += cam.samp_den[i] * g[i];
    gnv += cam.line_num[i] * g[i];
    gdv += cam.line_den[i] * g[i];
  }
  Eigen::Matrix<double, 2, 3> jac;
  jac.row(0) = (cam.col_scale * (gnu * du - nu * gdu) / (du * du)).transpose();
  jac.row(1) = (cam.row_scale * (gnv * dv - nv * gdv) / (dv * dv)).transpose();
  return jac;
}

/// Newton solve for (lat, lon) at fixed altitude, started at the
/// normalization center. Converges far below the 1e-3 px contract so that
/// round trips hold to ~1e-9 degrees.
inline GeodeticPoint rpc_inverse_project(const RpcCamera& cam, const Vec2& pix,
                                         double altitude) {
  if (!cam.pixel_in_bounds(pix)) {
    throw ConfigError("pixel outside image bounds");
  }
  const double zn = (altitude - cam.alt_off) / cam.alt_scale;
  Vec3 n(0.0, 0.0, zn);
  double residual = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 100; ++it) {
    const Vec2 err = rpc_project_normalized(cam, n) - pix;
    residual = err.norm();
    if (residual < 1e-9) break;
    const Eigen::Matrix<double, 2, 3> jac = rpc_jacobian_normalized(cam, n);
    Eigen::Matrix2d j2 = jac.leftCols<2>();
    if (std::abs(j2.determinant()) < 1e-18) {
      throw StageError("RPC inverse projection: singular Jacobian");
    }
    const Vec2 step = j2.inverse() * err;
    n.x() -= step.x();
    n.y() -= step.y();
  }
  if (!(residual < 1e-3)) {
    throw StageError("RPC inverse projection did not converge, residual " +
                     std::to_string(residual) + " px");
  }
  return GeodeticPoint(cam.lat_off + cam.lat_scale * n.x(),
                       cam.lon_off + cam.lon_scale * n.y(), altitude);
}

struct RpcTriangulation {
  GeodeticPoint point;
  double rms_px = 0.0;
  bool degenerate_geometry = false;  // near-parallel rays / duplicate views
  int iterations = 0;
};

/// Damped Gauss-Newton (Levenberg-Marquardt) on normalized (lat, lon, alt).
inline RpcTriangulation rpc_triangulate(const std::vector<RpcCamera>& cams,
                                        const std::vector<Vec2>& obs,
                                        const GeodeticPoint& init) {
  if (cams.size() != obs.size()) {
    throw ConfigError("rpc_triangulate: cameras/observations size mismatch");
  }
  if (cams.size() < 2) {
    throw ConfigError("rpc_triangulate: need at least 2 views");
  }
  const RpcCamera& ref = cams[0];
  Vec3 q = ref.normalize(init);

  const auto to_geodetic = [&ref](const Vec3& n) {
    return GeodeticPoint(ref.lat_off + ref.lat_scale * n.x(),
                         ref.lon_off + ref.lon_scale * n.y(),
                         ref.alt_off + ref.alt_scale * n.z());
  };
  // Chain rule from the reference normalization into each camera's own.
  const auto cost_and_system = [&](const Vec3& n, Mat3* jtj, Vec3* jtr) {
    double cost = 0.0;
    if (jtj) jtj->setZero();
    if (jtr) jtr->setZero();
    const GeodeticPoint p = to_geodetic(n);
    for (size_t i = 0; i < cams.size(); ++i) {
      const Vec3 ni = cams[i].normalize(p);
      const Vec2 r = rpc_project_normalized(cams[i], ni) - obs[i];
      cost += r.squaredNorm();
      if (jtj) {
        Eigen::Matrix<double, 2, 3> jac = rpc_jacobian_normalized(cams[i], ni);
        jac.col(0) *= ref.lat_scale / cams[i].lat_scale;
        jac.col(1) *= ref.lon_scale / cams[i].lon_scale;
        jac.col(2) *= ref.alt_scale / cams[i].alt_scale;
        *jtj += jac.transpose() * jac;
        *jtr += jac.transpose() * r;
      }
    }
    return cost;
  };

  Mat3 jtj;
  Vec3 jtr;
  double cost = cost_and_system(q, &jtj, &jtr);
  const double initial_cost = cost;
  double lm_lambda = 1e-3;
  int iters = 0;
  for (; iters < 100; ++iters) {
    cost_and_system(q, &jtj, &jtr);
    const Mat3 damped = jtj + lm_lambda * Mat3::Identity();
    const Vec3 step = damped.ldlt().solve(-jtr);
    const Vec3 q_new = q + step;
    const double new_cost = cost_and_system(q_new, nullptr, nullptr);
    if (new_cost < cost) {
      q = q_new;
      const double rel = (cost - new_cost) / std::max(cost, 1e-300);
      cost = new_cost;
      lm_lambda = std::max(lm_lambda / 10.0, 1e-12);
      if (rel < 1e-12 || step.norm() < 1e-14) break;
    } else {
      lm_lambda *= 10.0;
      if (lm_lambda > 1e12) break;
    }
    if (cost > 10.0 * initial_cost + 1e-9) {
      throw StageError("rpc_triangulate diverged: residual grew over init");
    }
  }

  RpcTriangulation out;
  out.point = to_geodetic(q);
  out.rms_px = std::sqrt(cost / static_cast<double>(cams.size()));
  out.iterations = iters;
  cost_and_system(q, &jtj, &jtr);
  const Eigen::SelfAdjointEigenSolver<Mat3> eig(jtj);
  const double lmin = eig.eigenvalues()(0), lmax = eig.eigenvalues()(2);
  out.degenerate_geometry = !(lmin > 0.0) || lmax / lmin > 1e10;
  return out;
}

/// One ENU/pixel correspondence from sampling a camera model.
struct Correspondence {
  Vec3 enu;
  Vec2 pix;
};

/// Uniform M^3 grid over the bounding cube (endpoints included), projected
/// through the RPC; samples landing outside the image are dropped. Output
/// order is x-major, then y, then z.
inline std::vector<Correspondence> sample_rpc_grid(const RpcCamera& cam,
                                                   const BoundingCube& cube,
                                                   const EnuFrame& frame,
                                                   int samples_per_axis) {
  if (samples_per_axis < 2) {
    throw ConfigError("sample_rpc_grid: need at least 2 samples per axis");
  }
  const int m = samples_per_axis;
  const Vec3 step = cube.extent() / static_cast<double>(m - 1);
  std::vector<std::vector<Correspondence>> slabs(m);
  parallel_for(0, m, [&](std::int64_t ix) {
    auto& slab = slabs[ix];
    slab.reserve(static_cast<size_t>(m) * m);
    const double x = cube.lo.x() + step.x() * static_cast<double>(ix);
    for (int iy = 0; iy < m; ++iy) {
      const double y = cube.lo.y() + step.y() * static_cast<double>(iy);
      for (int iz = 0; iz < m; ++iz) {
        const double z = cube.lo.z() + step.z() * static_cast<double>(iz);
        const Vec3 enu(x, y, z);
        const Vec2 pix = rpc_project(cam, frame.to_geodetic(enu));
        if (cam.pixel_in_bounds(pix)) slab.push_back({enu, pix});
      }
    }
  });
  std::vector<Correspondence> out;
  out.reserve(static_cast<size_t>(m) * m * m);
  for (const auto& slab : slabs) out.insert(out.end(), slab.begin(), slab.end());
  if (out.empty()) {
    throw StageError("sample_rpc_grid: camera does not see the AOI");
  }
  return out;
}

}  // namespace satstereo

#endif  // SATSTEREO_RPC_HPP_
