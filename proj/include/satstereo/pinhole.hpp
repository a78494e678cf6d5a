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

#ifndef SATSTEREO_PINHOLE_HPP_
#define SATSTEREO_PINHOLE_HPP_

#include <cmath>
#include <vector>

#include "satstereo/parallel.hpp"
#include "satstereo/raster.hpp"
#include "satstereo/rpc.hpp"
#include "satstereo/types.hpp"

namespace satstereo {

/// Pinhole camera K[R t] in ENU meters. K is upper triangular with positive
/// diagonal and K(2,2) = 1; skew K(0,1) is generally non-zero for cameras
/// fitted to satellite imagery.
struct PinholeCamera {
  Mat3 K = Mat3::Identity();
  Mat3 R = Mat3::Identity();
  Vec3 t = Vec3::Zero();
  int width = 0, height = 0;

  Mat34 projection() const {
    Mat34 p;
    p.leftCols<3>() = K * R;
    p.col(3) = K * t;
    return p;
  }

  Vec2 project(const Vec3& x) const {
    const Vec3 h = K * (R * x + t);
    return Vec2(h.x() / h.z(), h.y() / h.z());
  }

  double depth(const Vec3& x) const { return (R * x + t).z(); }

  double fx() const { return K(0, 0); }
  double fy() const { return K(1, 1); }
  double skew() const { return K(0, 1); }
  double cx() const { return K(0, 2); }
  double cy() const { return K(1, 2); }
};

struct DltResult {
  Mat34 P;
  double max_err_px = 0.0;
  double mean_err_px = 0.0;
  double condition = 0.0;  // design-matrix condition, excluding the solution direction
};

inline Vec2 project_p34(const Mat34& P, const Vec3& x) {
  const Vec3 h = P * x.homogeneous();
  return Vec2(h.x() / h.z(), h.y() / h.z());
}

/// Direct linear transformation with Hartley normalization on both the 3D
/// and 2D sides. P is returned with positive depths for the inputs and the
/// left 3x3 block scaled to unit max magnitude.
inline DltResult fit_projection_dlt(const std::vector<Correspondence>& corrs) {
  const size_t n = corrs.size();
  if (n < 6) {
    throw ConfigError("fit_projection_dlt: need at least 6 correspondences");
  }

  Vec3 c3 = Vec3::Zero();
  Vec2 c2 = Vec2::Zero();
  for (const auto& c : corrs) {
    c3 += c.enu;
    c2 += c.pix;
  }
  c3 /= static_cast<double>(n);
  c2 /= static_cast<double>(n);
  double s3 = 0.0, s2 = 0.0;
  for (const auto& c : corrs) {
    s3 += (c.enu - c3).norm();
    s2 += (c.pix - c2).norm();
  }
  s3 = std::sqrt(3.0) * n / std::max(s3, 1e-12);
  s2 = std::sqrt(2.0) * n / std::max(s2, 1e-12);

  // Reduce the 2n x 12 design matrix to its 12x12 R factor by blockwise QR;
  // this keeps the true singular values (no normal-equation squaring).
  constexpr int kBlockRows = 512;
  Eigen::Matrix<double, Eigen::Dynamic, 12> stack(12 + 2 * kBlockRows, 12);
  stack.setZero();
  int rows = 0;  // rows 0..11 hold the carried R factor
  const auto reduce = [&](int filled) {
    const Eigen::HouseholderQR<Eigen::Matrix<double, Eigen::Dynamic, 12>> qr(
        stack.topRows(filled));
    const Eigen::Matrix<double, 12, 12> r =
        qr.matrixQR().topRows(12).template triangularView<Eigen::Upper>();
    stack.setZero();
    stack.topRows(12) = r;
    rows = 12;
  };
  for (const auto& c : corrs) {
    const Vec3 xn = s3 * (c.enu - c3);
    const double u = s2 * (c.pix.x() - c2.x());
    const double v = s2 * (c.pix.y() - c2.y());
    const Vec4 xh = xn.homogeneous();
    stack.row(rows).setZero();
    stack.row(rows).segment<4>(0) = xh.transpose();
    stack.row(rows).segment<4>(8) = -u * xh.transpose();
    ++rows;
    stack.row(rows).setZero();
    stack.row(rows).segment<4>(4) = xh.transpose();
    stack.row(rows).segment<4>(8) = -v * xh.transpose();
    ++rows;
    if (rows >= stack.rows()) reduce(rows);
  }
  reduce(rows);

  const Eigen::JacobiSVD<Eigen::Matrix<double, 12, 12>> svd(
      stack.topRows(12), Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double cond = sv(0) / std::max(sv(10), 1e-300);
  if (!(cond <= 1e12)) {
    throw StageError("fit_projection_dlt: degenerate sample set (condition " +
                     std::to_string(cond) + ")");
  }
  const Eigen::Matrix<double, 12, 1> p = svd.matrixV().col(11);

  Mat34 pn;
  pn.row(0) = p.segment<4>(0).transpose();
  pn.row(1) = p.segment<4>(4).transpose();
  pn.row(2) = p.segment<4>(8).transpose();

  // Undo the normalizing similarities.
  Mat3 t2inv = Mat3::Identity();
  t2inv(0, 0) = t2inv(1, 1) = 1.0 / s2;
  t2inv(0, 2) = c2.x();
  t2inv(1, 2) = c2.y();
  Mat4 t3 = Mat4::Identity();
  t3.topLeftCorner<3, 3>() *= s3;
  t3.topRightCorner<3, 1>() = -s3 * c3;
  Mat34 pd = t2inv * pn * t3;

  // Positive depth for the scene, then unit max magnitude on the left block.
  if (pd.row(2) * c3.homogeneous() < 0.0) pd = -pd;
  pd /= pd.leftCols<3>().cwiseAbs().maxCoeff();

  DltResult out;
  out.P = pd;
  out.condition = cond;
  double sum = 0.0;
  for (const auto& c : corrs) {
    const double e = (project_p34(pd, c.enu) - c.pix).norm();
    sum += e;
    out.max_err_px = std::max(out.max_err_px, e);
  }
  out.mean_err_px = sum / static_cast<double>(n);
  return out;
}

/// RQ factorization of the left 3x3 block into K[R t], with K's diagonal
/// made positive and det(R) = +1. K[R t] reproduces the canonically rescaled
/// input exactly.
inline PinholeCamera factorize_projection(const Mat34& P, int width = 0,
                                          int height = 0) {
  Mat3 m = P.leftCols<3>();
  const double det = m.determinant();
  if (std::abs(det) < 1e-300 ||
      std::abs(det) < 1e-15 * std::pow(m.cwiseAbs().maxCoeff(), 3)) {
    throw StageError("factorize_projection: singular left 3x3 block");
  }
  // Canonical gauge: positive determinant, unit third row.
  const double scale = (det > 0 ? 1.0 : -1.0) / m.row(2).norm();
  const Mat34 pc = P * scale;
  m = pc.leftCols<3>();

  Mat3 flip;
  flip << 0, 0, 1, 0, 1, 0, 1, 0, 0;
  const Mat3 a = (flip * m).transpose();
  const Eigen::HouseholderQR<Mat3> qr(a);
  const Mat3 q = qr.householderQ();
  const Mat3 r = qr.matrixQR().triangularView<Eigen::Upper>();
  Mat3 k = flip * r.transpose() * flip;
  Mat3 rot = flip * q.transpose();

  Vec3 d;
  for (int i = 0; i < 3; ++i) d(i) = k(i, i) < 0 ? -1.0 : 1.0;
  k = k * d.asDiagonal();
  rot = d.asDiagonal() * rot;

  PinholeCamera cam;
  cam.K = k / k(2, 2);
  cam.R = rot;
  cam.t = cam.K.inverse() * pc.col(3);
  cam.width = width;
  cam.height = height;
  return cam;
}

/// Skew decomposition K = S * K' with S = [1, s/fy, 0; 0, 1, 0; 0, 0, 1].
/// Returns the skew-free camera and the image-space warp S^-1 that resamples
/// old pixels onto the corrected grid.
struct SkewCorrection {
  PinholeCamera camera;  // s = 0, same R and t
  Mat3 warp;             // maps original pixel coords to corrected coords
};

inline SkewCorrection skew_correct(const PinholeCamera& cam) {
  if (!(cam.fy() > 0.0)) {
    throw ConfigError("skew_correct: fy must be positive");
  }
  const double ratio = cam.skew() / cam.fy();
  SkewCorrection out;
  out.camera = cam;
  out.camera.K(0, 1) = 0.0;
  out.camera.K(0, 2) = cam.cx() - ratio * cam.cy();
  out.warp = Mat3::Identity();
  out.warp(0, 1) = -ratio;
  return out;
}

inline Mat3 skew_factor_matrix(const PinholeCamera& cam) {
  Mat3 s = Mat3::Identity();
  s(0, 1) = cam.skew() / cam.fy();
  return s;
}

/// Inverse-mapping bilinear resampling. Output has the input's dimensions;
/// pixels that map outside the source are no-data.
inline Raster warp_image(const Raster& img, const Mat3& warp) {
  const double det = warp.determinant();
  if (!(std::abs(det) > 1e-12)) {
    throw ConfigError("warp_image: non-invertible warp");
  }
  const Mat3 inv = warp.inverse();
  Raster out(img.width(), img.height(), kNoData);
  parallel_for(0, img.height(), [&](std::int64_t y) {
    for (int x = 0; x < img.width(); ++x) {
      const Vec3 src = inv * Vec3(static_cast<double>(x), static_cast<double>(y), 1.0);
      out.at(x, static_cast<int>(y)) =
          img.bilinear(src.x() / src.z(), src.y() / src.z());
    }
  });
  return out;
}

/// 4x4 projection with the extra row (0, 0, zbar, -zbar*d): the fourth
/// homogeneous output m = zbar*(z - d)/Z is the plane-plus-parallax depth,
/// bounded by the scene height range. Scaled to unit max magnitude.
struct ReparamProjection44 {
  Mat4 P = Mat4::Identity();
  double d = 0.0;     // reference plane height (below the scene)
  double zbar = 0.0;  // mean conventional depth of the scene points

  Mat4f single_precision() const { return P.cast<float>(); }

  Vec2 project(const Vec3& x) const {
    const Vec4 h = P * x.homogeneous();
    return Vec2(h.x() / h.z(), h.y() / h.z());
  }

  double reparam_depth(const Vec3& x) const {
    const Vec4 h = P * x.homogeneous();
    return h.w() / h.z();
  }
};

inline ReparamProjection44 build_reparam_projection(const Mat34& P, double d,
                                                    double zbar,
                                                    double scene_z_min) {
  if (!(d < scene_z_min)) {
    throw ConfigError(
        "build_reparam_projection: reference plane must lie below the scene");
  }
  if (!(zbar > 0.0)) {
    throw ConfigError("build_reparam_projection: mean depth must be positive");
  }
  Mat4 p44;
  p44.topRows<3>() = P;
  p44.row(3) << 0.0, 0.0, zbar, -zbar * d;
  p44 /= p44.cwiseAbs().maxCoeff();
  if (std::abs(p44.determinant()) < 1e-30) {
    throw StageError("build_reparam_projection: augmented matrix singular");
  }
  ReparamProjection44 out;
  out.P = p44;
  out.d = d;
  out.zbar = zbar;
  return out;
}

}  // namespace satstereo

#endif  // SATSTEREO_PINHOLE_HPP_
