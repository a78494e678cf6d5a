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

#include "satstereo/pinhole.hpp"

#include <random>

#include <gtest/gtest.h>

namespace satstereo {
namespace {

Mat3 RotationZyx(double yaw, double pitch, double roll) {
  return (Eigen::AngleAxisd(yaw, Vec3::UnitZ()) *
          Eigen::AngleAxisd(pitch, Vec3::UnitY()) *
          Eigen::AngleAxisd(roll, Vec3::UnitX()))
      .toRotationMatrix();
}

// Satellite-scale pinhole: ~650 km range, ~0.5 m ground sample distance,
// slightly off-nadir, with skew.
PinholeCamera SatelliteCamera(double off_nadir_deg = 8.0, double skew = 35.0) {
  PinholeCamera cam;
  cam.K << 1.3e6, skew, 2048.0, 0.0, 1.302e6, 2048.0, 0.0, 0.0, 1.0;
  // Camera looks along -z tilted by the off-nadir angle.
  const double a = off_nadir_deg * M_PI / 180.0;
  Mat3 r;
  r.col(0) = Vec3(1.0, 0.0, 0.0);
  r.col(1) = Vec3(0.0, -std::cos(a), -std::sin(a));
  r.col(2) = Vec3(0.0, -std::sin(a), std::cos(a)).cross(Vec3(1.0, 0.0, 0.0));
  // Rebuild a clean orthonormal basis with view direction d.
  const Vec3 d = Vec3(std::sin(a) * 0.3, std::sin(a), -std::cos(a)).normalized();
  const Vec3 right = Vec3(1.0, 0.2, 0.0).normalized();
  const Vec3 down = d.cross(right).normalized();
  cam.R.row(0) = right.transpose();
  cam.R.row(1) = down.transpose();
  cam.R.row(2) = (right.cross(down)).transpose();
  const Vec3 center = -650000.0 * cam.R.row(2).transpose();  // looks at origin
  cam.t = -cam.R * center;
  cam.width = 4096;
  cam.height = 4096;
  return cam;
}

std::vector<Correspondence> SampleCamera(const PinholeCamera& cam,
                                         const Vec3& lo, const Vec3& hi,
                                         int n_per_axis) {
  std::vector<Correspondence> corrs;
  for (int ix = 0; ix < n_per_axis; ++ix) {
    for (int iy = 0; iy < n_per_axis; ++iy) {
      for (int iz = 0; iz < n_per_axis; ++iz) {
        Vec3 f(ix, iy, iz);
        f /= (n_per_axis - 1.0);
        const Vec3 x = lo + f.cwiseProduct(hi - lo);
        corrs.push_back({x, cam.project(x)});
      }
    }
  }
  return corrs;
}

TEST(FitProjectionDlt, ExactRecoveryFromPinhole) {
  const PinholeCamera cam = SatelliteCamera();
  const auto corrs =
      SampleCamera(cam, Vec3(-250, -250, 0), Vec3(250, 250, 100), 6);
  const DltResult fit = fit_projection_dlt(corrs);
  EXPECT_LT(fit.max_err_px, 1e-8);

  // Recovered P equals the truth up to scale.
  const Mat34 truth = cam.projection();
  const double alpha = (truth.cwiseProduct(fit.P)).sum() /
                       fit.P.cwiseProduct(fit.P).sum();
  EXPECT_LT((truth - alpha * fit.P).norm() / truth.norm(), 1e-10);
}

// A pushbroom-style rational camera: the row coordinate is linear in the
// normalized geodetic coordinates, the column is a ratio of linears. DLT
// over a ~1 km cube must fit it to well under half a pixel.
TEST(FitProjectionDlt, PushbroomRpcUnderHalfPixel) {
  RpcCamera rpc;
  rpc.lat_off = -34.49;
  rpc.lat_scale = 0.006;
  rpc.lon_off = -58.58;
  rpc.lon_scale = 0.007;
  rpc.alt_off = 50.0;
  rpc.alt_scale = 150.0;
  rpc.col_off = 1300.0;
  rpc.col_scale = 1300.0;
  rpc.row_off = 1300.0;
  rpc.row_scale = 1300.0;
  rpc.width = 2601;
  rpc.height = 2601;
  rpc.line_num = {0.0, 0.98, 0.05, 0.031};
  rpc.line_den[0] = 1.0;
  rpc.samp_num = {0.0, -0.04, 1.01, 0.026};
  rpc.samp_den = {1.0, 0.0007, 0.0012, 0.0004};
  rpc.validate();

  const EnuFrame frame(GeodeticPoint(rpc.lat_off, rpc.lon_off, 0.0));
  AoiRect aoi;
  aoi.lat_min = rpc.lat_off - 0.0045;
  aoi.lat_max = rpc.lat_off + 0.0045;
  aoi.lon_min = rpc.lon_off - 0.0045;
  aoi.lon_max = rpc.lon_off + 0.0045;
  const BoundingCube cube = make_bounding_cube(aoi, 0.0, 100.0, frame);
  const auto corrs = sample_rpc_grid(rpc, cube, frame, 20);
  const DltResult fit = fit_projection_dlt(corrs);
  EXPECT_LT(fit.max_err_px, 0.5);
  EXPECT_LT(fit.mean_err_px, 0.2);
}

TEST(FitProjectionDlt, RejectsUnderdeterminedAndCoplanar) {
  const PinholeCamera cam = SatelliteCamera();
  auto corrs = SampleCamera(cam, Vec3(-250, -250, 0), Vec3(250, 250, 100), 6);
  corrs.resize(5);
  EXPECT_THROW(fit_projection_dlt(corrs), ConfigError);

  // All samples on the z = 40 plane.
  std::vector<Correspondence> flat;
  for (int ix = 0; ix < 8; ++ix) {
    for (int iy = 0; iy < 8; ++iy) {
      const Vec3 x(-200.0 + 50.0 * ix, -180.0 + 48.0 * iy, 40.0);
      flat.push_back({x, cam.project(x)});
    }
  }
  EXPECT_THROW(fit_projection_dlt(flat), StageError);
}

TEST(FitProjectionDlt, TranslationInvariantUnderNormalization) {
  const PinholeCamera cam = SatelliteCamera();
  const auto corrs =
      SampleCamera(cam, Vec3(-250, -250, 0), Vec3(250, 250, 100), 5);
  const DltResult base = fit_projection_dlt(corrs);

  for (const double shift : {1000.0, -1000.0}) {
    auto moved = corrs;
    for (auto& c : moved) c.enu += Vec3(shift, shift, 0.0);
    const DltResult fit = fit_projection_dlt(moved);
    for (const auto& c : corrs) {
      const Vec2 a = project_p34(base.P, c.enu);
      const Vec2 b = project_p34(fit.P, c.enu + Vec3(shift, shift, 0.0));
      EXPECT_LT((a - b).norm(), 1e-6);
    }
  }
}

TEST(FactorizeProjection, RoundTripRecoversKRt) {
  const PinholeCamera cam = SatelliteCamera(6.0, 42.0);
  const Mat34 p = -3.7 * cam.projection();  // arbitrary negative scale
  const PinholeCamera rec = factorize_projection(p, cam.width, cam.height);
  EXPECT_LT((rec.K - cam.K).norm() / cam.K.norm(), 1e-10);
  EXPECT_LT((rec.R - cam.R).norm(), 1e-10);
  EXPECT_LT((rec.t - cam.t).norm() / cam.t.norm(), 1e-10);
  EXPECT_NEAR(rec.R.determinant(), 1.0, 1e-9);
}

TEST(FactorizeProjection, RecomposesDltFitUpToPositiveScale) {
  const PinholeCamera cam = SatelliteCamera();
  const auto corrs =
      SampleCamera(cam, Vec3(-250, -250, 0), Vec3(250, 250, 100), 5);
  const DltResult fit = fit_projection_dlt(corrs);
  const PinholeCamera rec = factorize_projection(fit.P);
  const Mat34 rebuilt = rec.projection();
  const double alpha = rebuilt.cwiseProduct(fit.P).sum() /
                       fit.P.cwiseProduct(fit.P).sum();
  EXPECT_GT(alpha, 0.0);
  EXPECT_LT((rebuilt - alpha * fit.P).norm() / rebuilt.norm(), 1e-10);
  // Fitted satellite cameras keep a modest non-zero skew.
  EXPECT_LT(std::abs(rec.skew()) / rec.fy(), 0.1);
}

TEST(FactorizeProjection, SingularLeftBlockRejected) {
  Mat34 p = Mat34::Zero();
  p(0, 0) = 1.0;
  p(1, 1) = 1.0;  // rank-2 left block
  p(2, 3) = 1.0;
  EXPECT_THROW(factorize_projection(p), StageError);
}

TEST(SkewCorrect, ZeroSkewIsIdentity) {
  PinholeCamera cam = SatelliteCamera(8.0, 0.0);
  const SkewCorrection sc = skew_correct(cam);
  EXPECT_TRUE(sc.warp.isIdentity(0.0));
  EXPECT_TRUE(sc.camera.K.isApprox(cam.K, 0.0));
}

TEST(SkewCorrect, WorkedExample) {
  PinholeCamera cam;
  cam.K << 1000.0, 10.0, 500.0, 0.0, 1000.0, 500.0, 0.0, 0.0, 1.0;
  const SkewCorrection sc = skew_correct(cam);
  Mat3 expected_kp;
  expected_kp << 1000.0, 0.0, 495.0, 0.0, 1000.0, 500.0, 0.0, 0.0, 1.0;
  EXPECT_TRUE(sc.camera.K.isApprox(expected_kp, 1e-15));
  Mat3 s = skew_factor_matrix(cam);
  EXPECT_DOUBLE_EQ(s(0, 1), 0.01);
  // Recomposition S * K' = K at machine precision.
  EXPECT_TRUE((s * sc.camera.K).isApprox(cam.K, 1e-16));
  EXPECT_TRUE((s * sc.warp).isApprox(Mat3::Identity(), 1e-16));
}

TEST(SkewCorrect, WarpComposedWithKMatchesKPrime) {
  const PinholeCamera cam = SatelliteCamera(7.0, 55.0);
  const SkewCorrection sc = skew_correct(cam);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> d(-400.0, 400.0);
  for (int i = 0; i < 200; ++i) {
    const Vec3 x(d(rng), d(rng), std::abs(d(rng)) * 0.2);
    const Vec2 orig = cam.project(x);
    const Vec3 warped = sc.warp * Vec3(orig.x(), orig.y(), 1.0);
    const Vec2 direct = sc.camera.project(x);
    EXPECT_NEAR(warped.x() / warped.z(), direct.x(), 1e-12);
    EXPECT_NEAR(warped.y() / warped.z(), direct.y(), 1e-12);
  }
}

TEST(WarpImage, IdentityIsBitExact) {
  Raster img(17, 13);
  std::mt19937 rng(5);
  std::uniform_real_distribution<float> d(0.0f, 1.0f);
  for (auto& v : img.data()) v = d(rng);
  const Raster out = warp_image(img, Mat3::Identity());
  ASSERT_EQ(out.size(), img.size());
  for (size_t i = 0; i < img.size(); ++i) {
    EXPECT_EQ(out.data()[i], img.data()[i]);
  }
}

TEST(WarpImage, ConstantImageStaysConstant) {
  Raster img(32, 32, 0.625f);
  Mat3 shear = Mat3::Identity();
  shear(0, 1) = -0.17;
  const Raster out = warp_image(img, shear);
  int valid = 0;
  for (int y = 0; y < out.height(); ++y) {
    for (int x = 0; x < out.width(); ++x) {
      if (out.valid(x, y)) {
        EXPECT_EQ(out.at(x, y), 0.625f);
        valid++;
      }
    }
  }
  EXPECT_GT(valid, 32 * 24);
}

TEST(WarpImage, ShearRoundTripHighPsnr) {
  const int n = 128;
  Raster img(n, n);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      img.at(x, y) = 0.5f + 0.4f * std::sin(0.11 * x) * std::cos(0.13 * y);
    }
  }
  Mat3 shear = Mat3::Identity();
  shear(0, 1) = 0.08;
  const Raster once = warp_image(img, shear);
  const Raster back = warp_image(once, shear.inverse().eval());

  double mse = 0.0;
  int count = 0;
  for (int y = 8; y < n - 8; ++y) {
    for (int x = 8; x < n - 8; ++x) {
      if (!back.valid(x, y)) continue;
      const double diff = back.at(x, y) - img.at(x, y);
      mse += diff * diff;
      count++;
    }
  }
  mse /= count;
  const double psnr = 10.0 * std::log10(1.0 / mse);
  EXPECT_GT(psnr, 40.0);
}

TEST(WarpImage, NonInvertibleWarpRejected) {
  Raster img(4, 4, 1.0f);
  EXPECT_THROW(warp_image(img, Mat3::Zero()), ConfigError);
}

TEST(ReparamProjection, DepthApproximatesHeightAbovePlane) {
  const PinholeCamera cam = SatelliteCamera();
  const Mat34 p = cam.projection();
  // zbar from the mean conventional depth over the cube, consistent with p.
  double zbar = 0.0;
  const auto corrs =
      SampleCamera(cam, Vec3(-250, -250, 0), Vec3(250, 250, 100), 8);
  for (const auto& c : corrs) zbar += p.row(2) * c.enu.homogeneous();
  zbar /= static_cast<double>(corrs.size());
  EXPECT_NEAR(zbar, 650000.0, 2000.0);

  const double d = -30.0;
  const ReparamProjection44 rp = build_reparam_projection(p, d, zbar, 0.0);
  EXPECT_DOUBLE_EQ(rp.P.cwiseAbs().maxCoeff(), 1.0);
  for (const auto& c : corrs) {
    const double m = rp.reparam_depth(c.enu);
    EXPECT_GT(m, 0.0);
    EXPECT_NEAR(m, c.enu.z() - d, 0.05);
  }
}

TEST(ReparamProjection, DepthMonotoneInHeight) {
  const PinholeCamera cam = SatelliteCamera();
  const ReparamProjection44 rp =
      build_reparam_projection(cam.projection(), -30.0, 650000.0, 0.0);
  for (double x : {-200.0, 0.0, 150.0}) {
    for (double y : {-120.0, 30.0}) {
      double prev = -1e30;
      for (double z = 0.0; z <= 100.0; z += 5.0) {
        const double m = rp.reparam_depth(Vec3(x, y, z));
        EXPECT_GT(m, prev);
        prev = m;
      }
    }
  }
}

TEST(ReparamProjection, SignFlipsAcrossReferencePlane) {
  const PinholeCamera cam = SatelliteCamera();
  const double d = -30.0;
  const ReparamProjection44 rp =
      build_reparam_projection(cam.projection(), d, 650000.0, 0.0);
  EXPECT_GT(rp.reparam_depth(Vec3(10.0, 5.0, d + 1.0)), 0.0);
  EXPECT_LT(rp.reparam_depth(Vec3(10.0, 5.0, d - 1.0)), 0.0);
}

TEST(ReparamProjection, PlaneAboveSceneRejected) {
  const PinholeCamera cam = SatelliteCamera();
  EXPECT_THROW(build_reparam_projection(cam.projection(), 5.0, 650000.0, 0.0),
               ConfigError);
  EXPECT_THROW(build_reparam_projection(cam.projection(), -30.0, -1.0, 0.0),
               ConfigError);
}

}  // namespace
}  // namespace satstereo
