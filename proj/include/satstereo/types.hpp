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

#ifndef SATSTEREO_TYPES_HPP_
#define SATSTEREO_TYPES_HPP_

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace satstereo {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Mat34 = Eigen::Matrix<double, 3, 4>;

using Vec3f = Eigen::Vector3f;
using Mat3f = Eigen::Matrix3f;
using Mat4f = Eigen::Matrix4f;

/// Invalid input or unusable configuration (bad file, bad parameter).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Failure while processing valid inputs (degenerate geometry, divergence).
class StageError : public std::runtime_error {
 public:
  explicit StageError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace satstereo

#endif  // SATSTEREO_TYPES_HPP_
