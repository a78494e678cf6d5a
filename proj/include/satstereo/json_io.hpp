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

#ifndef SATSTEREO_JSON_IO_HPP_
#define SATSTEREO_JSON_IO_HPP_

#include <fstream>
#include <string>

#include <json.hpp>

#include "satstereo/rpc.hpp"
#include "satstereo/types.hpp"

namespace satstereo {

using Json = nlohmann::json;

inline Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open: " + path);
  Json j;
  try {
    in >> j;
  } catch (const Json::exception& e) {
    throw ConfigError("invalid JSON in " + path + ": " + e.what());
  }
  return j;
}

inline void save_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open for writing: " + path);
  out << j.dump(2) << "\n";
}

namespace detail {

inline RpcCoeffs coeffs_from_json(const Json& arr, const std::string& key) {
  if (!arr.is_array() || arr.size() != kRpcCoeffCount) {
    throw ConfigError("RPC field '" + key + "' must be an array of 20");
  }
  RpcCoeffs c{};
  for (int i = 0; i < kRpcCoeffCount; ++i) c[i] = arr[i].get<double>();
  return c;
}

}  // namespace detail

/// RPC sidecar. Coefficients use the RPC00B monomial order documented in
/// rpc.hpp; "line" is v/row, "samp" is u/column.
inline RpcCamera rpc_from_json(const Json& j) {
  RpcCamera cam;
  try {
    cam.height = j.at("rows").get<int>();
    cam.width = j.at("cols").get<int>();
    cam.line_num = detail::coeffs_from_json(j.at("line_num"), "line_num");
    cam.line_den = detail::coeffs_from_json(j.at("line_den"), "line_den");
    cam.samp_num = detail::coeffs_from_json(j.at("samp_num"), "samp_num");
    cam.samp_den = detail::coeffs_from_json(j.at("samp_den"), "samp_den");
    cam.lat_off = j.at("lat_off").get<double>();
    cam.lat_scale = j.at("lat_scale").get<double>();
    cam.lon_off = j.at("lon_off").get<double>();
    cam.lon_scale = j.at("lon_scale").get<double>();
    cam.alt_off = j.at("alt_off").get<double>();
    cam.alt_scale = j.at("alt_scale").get<double>();
    cam.row_off = j.at("row_off").get<double>();
    cam.row_scale = j.at("row_scale").get<double>();
    cam.col_off = j.at("col_off").get<double>();
    cam.col_scale = j.at("col_scale").get<double>();
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("bad RPC sidecar: ") + e.what());
  }
  cam.validate();
  return cam;
}

inline Json rpc_to_json(const RpcCamera& cam) {
  Json j;
  j["rows"] = cam.height;
  j["cols"] = cam.width;
  j["line_num"] = cam.line_num;
  j["line_den"] = cam.line_den;
  j["samp_num"] = cam.samp_num;
  j["samp_den"] = cam.samp_den;
  j["lat_off"] = cam.lat_off;
  j["lat_scale"] = cam.lat_scale;
  j["lon_off"] = cam.lon_off;
  j["lon_scale"] = cam.lon_scale;
  j["alt_off"] = cam.alt_off;
  j["alt_scale"] = cam.alt_scale;
  j["row_off"] = cam.row_off;
  j["row_scale"] = cam.row_scale;
  j["col_off"] = cam.col_off;
  j["col_scale"] = cam.col_scale;
  return j;
}

inline RpcCamera load_rpc_json(const std::string& path) {
  return rpc_from_json(load_json_file(path));
}

inline void save_rpc_json(const std::string& path, const RpcCamera& cam) {
  save_json_file(path, rpc_to_json(cam));
}

}  // namespace satstereo

#endif  // SATSTEREO_JSON_IO_HPP_
