/*
 * Copyright 2026 swvio authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "swvio/config.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

namespace swvio {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::string& section,
                const std::set<std::string>& known) {
  for (const auto& [key, value] : obj.items()) {
    if (!known.count(key))
      throw ConfigError("unknown config key: " + section + "." + key);
  }
}

Vec3 to_vec3(const json& a, const std::string& where) {
  if (!a.is_array() || a.size() != 3)
    throw ConfigError("expected 3-element array at " + where);
  return Vec3(a[0].get<double>(), a[1].get<double>(), a[2].get<double>());
}

}  // namespace

PreintModel model_from_string(const std::string& s) {
  if (s == "m1") return PreintModel::kModel1;
  if (s == "m2") return PreintModel::kModel2;
  if (s == "discrete") return PreintModel::kDiscrete;
  throw ConfigError("unknown model: " + s + " (expected m1|m2|discrete)");
}

EstimatorConfig ScenarioConfig::estimator_config(PreintModel model) const {
  EstimatorConfig ec;
  ec.model = model;
  ec.mode = mode;
  ec.window = window;
  ec.noise = noise;
  ec.rig = rig;
  ec.gravity = trajectory.gravity();
  ec.pixel_sigma = pixel_sigma;
  ec.visual_robust = visual_robust;
  ec.visual_robust_k = visual_robust_k;
  ec.solver.max_iterations = max_iterations;
  ec.solver.cost_decrease_tol = 1e-8;
  ec.solver.dx_tol = 1e-9;
  return ec;
}

ScenarioConfig ScenarioConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  ScenarioConfig c;
  check_keys(j, "",
             {"trajectory", "imu", "camera", "estimator", "models", "runs",
              "seed"});

  if (j.contains("trajectory")) {
    const json& t = j["trajectory"];
    check_keys(t, "trajectory",
               {"radius", "angular_rate", "vertical_amp", "vertical_freq",
                "rollpitch_amp", "rollpitch_freq", "duration", "gravity"});
    if (t.contains("radius")) c.trajectory.radius = t["radius"];
    if (t.contains("angular_rate")) c.trajectory.angular_rate = t["angular_rate"];
    if (t.contains("vertical_amp")) c.trajectory.vertical_amp = t["vertical_amp"];
    if (t.contains("vertical_freq")) c.trajectory.vertical_freq = t["vertical_freq"];
    if (t.contains("rollpitch_amp")) c.trajectory.rollpitch_amp = t["rollpitch_amp"];
    if (t.contains("rollpitch_freq")) c.trajectory.rollpitch_freq = t["rollpitch_freq"];
    if (t.contains("duration")) c.trajectory.duration = t["duration"];
    if (t.contains("gravity")) c.trajectory.gravity_mag = t["gravity"];
  }

  if (j.contains("imu")) {
    const json& t = j["imu"];
    check_keys(t, "imu",
               {"rate_hz", "sigma_g", "sigma_a", "sigma_wg", "sigma_wa",
                "init_bias_gyro", "init_bias_accel"});
    if (t.contains("rate_hz")) c.imu_rate_hz = t["rate_hz"];
    if (t.contains("sigma_g")) c.noise.sigma_g = t["sigma_g"];
    if (t.contains("sigma_a")) c.noise.sigma_a = t["sigma_a"];
    if (t.contains("sigma_wg")) c.noise.sigma_wg = t["sigma_wg"];
    if (t.contains("sigma_wa")) c.noise.sigma_wa = t["sigma_wa"];
    if (t.contains("init_bias_gyro"))
      c.init_bias_gyro = to_vec3(t["init_bias_gyro"], "imu.init_bias_gyro");
    if (t.contains("init_bias_accel"))
      c.init_bias_accel = to_vec3(t["init_bias_accel"], "imu.init_bias_accel");
    if (c.imu_rate_hz <= 0.0) throw ConfigError("imu.rate_hz must be > 0");
    if (c.noise.sigma_g < 0.0 || c.noise.sigma_a < 0.0 ||
        c.noise.sigma_wg < 0.0 || c.noise.sigma_wa < 0.0)
      throw ConfigError("imu noise densities must be >= 0");
  }

  if (j.contains("camera")) {
    const json& t = j["camera"];
    check_keys(t, "camera",
               {"rate_hz", "count", "pixel_sigma", "focal_px", "width",
                "height", "baseline"});
    if (t.contains("rate_hz")) c.cam_rate_hz = t["rate_hz"];
    if (t.contains("count")) c.feature_count = t["count"];
    if (t.contains("pixel_sigma")) c.pixel_sigma = t["pixel_sigma"];
    if (t.contains("focal_px")) c.rig.focal_px = t["focal_px"];
    if (t.contains("width")) c.rig.width = t["width"];
    if (t.contains("height")) c.rig.height = t["height"];
    if (t.contains("baseline"))
      c.rig.right.p_i_in_c = Vec3(-t["baseline"].get<double>(), 0.0, 0.0);
    if (c.cam_rate_hz <= 0.0) throw ConfigError("camera.rate_hz must be > 0");
    if (c.feature_count < 0) throw ConfigError("camera.count must be >= 0");
  }

  if (j.contains("estimator")) {
    const json& t = j["estimator"];
    check_keys(t, "estimator",
               {"mode", "inertial_window", "pose_window", "max_iterations",
                "robust", "robust_k", "relpose_sigma_rot",
                "relpose_sigma_pos"});
    if (t.contains("mode")) {
      const std::string m = t["mode"];
      if (m == "tightly-coupled") c.mode = EstimatorMode::kTightlyCoupled;
      else if (m == "loosely-coupled") c.mode = EstimatorMode::kLooselyCoupled;
      else throw ConfigError("estimator.mode must be tightly-coupled|loosely-coupled");
    }
    if (t.contains("inertial_window")) c.window.inertial_size = t["inertial_window"];
    if (t.contains("pose_window")) c.window.pose_size = t["pose_window"];
    if (t.contains("max_iterations")) c.max_iterations = t["max_iterations"];
    if (t.contains("robust")) {
      const std::string r = t["robust"];
      if (r == "none") c.visual_robust = RobustKind::kNone;
      else if (r == "huber") c.visual_robust = RobustKind::kHuber;
      else if (r == "cauchy") c.visual_robust = RobustKind::kCauchy;
      else throw ConfigError("estimator.robust must be none|huber|cauchy");
    }
    if (t.contains("robust_k")) c.visual_robust_k = t["robust_k"];
    if (t.contains("relpose_sigma_rot")) c.relpose_sigma_rot = t["relpose_sigma_rot"];
    if (t.contains("relpose_sigma_pos")) c.relpose_sigma_pos = t["relpose_sigma_pos"];
    if (c.window.inertial_size < 2) throw ConfigError("inertial_window must be >= 2");
    if (c.window.pose_size < 1) throw ConfigError("pose_window must be >= 1");
  }

  if (j.contains("models")) {
    c.models.clear();
    for (const auto& m : j["models"]) c.models.push_back(model_from_string(m));
    if (c.models.empty()) throw ConfigError("models must not be empty");
  }
  if (j.contains("runs")) {
    c.runs = j["runs"];
    if (c.runs < 1) throw ConfigError("runs must be >= 1");
  }
  if (j.contains("seed")) c.seed = j["seed"].get<uint64_t>();
  return c;
}

ScenarioConfig ScenarioConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return from_json_text(text);
}

std::string ScenarioConfig::to_json_text() const {
  nlohmann::ordered_json j;
  j["trajectory"] = {{"radius", trajectory.radius},
                     {"angular_rate", trajectory.angular_rate},
                     {"vertical_amp", trajectory.vertical_amp},
                     {"vertical_freq", trajectory.vertical_freq},
                     {"rollpitch_amp", trajectory.rollpitch_amp},
                     {"rollpitch_freq", trajectory.rollpitch_freq},
                     {"duration", trajectory.duration},
                     {"gravity", trajectory.gravity_mag}};
  j["imu"] = {{"rate_hz", imu_rate_hz},
              {"sigma_g", noise.sigma_g},
              {"sigma_a", noise.sigma_a},
              {"sigma_wg", noise.sigma_wg},
              {"sigma_wa", noise.sigma_wa},
              {"init_bias_gyro", {init_bias_gyro.x(), init_bias_gyro.y(), init_bias_gyro.z()}},
              {"init_bias_accel", {init_bias_accel.x(), init_bias_accel.y(), init_bias_accel.z()}}};
  j["camera"] = {{"rate_hz", cam_rate_hz},
                 {"count", feature_count},
                 {"pixel_sigma", pixel_sigma},
                 {"focal_px", rig.focal_px},
                 {"width", rig.width},
                 {"height", rig.height},
                 {"baseline", -rig.right.p_i_in_c.x()}};
  j["estimator"] = {
      {"mode", mode == EstimatorMode::kTightlyCoupled ? "tightly-coupled"
                                                      : "loosely-coupled"},
      {"inertial_window", window.inertial_size},
      {"pose_window", window.pose_size},
      {"max_iterations", max_iterations},
      {"robust", visual_robust == RobustKind::kNone
                     ? "none"
                     : (visual_robust == RobustKind::kHuber ? "huber"
                                                            : "cauchy")},
      {"robust_k", visual_robust_k},
      {"relpose_sigma_rot", relpose_sigma_rot},
      {"relpose_sigma_pos", relpose_sigma_pos}};
  std::vector<std::string> names;
  for (PreintModel m : models) names.push_back(to_string(m));
  j["models"] = names;
  j["runs"] = runs;
  j["seed"] = seed;
  return j.dump(2);
}

}  // namespace swvio
