// Copyright 2026 The fpmcorr Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fpm/config.hpp"

#include <fstream>
#include <set>

#include "fpm/error.hpp"

namespace fpm {

using Json = nlohmann::ordered_json;

namespace {

// Reads keys of one JSON object and rejects whatever was not asked for.
class Section {
 public:
  Section(const Json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object())
      throw ConfigError("config section '" + name_ + "' must be an object");
  }

  template <typename T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigError("config key '" + name_ + "." + key + "' has a bad type");
    }
  }

  void read_scaled(const char* key, double& out, double unit) {
    double v = out / unit;
    read(key, v);
    out = v * unit;
  }

  void read_shift(const char* key, Shift2& out) {
    std::vector<double> v{out.dx * 1e3, out.dy * 1e3};
    read(key, v);
    if (v.size() != 2)
      throw ConfigError("config key '" + name_ + "." + key +
                        "' needs two entries [dx, dy]");
    out = {v[0] * 1e-3, v[1] * 1e-3};
  }

  void mark(const char* key) { seen_.insert(key); }

  bool has(const char* key) const { return j_.contains(key); }

  void finish() const {
    for (const auto& [key, value] : j_.items())
      if (!seen_.count(key))
        throw ConfigError("unknown config key '" + name_ + "." + key + "'");
  }

 private:
  const Json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

LedOrder parse_order(const std::string& s) {
  if (s == "center_out") return LedOrder::kCenterOut;
  if (s == "row_major") return LedOrder::kRowMajor;
  throw ConfigError("recon.led_order must be 'center_out' or 'row_major'");
}

std::string order_name(LedOrder o) {
  return o == LedOrder::kRowMajor ? "row_major" : "center_out";
}

}  // namespace

void RunConfig::validate() const {
  geometry.validate();
  segment.validate();
  recon.validate();
  if (!(objective_na > 0 && objective_na < 1))
    throw ConfigError("optics.objective_na must lie in (0, 1)");
  if (!(magnification > 0) || !(camera_pixel > 0))
    throw ConfigError("optics magnification and pixel size must be positive");
  if (recon.upsample != segment.upsample())
    throw ConfigError("recon upsample must equal hr_size_px / lr_size_px");
  if (inner_iters < 1) throw ConfigError("recon.inner_iters must be >= 1");
  if (per_led.search_radius_px <= 0 || per_led.anneal_iters_cap < 1)
    throw ConfigError("per_led settings must be positive");
  if (noise.gaussian_sigma_rel < 0 || noise.poisson_photons < 0)
    throw ConfigError("noise levels must be non-negative");
  for (const SegmentSpec& s : segments)
    geometry.with_shift(s.shift).validate();
}

RunConfig parse_config(const Json& j) {
  RunConfig cfg;
  Section top(j, "<root>");
  if (j.contains("geometry")) {
    Section s(j.at("geometry"), "geometry");
    s.read_scaled("d_mm", cfg.geometry.pitch, 1e-3);
    s.read_scaled("s_mm", cfg.geometry.distance, 1e-3);
    s.read_scaled("lambda_nm", cfg.geometry.wavelength, 1e-9);
    s.read("grid_half", cfg.geometry.grid_half);
    s.read_shift("shift_mm", cfg.geometry.shift);
    s.finish();
  }
  top.mark("geometry");
  if (j.contains("optics")) {
    Section s(j.at("optics"), "optics");
    s.read("objective_na", cfg.objective_na);
    s.read("magnification", cfg.magnification);
    s.read_scaled("camera_pixel_um", cfg.camera_pixel, 1e-6);
    s.finish();
  }
  top.mark("optics");
  if (j.contains("segment")) {
    Section s(j.at("segment"), "segment");
    s.read_scaled("x0_mm", cfg.segment.x0, 1e-3);
    s.read_scaled("y0_mm", cfg.segment.y0, 1e-3);
    s.read("lr_size_px", cfg.segment.lr_size);
    s.read("hr_size_px", cfg.segment.hr_size);
    s.finish();
  }
  top.mark("segment");
  if (cfg.segment.lr_size > 0) cfg.recon.upsample = cfg.segment.upsample();
  if (j.contains("recon")) {
    Section s(j.at("recon"), "recon");
    s.read("delta1", cfg.recon.delta1);
    s.read("delta2", cfg.recon.delta2);
    s.read("max_iters", cfg.recon.max_iters);
    s.read("inner_iters", cfg.inner_iters);
    std::string order = order_name(cfg.recon.led_order);
    s.read("led_order", order);
    cfg.recon.led_order = parse_order(order);
    s.read("pupil_support_dilation_px", cfg.recon.pupil_support_dilation);
    s.read("update_pupil", cfg.recon.update_pupil);
    s.finish();
  }
  top.mark("recon");
  if (j.contains("annealer")) {
    Section s(j.at("annealer"), "annealer");
    s.read("initial_temperature", cfg.annealer.initial_temperature);
    s.read("cooling_rate", cfg.annealer.cooling_rate);
    s.read("step_scale", cfg.annealer.step_scale);
    s.read("tol", cfg.annealer.tol);
    s.read("max_iters", cfg.annealer.max_iters);
    s.read("window", cfg.annealer.window);
    cfg.annealer_seed_set = s.has("seed");
    s.read("seed", cfg.annealer.seed);
    s.finish();
  }
  top.mark("annealer");
  if (j.contains("per_led")) {
    Section s(j.at("per_led"), "per_led");
    s.read("search_radius_px", cfg.per_led.search_radius_px);
    s.read("anneal_iters_cap", cfg.per_led.anneal_iters_cap);
    s.finish();
  }
  top.mark("per_led");
  if (j.contains("noise")) {
    Section s(j.at("noise"), "noise");
    s.read("gaussian_sigma_rel", cfg.noise.gaussian_sigma_rel);
    s.read("poisson_photons", cfg.noise.poisson_photons);
    s.read("seed", cfg.noise.seed);
    s.finish();
  }
  top.mark("noise");
  if (j.contains("object")) {
    Section s(j.at("object"), "object");
    s.read("amplitude_path", cfg.object.amplitude_path);
    s.read("phase_path", cfg.object.phase_path);
    s.read("phase_range_rad", cfg.object.phase_range);
    s.read("seed", cfg.object.seed);
    s.finish();
  }
  top.mark("object");
  if (j.contains("segments")) {
    if (!j.at("segments").is_array())
      throw ConfigError("'segments' must be an array");
    for (const Json& e : j.at("segments")) {
      Section s(e, "segments[]");
      SegmentSpec spec;
      s.read_scaled("x0_mm", spec.x0, 1e-3);
      s.read_scaled("y0_mm", spec.y0, 1e-3);
      s.read_shift("shift_mm", spec.shift);
      s.finish();
      cfg.segments.push_back(spec);
    }
  }
  top.mark("segments");
  top.finish();
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed config " + path.string() + ": " + e.what());
  }
  return parse_config(j);
}

Json to_json(const RunConfig& c) {
  Json j;
  j["geometry"] = {{"d_mm", c.geometry.pitch * 1e3},
                   {"s_mm", c.geometry.distance * 1e3},
                   {"lambda_nm", c.geometry.wavelength * 1e9},
                   {"grid_half", c.geometry.grid_half},
                   {"shift_mm",
                    {c.geometry.shift.dx * 1e3, c.geometry.shift.dy * 1e3}}};
  j["optics"] = {{"objective_na", c.objective_na},
                 {"magnification", c.magnification},
                 {"camera_pixel_um", c.camera_pixel * 1e6}};
  j["segment"] = {{"x0_mm", c.segment.x0 * 1e3},
                  {"y0_mm", c.segment.y0 * 1e3},
                  {"lr_size_px", c.segment.lr_size},
                  {"hr_size_px", c.segment.hr_size}};
  j["recon"] = {{"delta1", c.recon.delta1},
                {"delta2", c.recon.delta2},
                {"max_iters", c.recon.max_iters},
                {"inner_iters", c.inner_iters},
                {"led_order", order_name(c.recon.led_order)},
                {"pupil_support_dilation_px", c.recon.pupil_support_dilation},
                {"update_pupil", c.recon.update_pupil}};
  j["annealer"] = {{"initial_temperature", c.annealer.initial_temperature},
                   {"cooling_rate", c.annealer.cooling_rate},
                   {"step_scale", c.annealer.step_scale},
                   {"tol", c.annealer.tol},
                   {"max_iters", c.annealer.max_iters},
                   {"window", c.annealer.window}};
  if (c.annealer_seed_set) j["annealer"]["seed"] = c.annealer.seed;
  j["per_led"] = {{"search_radius_px", c.per_led.search_radius_px},
                  {"anneal_iters_cap", c.per_led.anneal_iters_cap}};
  j["noise"] = {{"gaussian_sigma_rel", c.noise.gaussian_sigma_rel},
                {"poisson_photons", c.noise.poisson_photons},
                {"seed", c.noise.seed}};
  j["object"] = {{"amplitude_path", c.object.amplitude_path},
                 {"phase_path", c.object.phase_path},
                 {"phase_range_rad", c.object.phase_range},
                 {"seed", c.object.seed}};
  if (!c.segments.empty()) {
    Json segs = Json::array();
    for (const SegmentSpec& s : c.segments)
      segs.push_back({{"x0_mm", s.x0 * 1e3},
                      {"y0_mm", s.y0 * 1e3},
                      {"shift_mm", {s.shift.dx * 1e3, s.shift.dy * 1e3}}});
    j["segments"] = std::move(segs);
  }
  return j;
}

}  // namespace fpm
