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

// Run configuration. Every physical quantity carries its unit in the JSON key
// name; unknown keys are rejected. Defaults reproduce the reference system:
// 629 nm LEDs on a 4 mm pitch, 113.5 mm below the sample, 17 x 17 LEDs,
// 4x / 0.1 NA objective, 6.5 um camera pixels, 128 -> 512 px segments.
//
// {
//   "geometry":  {"d_mm", "s_mm", "lambda_nm", "grid_half", "shift_mm": [dx, dy]},
//   "optics":    {"objective_na", "magnification", "camera_pixel_um"},
//   "segment":   {"x0_mm", "y0_mm", "lr_size_px", "hr_size_px"},
//   "recon":     {"delta1", "delta2", "max_iters", "inner_iters", "led_order",
//                 "pupil_support_dilation_px", "update_pupil"},
//   "annealer":  {"initial_temperature", "cooling_rate", "step_scale", "tol",
//                 "max_iters", "window", "seed"},
//   "per_led":   {"search_radius_px", "anneal_iters_cap"},
//   "noise":     {"gaussian_sigma_rel", "poisson_photons", "seed"},
//   "object":    {"amplitude_path", "phase_path", "phase_range_rad", "seed"},
//   "segments":  [{"x0_mm", "y0_mm", "shift_mm": [dx, dy]}, ...]
// }
//
// geometry.shift_mm is the true shift injected by `simulate`; the believed
// geometry written to the stack always has zero shift.

#ifndef FPM_CONFIG_HPP_
#define FPM_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fpm/anneal.hpp"
#include "fpm/correction.hpp"
#include "fpm/forward.hpp"
#include "fpm/geometry.hpp"
#include "fpm/recon.hpp"
#include "json.hpp"

namespace fpm {

struct ObjectSpec {
  std::string amplitude_path;  // empty: built-in synthetic object
  std::string phase_path;
  double phase_range = 1.0;  // radians spanned by the phase image
  std::uint64_t seed = 1;
};

struct SegmentSpec {
  double x0 = 0.0;
  double y0 = 0.0;
  Shift2 shift;
};

struct RunConfig {
  LedGeometry geometry;
  double objective_na = 0.1;
  double magnification = 4.0;
  double camera_pixel = 6.5e-6;
  SegmentFrame segment;
  ReconConfig recon;
  int inner_iters = kFastIterations;
  AnnealerConfig annealer;
  bool annealer_seed_set = false;
  PerLedConfig per_led;
  NoiseSpec noise;
  ObjectSpec object;
  std::vector<SegmentSpec> segments;

  double lr_pitch() const { return camera_pixel / magnification; }
  double hr_pitch() const { return lr_pitch() / segment.upsample(); }
  void validate() const;
};

// Throws ConfigError for unknown keys, wrong types or invalid values.
RunConfig parse_config(const nlohmann::ordered_json& j);
RunConfig load_config(const std::filesystem::path& path);
nlohmann::ordered_json to_json(const RunConfig& cfg);

}  // namespace fpm

#endif  // FPM_CONFIG_HPP_
