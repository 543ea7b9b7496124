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

// Reconstruction quality against ground truth.

#ifndef FPM_METRICS_HPP_
#define FPM_METRICS_HPP_

#include <optional>

#include "fpm/field.hpp"
#include "fpm/geometry.hpp"

namespace fpm {

struct FieldComparison {
  double rmse_amplitude = 0.0;      // after optimal scalar gain
  double rel_rmse_amplitude = 0.0;  // rmse_amplitude / rms(|truth|)
  double rmse_phase = 0.0;          // radians, after piston (and tilt) removal
  double psnr_amplitude = 0.0;      // dB, peak = max |truth|
};

// Compares a reconstruction with the truth modulo the unrecoverable gauge:
// a global complex gain, and optionally an integer-frequency phase tilt.
FieldComparison compare_fields(const ComplexField& recon,
                               const ComplexField& truth,
                               bool remove_tilt = false);

// Largest |spacing - d| over horizontally and vertically adjacent LEDs.
// Deviations below 1e-12 * d are reported as zero: that is the resolution of
// positions rebuilt from double-precision lattice coordinates.
double disorder_metric(const PositionMap& positions, double d);

struct EvalReport {
  double rmse_amplitude = 0.0;
  double rel_rmse_amplitude = 0.0;
  double rmse_phase = 0.0;
  double psnr_amplitude = 0.0;
  double final_data_misfit = 0.0;
  std::optional<Shift2> shift_error;  // |estimate - truth| per axis, meters
  std::optional<double> disorder;     // meters
};

EvalReport make_report(const FieldComparison& cmp, double final_misfit);

}  // namespace fpm

#endif  // FPM_METRICS_HPP_
