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

// Iterative Fourier ptychographic reconstruction with joint object / pupil
// recovery.
//
// One outer iteration visits every LED of the requested range. For each LED
// the current spectrum tile times the pupil predicts the LR exit field psi,
// the measured intensity replaces |psi|, and the difference drives a
// regularised update of both the object tile and the pupil.

#ifndef FPM_RECON_HPP_
#define FPM_RECON_HPP_

#include <cstddef>
#include <optional>
#include <vector>

#include "fpm/field.hpp"
#include "fpm/forward.hpp"
#include "fpm/geometry.hpp"

namespace fpm {

enum class LedOrder { kCenterOut, kRowMajor };

struct ReconConfig {
  double delta1 = 1.0;     // object-update regulariser
  double delta2 = 1000.0;  // pupil-update regulariser
  int max_iters = 20;
  LedOrder led_order = LedOrder::kCenterOut;
  int upsample = 4;
  int pupil_support_dilation = 0;  // pixels added to the ideal disk radius
  bool update_pupil = true;

  void validate() const;
};

struct ReconState {
  ComplexField object_spectrum;  // HR grid, LR units (see forward.hpp)
  Pupil pupil;
  RealGrid<double> support;  // pupil support disk, 0/1
  int iter = 0;
  std::vector<double> cost_history;
  std::size_t forward_syntheses = 0;
  // Per-block max |O|^2 over 32x32 blocks of the object spectrum. Empty
  // means stale; clear it after editing object_spectrum directly.
  std::vector<double> block_max;

  Index hr_size() const { return object_spectrum.rows(); }
  Index lr_size() const { return pupil.size(); }
  double lr_pitch() const { return pupil.mask.pitch; }
};

// Object spectrum from the bilinearly upsampled square root of the on-axis
// image; ideal pupil. Throws InputError without a (0,0) image.
ReconState initialize(const AcquisitionStack& stack, const ReconConfig& cfg);

// Psi = O tile at the wave vector's offset times the current pupil.
ComplexField extract_lr_spectrum(const ReconState& state, const WaveVector& wv);

// Replaces |psi| by sqrt(captured), keeping the phase. Below
// 1e-12 * max|psi| the phase is undefined and set to zero.
ComplexField apply_intensity_constraint(const ComplexField& psi,
                                        const IntensityImage& captured);

// Regularised object / pupil update from the constrained LR spectrum.
// Touches only the HR tile addressed by `wv`; the pupil is re-masked to its
// support.
void epry_update(ReconState& state, const WaveVector& wv,
                 const ComplexField& phi_spectrum, const ReconConfig& cfg);

// sum |captured - |psi|^2|^2 for one LED at the current state.
double led_misfit(const ReconState& state, const IntensityImage& captured,
                  const WaveVector& wv);

// Prediction, intensity constraint and object / pupil update for one LED.
// Returns the LED's misfit before the update.
double update_led(ReconState& state, const IntensityImage& captured,
                  const WaveVector& wv, const ReconConfig& cfg);

// Sum of led_misfit over the map's LEDs, without updating the state.
double data_misfit(const ReconState& state, const AcquisitionStack& stack,
                   const WaveVectorMap& wave_vectors);

std::vector<LedIndex> update_order(std::vector<LedIndex> leds, LedOrder order);

// One outer iteration over `order`. Appends and returns the accumulated data
// misfit computed from each LED's prediction before its update.
double sweep(ReconState& state, const AcquisitionStack& stack,
             const WaveVectorMap& wave_vectors,
             const std::vector<LedIndex>& order, const ReconConfig& cfg);

struct ReconResult {
  ComplexField object;
  Pupil pupil;
  ReconState state;
};

// Runs cfg.max_iters iterations from a fresh initialisation. `leds` defaults
// to every LED of the stack inside the geometry's grid.
ReconResult reconstruct(const AcquisitionStack& stack, const LedGeometry& geom,
                        const SegmentFrame& seg, const ReconConfig& cfg,
                        std::optional<std::vector<LedIndex>> leds = {});

// Same with explicit per-LED wave vectors (the LED range is the map's keys).
ReconResult reconstruct(const AcquisitionStack& stack,
                        const WaveVectorMap& wave_vectors,
                        const ReconConfig& cfg);

// Continues an existing state for cfg.max_iters more iterations.
ReconResult resume(ReconState state, const AcquisitionStack& stack,
                   const WaveVectorMap& wave_vectors, const ReconConfig& cfg);

}  // namespace fpm

#endif  // FPM_RECON_HPP_
