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

// LED misalignment correction.
//
//   * mc_correct: searches the global lattice shift (dx, dy) in [-d, d]^2 by
//     simulated annealing. Every candidate is scored by a fresh, short
//     reconstruction that uses only the bright-field LEDs; the score is the
//     data misfit of that reconstruction's last iteration.
//   * sa_correct_per_led: the conventional baseline. Inside every outer
//     reconstruction iteration each LED's wave vector is searched
//     independently against its single-image misfit before the update.
//   * refine_local: one outer pass of the baseline started from a globally
//     corrected geometry.

#ifndef FPM_CORRECTION_HPP_
#define FPM_CORRECTION_HPP_

#include <cstddef>
#include <vector>

#include "fpm/anneal.hpp"
#include "fpm/forward.hpp"
#include "fpm/geometry.hpp"
#include "fpm/recon.hpp"

namespace fpm {

// Iterations of the fast bright-field reconstruction behind each candidate.
inline constexpr int kFastIterations = 5;

struct TraceRow {
  std::size_t eval = 0;
  double dx = 0.0;  // meters
  double dy = 0.0;
  double cost = 0.0;
  bool accepted = false;
};

struct CorrectionResult {
  Shift2 shift;
  std::vector<double> cost_trace;  // accepted costs, in evaluation order
  std::vector<TraceRow> trace;     // every evaluated candidate
  std::size_t n_cost_evals = 0;
  std::size_t n_forward_syntheses = 0;
  double wall_time = 0.0;  // seconds
  int bright_field_side = 0;
  int inner_iters = 0;
};

struct E2Evaluation {
  double cost = 0.0;
  std::size_t forward_syntheses = 0;
};

// Bright-field LED block of side R2 used by the fast inner loop.
std::vector<LedIndex> fast_led_range(const AcquisitionStack& stack,
                                     const SegmentFrame& seg, double na);

E2Evaluation evaluate_e2(const AcquisitionStack& stack, const SegmentFrame& seg,
                         Shift2 candidate, const ReconConfig& cfg, double na,
                         int inner_iters = kFastIterations);

// Sum over bright-field LEDs and pixels of |I_captured - I_predicted|^2 after
// an inner_iters-iteration reconstruction with the candidate shift.
double e2_cost(const AcquisitionStack& stack, const SegmentFrame& seg,
               Shift2 candidate, const ReconConfig& cfg, double na,
               int inner_iters = kFastIterations);

// Bounds are forced to [-d, d]^2 and the search starts at (0, 0).
CorrectionResult mc_correct(const AcquisitionStack& stack,
                            const SegmentFrame& seg,
                            const ReconConfig& recon_cfg,
                            const AnnealerConfig& annealer_cfg,
                            int inner_iters = kFastIterations);

// Single-LED misfit at a candidate wave vector.
double e1_cost(const ReconState& state, const IntensityImage& captured,
               const WaveVector& candidate);

struct PerLedConfig {
  double search_radius_px = 3.0;  // per-LED box half-width, spectral pixels
  int anneal_iters_cap = 20;      // per LED per outer pass
};

struct PerLedResult {
  WaveVectorMap wave_vectors;
  ReconState state;
  ComplexField object;
  std::size_t n_cost_evals = 0;
  std::size_t n_forward_syntheses = 0;
  double wall_time = 0.0;
};

// Conventional per-LED correction over recon_cfg.max_iters outer passes.
PerLedResult sa_correct_per_led(const AcquisitionStack& stack,
                                const LedGeometry& geom_nominal,
                                const SegmentFrame& seg,
                                const ReconConfig& recon_cfg,
                                const AnnealerConfig& annealer_cfg,
                                const PerLedConfig& per_led = {});

// Runs `passes` per-LED passes starting from `state` with `initial` wave
// vectors. Each LED searches a box of search_radius_px around its `initial`
// wave vector, starting from the previous pass's estimate. Shared by the
// baseline and the local refinement.
PerLedResult per_led_passes(const AcquisitionStack& stack, ReconState state,
                            WaveVectorMap initial, const ReconConfig& recon_cfg,
                            const AnnealerConfig& annealer_cfg,
                            const PerLedConfig& per_led, int passes);

// One per-LED pass starting from the globally corrected geometry. With a warm
// state the pass continues it; otherwise it starts from a full reconstruction
// with the corrected geometry. When disabled the corrected geometry's wave
// vectors pass through unchanged.
WaveVectorMap refine_local(const AcquisitionStack& stack,
                           const LedGeometry& geom_corrected,
                           const SegmentFrame& seg,
                           const ReconConfig& recon_cfg,
                           const AnnealerConfig& annealer_cfg,
                           const PerLedConfig& per_led = {},
                           const ReconState* warm = nullptr,
                           bool enabled = true);

}  // namespace fpm

#endif  // FPM_CORRECTION_HPP_
