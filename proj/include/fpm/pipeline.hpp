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

// End-to-end runs shared by the command-line tool and the acceptance suite:
// object construction, segment simulation, and the four reconstruction
// methods (no correction, global-shift search, per-LED baseline, global
// search followed by one per-LED refinement pass).

#ifndef FPM_PIPELINE_HPP_
#define FPM_PIPELINE_HPP_

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fpm/config.hpp"
#include "fpm/correction.hpp"
#include "fpm/metrics.hpp"
#include "fpm/recon.hpp"

namespace fpm {

enum class CorrectionMode { kNone, kMcFpm, kPerLedSa, kMcFpmLocal };

// "none" | "mcfpm" | "sa" | "mcfpm+local"; throws ConfigError otherwise.
CorrectionMode parse_correction_mode(const std::string& s);
std::string mode_name(CorrectionMode mode);

struct MethodSettings {
  ReconConfig recon;
  AnnealerConfig annealer;
  PerLedConfig per_led;
  int inner_iters = kFastIterations;
};

MethodSettings settings_from(const RunConfig& cfg);

struct MethodRun {
  CorrectionMode mode = CorrectionMode::kNone;
  ComplexField object;
  Pupil pupil;
  std::vector<double> cost_history;
  std::optional<CorrectionResult> correction;
  std::optional<Shift2> shift;  // global shift used for the final run
  WaveVectorMap wave_vectors;   // final per-LED wave vectors
  PositionMap positions;        // LED positions implied by wave_vectors
  double disorder = 0.0;
  std::size_t n_cost_evals = 0;
  std::size_t n_correction_syntheses = 0;
  std::size_t n_forward_syntheses = 0;  // correction plus final reconstruction
  double wall_time = 0.0;

  double final_misfit() const { return cost_history.back(); }
};

MethodRun run_method(const AcquisitionStack& stack, const MethodSettings& s,
                     CorrectionMode mode);

// Ground-truth comparison; shift_error is filled when both the stack's true
// shift and a global estimate exist.
EvalReport evaluate(const MethodRun& run, const AcquisitionStack& stack,
                    const std::optional<ComplexField>& truth);

// Object for `simulate`: from the configured images, or the built-in
// synthetic object when no amplitude path is set. Band-limited so that the
// stitched spectrum covers it.
ComplexField build_object(const RunConfig& cfg, std::uint64_t seed_offset = 0);

// Noiseless or noisy stack for one segment with `true_shift` injected.
AcquisitionStack simulate_segment(const RunConfig& cfg,
                                  const ComplexField& object,
                                  const SegmentFrame& seg, Shift2 true_shift);

// Worker count from FPM_THREADS (default: hardware concurrency).
int worker_count();

// Runs fn(0..count-1) on up to worker_count() threads.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace fpm

#endif  // FPM_PIPELINE_HPP_
