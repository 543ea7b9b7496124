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

#include "fpm/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

#include "fpm/error.hpp"
#include "fpm/io.hpp"

namespace fpm {

CorrectionMode parse_correction_mode(const std::string& s) {
  if (s == "none") return CorrectionMode::kNone;
  if (s == "mcfpm") return CorrectionMode::kMcFpm;
  if (s == "sa") return CorrectionMode::kPerLedSa;
  if (s == "mcfpm+local") return CorrectionMode::kMcFpmLocal;
  throw ConfigError("unknown correction mode '" + s +
                    "' (expected none|mcfpm|sa|mcfpm+local)");
}

std::string mode_name(CorrectionMode mode) {
  switch (mode) {
    case CorrectionMode::kNone: return "none";
    case CorrectionMode::kMcFpm: return "mcfpm";
    case CorrectionMode::kPerLedSa: return "sa";
    case CorrectionMode::kMcFpmLocal: return "mcfpm+local";
  }
  return "none";
}

MethodSettings settings_from(const RunConfig& cfg) {
  return {cfg.recon, cfg.annealer, cfg.per_led, cfg.inner_iters};
}

namespace {

using Clock = std::chrono::steady_clock;

std::vector<LedIndex> stack_range(const AcquisitionStack& stack) {
  std::vector<LedIndex> leds;
  for (LedIndex led : square_range(stack.geometry.grid_half))
    if (stack.has(led)) leds.push_back(led);
  return leds;
}

PositionMap positions_from(const WaveVectorMap& wvs, const LedGeometry& geom,
                           const SegmentFrame& seg) {
  PositionMap out;
  for (const auto& [led, wv] : wvs)
    out.emplace(led, position_from_wave_vector(wv, geom, seg));
  return out;
}

void take_recon(MethodRun& run, ReconResult r) {
  run.object = std::move(r.object);
  run.pupil = std::move(r.pupil);
  run.cost_history = r.state.cost_history;
  run.n_forward_syntheses += r.state.forward_syntheses;
}

}  // namespace

MethodRun run_method(const AcquisitionStack& stack, const MethodSettings& s,
                     CorrectionMode mode) {
  const auto t0 = Clock::now();
  const SegmentFrame& seg = stack.segment;
  const std::vector<LedIndex> leds = stack_range(stack);
  MethodRun run;
  run.mode = mode;

  auto global_run = [&](Shift2 shift) {
    const LedGeometry geom = stack.geometry.with_shift(shift);
    run.shift = shift;
    run.wave_vectors = wave_vectors(geom, seg, leds);
    run.positions = lattice_positions(geom, leds);
    return reconstruct(stack, run.wave_vectors, s.recon);
  };

  switch (mode) {
    case CorrectionMode::kNone:
      take_recon(run, global_run(stack.geometry.shift));
      break;
    case CorrectionMode::kMcFpm:
    case CorrectionMode::kMcFpmLocal: {
      CorrectionResult c =
          mc_correct(stack, seg, s.recon, s.annealer, s.inner_iters);
      run.n_cost_evals = c.n_cost_evals;
      run.n_correction_syntheses = c.n_forward_syntheses;
      run.n_forward_syntheses = c.n_forward_syntheses;
      const Shift2 shift = c.shift;
      run.correction = std::move(c);
      ReconResult global = global_run(shift);
      if (mode == CorrectionMode::kMcFpm) {
        take_recon(run, std::move(global));
        break;
      }
      run.n_forward_syntheses += global.state.forward_syntheses;
      PerLedResult refined = per_led_passes(
          stack, std::move(global.state), run.wave_vectors, s.recon,
          s.annealer, s.per_led, 1);
      run.n_cost_evals += refined.n_cost_evals;
      run.n_correction_syntheses += refined.n_forward_syntheses;
      run.n_forward_syntheses += refined.n_forward_syntheses;
      run.wave_vectors = std::move(refined.wave_vectors);
      run.positions = positions_from(run.wave_vectors, stack.geometry, seg);
      take_recon(run, reconstruct(stack, run.wave_vectors, s.recon));
      break;
    }
    case CorrectionMode::kPerLedSa: {
      PerLedResult r = sa_correct_per_led(stack, stack.geometry, seg, s.recon,
                                          s.annealer, s.per_led);
      run.n_cost_evals = r.n_cost_evals;
      run.n_correction_syntheses = r.n_forward_syntheses;
      run.n_forward_syntheses = r.n_forward_syntheses;
      run.wave_vectors = std::move(r.wave_vectors);
      run.positions = positions_from(run.wave_vectors, stack.geometry, seg);
      run.object = std::move(r.object);
      run.pupil = r.state.pupil;
      run.cost_history = r.state.cost_history;
      break;
    }
  }
  run.disorder = disorder_metric(run.positions, stack.geometry.pitch);
  run.wall_time = std::chrono::duration<double>(Clock::now() - t0).count();
  return run;
}

EvalReport evaluate(const MethodRun& run, const AcquisitionStack& stack,
                    const std::optional<ComplexField>& truth) {
  EvalReport r;
  if (truth) r = make_report(compare_fields(run.object, *truth), 0.0);
  r.final_data_misfit = run.final_misfit();
  if (stack.true_shift && run.shift)
    r.shift_error = Shift2{std::abs(run.shift->dx - stack.true_shift->dx),
                           std::abs(run.shift->dy - stack.true_shift->dy)};
  r.disorder = run.disorder;
  return r;
}

ComplexField build_object(const RunConfig& cfg, std::uint64_t seed_offset) {
  const int n = cfg.segment.hr_size;
  const double pitch = cfg.hr_pitch();
  ComplexField object;
  if (cfg.object.amplitude_path.empty()) {
    object = make_test_object(n, pitch, cfg.object.seed + seed_offset,
                              cfg.object.phase_range);
  } else {
    auto load = [&](const std::string& path) {
      RealGrid<double> img = io::read_png(path);
      if (img.rows() != img.cols() || img.rows() % 2 != 0)
        throw InputError("object image " + path + " must be square and even");
      if (img.rows() != n)
        throw InputError("object image " + path + " must be " +
                         std::to_string(n) + " px wide (hr_size_px)");
      return img;
    };
    const RealGrid<double> amp = load(cfg.object.amplitude_path);
    RealGrid<double> phase = RealGrid<double>::Zero(n, n);
    if (!cfg.object.phase_path.empty())
      phase = cfg.object.phase_range * load(cfg.object.phase_path);
    ComplexGrid<double> data(n, n);
    for (Index i = 0; i < data.size(); ++i) data(i) = std::polar(amp(i), phase(i));
    object = ComplexField(std::move(data), pitch);
  }
  // Keep one LED spacing of margin so shifted geometries still cover it.
  const double na_cut = synthetic_na(cfg.geometry.with_shift({}),
                                     cfg.objective_na, cfg.segment) -
                        cfg.geometry.pitch / cfg.geometry.distance;
  return band_limit(object, na_cut, cfg.geometry.wavelength);
}

AcquisitionStack simulate_segment(const RunConfig& cfg,
                                  const ComplexField& object,
                                  const SegmentFrame& seg, Shift2 true_shift) {
  const Pupil pupil = make_ideal_pupil(seg.lr_size, cfg.lr_pitch(),
                                       cfg.objective_na,
                                       cfg.geometry.wavelength);
  return generate_dataset(object, cfg.geometry.with_shift(true_shift),
                          cfg.geometry.with_shift({}), seg, pupil, cfg.noise);
}

int worker_count() {
  if (const char* env = std::getenv("FPM_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count,
                  const std::function<void(std::size_t)>& fn) {
  const std::size_t workers =
      std::min<std::size_t>(count, std::size_t(worker_count()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace fpm
