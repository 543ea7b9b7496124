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

#include "fpm/correction.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "fpm/error.hpp"

namespace fpm {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                       std::uint64_t c) {
  std::uint64_t h = seed;
  for (std::uint64_t v : {a, b, c}) {
    h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ULL;
    h = (h ^ (h >> 27)) * 0x94d049bb133111ebULL;
    h ^= h >> 31;
  }
  return h;
}

std::vector<LedIndex> stack_leds(const AcquisitionStack& stack,
                                 const LedGeometry& geom) {
  std::vector<LedIndex> leds;
  for (LedIndex led : square_range(geom.grid_half))
    if (stack.has(led)) leds.push_back(led);
  return leds;
}

}  // namespace

std::vector<LedIndex> fast_led_range(const AcquisitionStack& stack,
                                     const SegmentFrame& seg, double na) {
  const BrightFieldSet bf = bright_field_set(stack.geometry, na, seg);
  std::vector<LedIndex> leds = square_range(bf.side / 2);
  for (LedIndex led : leds)
    if (!stack.has(led))
      throw InputError("stack lacks bright-field LED (" +
                       std::to_string(led.m) + "," + std::to_string(led.n) +
                       ")");
  return leds;
}

E2Evaluation evaluate_e2(const AcquisitionStack& stack, const SegmentFrame& seg,
                         Shift2 candidate, const ReconConfig& cfg, double na,
                         int inner_iters) {
  if (inner_iters < 1) throw ConfigError("inner_iters must be at least 1");
  const LedGeometry geom = stack.geometry.with_shift(candidate);
  geom.validate();
  ReconConfig fast = cfg;
  fast.max_iters = inner_iters;
  const ReconResult r =
      reconstruct(stack, geom, seg, fast, fast_led_range(stack, seg, na));
  // The predictions made during the J-th iteration score the candidate, so
  // one evaluation costs exactly R2^2 * J syntheses.
  return {r.state.cost_history.back(), r.state.forward_syntheses};
}

double e2_cost(const AcquisitionStack& stack, const SegmentFrame& seg,
               Shift2 candidate, const ReconConfig& cfg, double na,
               int inner_iters) {
  return evaluate_e2(stack, seg, candidate, cfg, na, inner_iters).cost;
}

CorrectionResult mc_correct(const AcquisitionStack& stack,
                            const SegmentFrame& seg,
                            const ReconConfig& recon_cfg,
                            const AnnealerConfig& annealer_cfg,
                            int inner_iters) {
  const auto t0 = Clock::now();
  const double d = stack.geometry.pitch;
  const double na = stack.objective_na;
  AnnealerConfig cfg = annealer_cfg;
  cfg.bounds = {{-d, d}, {-d, d}};

  CorrectionResult out;
  out.inner_iters = inner_iters;
  out.bright_field_side = bright_field_set(stack.geometry, na, seg).side;
  auto cost = [&](const Eigen::VectorXd& v) {
    const E2Evaluation e =
        evaluate_e2(stack, seg, {v(0), v(1)}, recon_cfg, na, inner_iters);
    out.n_forward_syntheses += e.forward_syntheses;
    return e.cost;
  };
  const AnnealResult res = sa_minimize(cost, Eigen::Vector2d::Zero(), cfg);

  out.shift = {res.best(0), res.best(1)};
  out.n_cost_evals = res.trace.size();
  for (std::size_t i = 0; i < res.trace.size(); ++i) {
    const AnnealStep& s = res.trace[i];
    out.trace.push_back({i, s.candidate(0), s.candidate(1), s.cost, s.accepted});
    if (s.accepted) out.cost_trace.push_back(s.cost);
  }
  out.wall_time = seconds_since(t0);
  return out;
}

double e1_cost(const ReconState& state, const IntensityImage& captured,
               const WaveVector& candidate) {
  return led_misfit(state, captured, candidate);
}

PerLedResult per_led_passes(const AcquisitionStack& stack, ReconState state,
                            WaveVectorMap initial, const ReconConfig& recon_cfg,
                            const AnnealerConfig& annealer_cfg,
                            const PerLedConfig& per_led, int passes) {
  const auto t0 = Clock::now();
  if (per_led.search_radius_px <= 0)
    throw ConfigError("per-LED search radius must be positive");
  PerLedResult out;
  out.wave_vectors = std::move(initial);
  std::vector<LedIndex> leds;
  for (const auto& [led, wv] : out.wave_vectors) leds.push_back(led);
  const std::vector<LedIndex> order = update_order(leds, recon_cfg.led_order);
  const double dk = spectral_pixel(int(state.lr_size()), state.lr_pitch());
  const double r = per_led.search_radius_px;
  const std::size_t start_syntheses = state.forward_syntheses;

  AnnealerConfig cfg = annealer_cfg;
  cfg.bounds = {{-r, r}, {-r, r}};
  cfg.max_iters = std::min(cfg.max_iters, per_led.anneal_iters_cap);

  // The box stays anchored at the initial wave vectors across passes.
  const WaveVectorMap anchor = out.wave_vectors;
  for (int pass = 0; pass < passes; ++pass) {
    double total = 0.0;
    for (LedIndex led : order) {
      const IntensityImage& captured = stack.at(led);
      WaveVector& k = out.wave_vectors.at(led);
      const WaveVector k0 = anchor.at(led);
      const Eigen::Vector2d start((k.kx - k0.kx) / dk, (k.ky - k0.ky) / dk);
      auto cost = [&](const Eigen::VectorXd& v) {
        try {
          return e1_cost(state, captured, {k0.kx + v(0) * dk, k0.ky + v(1) * dk});
        } catch (const OutOfBandError&) {
          return std::numeric_limits<double>::infinity();
        }
      };
      cfg.seed = mix_seed(annealer_cfg.seed, std::uint64_t(state.iter),
                          std::uint64_t(led.m + 1024),
                          std::uint64_t(led.n + 1024));
      const AnnealResult res = sa_minimize(cost, start, cfg);
      out.n_cost_evals += res.trace.size();
      out.n_forward_syntheses += res.trace.size();
      k = {k0.kx + res.best(0) * dk, k0.ky + res.best(1) * dk};
      total += update_led(state, captured, k, recon_cfg);
    }
    ++state.iter;
    state.cost_history.push_back(total);
  }
  out.n_forward_syntheses += state.forward_syntheses - start_syntheses;
  out.object = object_from_spectrum(state.object_spectrum, state.lr_size());
  out.state = std::move(state);
  out.wall_time = seconds_since(t0);
  return out;
}

PerLedResult sa_correct_per_led(const AcquisitionStack& stack,
                                const LedGeometry& geom_nominal,
                                const SegmentFrame& seg,
                                const ReconConfig& recon_cfg,
                                const AnnealerConfig& annealer_cfg,
                                const PerLedConfig& per_led) {
  const auto t0 = Clock::now();
  geom_nominal.validate();
  ReconState state = initialize(stack, recon_cfg);
  PerLedResult out = per_led_passes(
      stack, std::move(state),
      wave_vectors(geom_nominal, seg, stack_leds(stack, geom_nominal)),
      recon_cfg, annealer_cfg, per_led, recon_cfg.max_iters);
  out.wall_time = seconds_since(t0);
  return out;
}

WaveVectorMap refine_local(const AcquisitionStack& stack,
                           const LedGeometry& geom_corrected,
                           const SegmentFrame& seg,
                           const ReconConfig& recon_cfg,
                           const AnnealerConfig& annealer_cfg,
                           const PerLedConfig& per_led, const ReconState* warm,
                           bool enabled) {
  WaveVectorMap wvs =
      wave_vectors(geom_corrected, seg, stack_leds(stack, geom_corrected));
  if (!enabled) return wvs;
  ReconState state = warm ? *warm
                          : reconstruct(stack, wvs, recon_cfg).state;
  return per_led_passes(stack, std::move(state), std::move(wvs), recon_cfg,
                        annealer_cfg, per_led, 1)
      .wave_vectors;
}

}  // namespace fpm
