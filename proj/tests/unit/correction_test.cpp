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


#include <cmath>
#include <random>

#include "doctest.h"
#include "fpm/correction.hpp"
#include "fpm/error.hpp"
#include "fpm/metrics.hpp"
#include "small_system.hpp"

using namespace fpm;
using fpm::testing::kLrPitch;
using fpm::testing::Small;

namespace {

AnnealerConfig annealer(std::uint64_t seed) {
  AnnealerConfig c;
  c.seed = seed;
  return c;
}

double mean_sine_error(const WaveVectorMap& got, const LedGeometry& truth,
                       const SegmentFrame& seg, int half) {
  double sum = 0;
  int count = 0;
  for (LedIndex led : square_range(half)) {
    const WaveVector a = got.at(led);
    const WaveVector b = wave_vector(led, truth, seg);
    sum += std::hypot(a.kx - b.kx, a.ky - b.ky) * truth.wavelength / (2 * M_PI);
    ++count;
  }
  return sum / count;
}

}  // namespace

TEST_CASE("fast range is the 5x5 bright-field block") {
  const Small s;
  const AcquisitionStack st = s.stack();
  const std::vector<LedIndex> r = fast_led_range(st, s.seg, 0.1);
  CHECK(r == square_range(2));
  AcquisitionStack partial = st;
  partial.images.erase({2, -2});
  CHECK_THROWS_AS(fast_led_range(partial, s.seg, 0.1), InputError);
}

TEST_CASE("e2_cost prefers the true shift") {
  const Small s;
  for (Shift2 t : {Shift2{1.5e-3, -1.0e-3}, Shift2{-0.5e-3, 0.0},
                   Shift2{2.5e-3, 3.0e-3}}) {
    const AcquisitionStack st = s.stack(t);
    const double at_truth = e2_cost(st, s.seg, t, s.cfg, 0.1);
    const double at_zero = e2_cost(st, s.seg, {}, s.cfg, 0.1);
    CHECK(at_truth < at_zero);
  }
}

TEST_CASE("zero-shift data: (0,0) wins a 5x5 probe grid") {
  const Small s;
  const AcquisitionStack st = s.stack();
  const double at_zero = e2_cost(st, s.seg, {}, s.cfg, 0.1);
  for (int i = -2; i <= 2; ++i)
    for (int j = -2; j <= 2; ++j)
      CHECK(at_zero <= e2_cost(st, s.seg, {i * 2e-3, j * 2e-3}, s.cfg, 0.1));
}

TEST_CASE("e2 evaluation is deterministic and costs R2^2 * J syntheses") {
  const Small s;
  const AcquisitionStack st = s.stack({1e-3, 0.5e-3});
  const E2Evaluation a = evaluate_e2(st, s.seg, {0.3e-3, -0.2e-3}, s.cfg, 0.1);
  const E2Evaluation b = evaluate_e2(st, s.seg, {0.3e-3, -0.2e-3}, s.cfg, 0.1);
  CHECK(a.cost == b.cost);
  CHECK(a.forward_syntheses == 25 * kFastIterations);
  CHECK_THROWS_AS(evaluate_e2(st, s.seg, {5e-3, 0}, s.cfg, 0.1), ConfigError);
  CHECK_THROWS_AS(evaluate_e2(st, s.seg, {}, s.cfg, 0.1, 0), ConfigError);
}

TEST_CASE("mc_correct: recovery, bounds, accounting and rigidity") {
  const Small s;
  const AcquisitionStack st = s.stack({1.5e-3, -1.0e-3});
  const CorrectionResult r = mc_correct(st, s.seg, s.cfg, annealer(7));
  // At 32 px one spectral pixel spans ~1.4 mm of shift and E2 only sees the
  // rounded tile offsets, so recovery is judged on those.
  const Shift2 truth{1.5e-3, -1.0e-3};
  for (LedIndex led : square_range(2))
    CHECK(pixel_offset(wave_vector(led, st.geometry.with_shift(r.shift), s.seg),
                       32, kLrPitch) ==
          pixel_offset(wave_vector(led, st.geometry.with_shift(truth), s.seg),
                       32, kLrPitch));
  CHECK(r.trace.size() > 1);
  double best = r.trace.front().cost;
  for (const TraceRow& t : r.trace) best = std::min(best, t.cost);
  CHECK(best <= e2_cost(st, s.seg, truth, s.cfg, 0.1));
  CHECK(r.n_cost_evals == r.trace.size());
  CHECK(r.n_forward_syntheses == r.n_cost_evals * 25 * kFastIterations);
  CHECK(r.bright_field_side == 5);
  CHECK(!r.cost_trace.empty());
  CHECK(r.trace.front().dx == 0.0);
  CHECK(r.trace.front().dy == 0.0);
  for (const TraceRow& t : r.trace) {
    CHECK(std::abs(t.dx) <= 4e-3);
    CHECK(std::abs(t.dy) <= 4e-3);
  }
  const LedGeometry g = st.geometry.with_shift(r.shift);
  CHECK(disorder_metric(lattice_positions(g, square_range(4)), g.pitch) == 0.0);
}

TEST_CASE("mc_correct on aligned data stays near zero") {
  const Small s;
  const AcquisitionStack st = s.stack();
  const CorrectionResult r = mc_correct(st, s.seg, s.cfg, annealer(3));
  CHECK(std::abs(r.shift.dx) <= 0.2e-3);
  CHECK(std::abs(r.shift.dy) <= 0.2e-3);
  const double plain = compare_fields(
      reconstruct(st, st.geometry, s.seg, s.cfg).object, s.object).rmse_amplitude;
  const double corrected = compare_fields(
      reconstruct(st, st.geometry.with_shift(r.shift), s.seg, s.cfg).object,
      s.object).rmse_amplitude;
  CHECK(corrected <= 1.05 * plain);
}

TEST_CASE("e1_cost") {
  const Small s;
  const AcquisitionStack st = s.stack();
  const ReconResult rec = reconstruct(st, st.geometry, s.seg, s.cfg);
  const double dk = spectral_pixel(32, kLrPitch);
  for (LedIndex led : {LedIndex{0, 0}, LedIndex{1, -2}, LedIndex{3, 3}}) {
    const WaveVector k = wave_vector(led, st.geometry, s.seg);
    const double at_true = e1_cost(rec.state, st.at(led), k);
    CHECK(at_true >= 0);
    for (int dx = -3; dx <= 3; ++dx)
      for (int dy = -3; dy <= 3; ++dy) {
        if (std::max(std::abs(dx), std::abs(dy)) < 2) continue;
        CHECK(at_true < e1_cost(rec.state, st.at(led),
                                {k.kx + dx * dk, k.ky + dy * dk}));
      }
    ReconState rotated = rec.state;
    rotated.object_spectrum.data *= std::polar(1.0, 0.9);
    CHECK(e1_cost(rotated, st.at(led), k) ==
          doctest::Approx(at_true).epsilon(1e-10));
  }
  CHECK_THROWS_AS(e1_cost(rec.state, st.at({0, 0}), {60 * dk, 0}),
                  OutOfBandError);
}

TEST_CASE("per-LED baseline") {
  const Small s;
  ReconConfig cfg = s.cfg;
  cfg.max_iters = 10;

  SUBCASE("globally shifted data") {
    const Shift2 t{1.5e-3, -1.0e-3};
    const AcquisitionStack st = s.stack(t);
    const PerLedResult r =
        sa_correct_per_led(st, st.geometry, s.seg, cfg, annealer(5));
    CHECK(mean_sine_error(r.wave_vectors, st.geometry.with_shift(t), s.seg, 2) <
          0.0352);
    CHECK(r.state.cost_history.size() == 10);
    CHECK(r.n_cost_evals > 0);
    CHECK(r.n_forward_syntheses > r.n_cost_evals);
  }

  SUBCASE("aligned data: bright-field corrections stay within a pixel") {
    const AcquisitionStack st = s.stack();
    const PerLedResult r =
        sa_correct_per_led(st, st.geometry, s.seg, cfg, annealer(5));
    const double dk = spectral_pixel(32, kLrPitch);
    for (LedIndex led : square_range(2)) {
      const WaveVector a = r.wave_vectors.at(led);
      const WaveVector b = wave_vector(led, st.geometry, s.seg);
      CHECK(std::abs(a.kx - b.kx) <= dk);
      CHECK(std::abs(a.ky - b.ky) <= dk);
    }
  }
}

TEST_CASE("mcFPM needs fewer syntheses than the per-LED baseline") {
  const Small s;
  const AcquisitionStack st = s.stack({1.5e-3, -1.0e-3});
  const CorrectionResult mc = mc_correct(st, s.seg, s.cfg, annealer(2));
  const PerLedResult sa =
      sa_correct_per_led(st, st.geometry, s.seg, s.cfg, annealer(2));
  CHECK(mc.n_forward_syntheses < sa.n_forward_syntheses);
}

TEST_CASE("refine_local") {
  const Small s;
  const Shift2 t{1.5e-3, -1.0e-3};
  const LedGeometry corrected = s.geom.with_shift(t);

  SUBCASE("disabled passes the geometry through") {
    const AcquisitionStack st = s.stack(t);
    const WaveVectorMap out = refine_local(st, corrected, s.seg, s.cfg,
                                           annealer(1), {}, nullptr, false);
    CHECK(out == wave_vectors(corrected, s.seg, square_range(4)));
  }

  SUBCASE("pure global shift: every change is below a pixel") {
    const AcquisitionStack st = s.stack(t);
    const WaveVectorMap out =
        refine_local(st, corrected, s.seg, s.cfg, annealer(1));
    const double dk = spectral_pixel(32, kLrPitch);
    for (const auto& [led, k] : out) {
      const WaveVector k0 = wave_vector(led, corrected, s.seg);
      CHECK(std::hypot(k.kx - k0.kx, k.ky - k0.ky) < dk);
    }
  }

  SUBCASE("jittered LEDs: refinement does not hurt") {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> g(0.0, 0.1e-3);
    PositionMap jitter;
    for (LedIndex led : square_range(4)) jitter[led] = {g(rng), g(rng)};
    const AcquisitionStack st = s.stack(t, {}, jitter);
    const double global = compare_fields(
        reconstruct(st, corrected, s.seg, s.cfg).object, s.object).rmse_amplitude;
    const WaveVectorMap refined =
        refine_local(st, corrected, s.seg, s.cfg, annealer(1));
    const double local = compare_fields(
        reconstruct(st, refined, s.cfg).object, s.object).rmse_amplitude;
    CHECK(local <= global);
  }
}
