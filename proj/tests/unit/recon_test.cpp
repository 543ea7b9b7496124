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
#include <complex>
#include <random>

#include "doctest.h"
#include "fpm/error.hpp"
#include "fpm/metrics.hpp"
#include "fpm/recon.hpp"
#include "small_system.hpp"

using namespace fpm;
using cd = std::complex<double>;
using fpm::testing::kLrPitch;
using fpm::testing::Small;

namespace {

ComplexGrid<double> random_grid(Index n, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g;
  ComplexGrid<double> out(n, n);
  for (Index i = 0; i < out.size(); ++i) out(i) = cd(g(rng), g(rng));
  return out;
}

}  // namespace

TEST_CASE("config validation") {
  ReconConfig c;
  CHECK_NOTHROW(c.validate());
  c.delta1 = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.max_iters = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.upsample = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("initialize") {
  const Small s;
  AcquisitionStack st = s.stack();
  for (auto& [led, img] : st.images) img.data.setConstant(0.36);
  const ReconState a = initialize(st, s.cfg);
  const ComplexField obj = object_from_spectrum(a.object_spectrum, 32);
  CHECK((obj.data - cd(0.6)).abs().maxCoeff() < 1e-12);
  CHECK(a.iter == 0);
  CHECK(a.cost_history.empty());
  CHECK(((a.pupil.mask.data == cd(0)) || (a.pupil.mask.data == cd(1))).all());

  const AcquisitionStack real = s.stack();
  const ReconState b = initialize(real, s.cfg);
  const ReconState c = initialize(real, s.cfg);
  CHECK((b.object_spectrum.data == c.object_spectrum.data).all());
  CHECK((b.pupil.mask.data == c.pupil.mask.data).all());

  AcquisitionStack missing = real;
  missing.images.erase({0, 0});
  CHECK_THROWS_AS(initialize(missing, s.cfg), InputError);

  ReconConfig wrong = s.cfg;
  wrong.upsample = 2;
  CHECK_THROWS_AS(initialize(real, wrong), ConfigError);
}

TEST_CASE("initial misfit is finite and drops after one iteration") {
  const Small s;
  const AcquisitionStack st = s.stack();
  const WaveVectorMap wv = wave_vectors(s.geom, s.seg, square_range(4));
  const ReconState init = initialize(st, s.cfg);
  const double before = data_misfit(init, st, wv);
  ReconConfig one = s.cfg;
  one.max_iters = 1;
  const ReconResult r = resume(init, st, wv, one);
  CHECK(std::isfinite(before));
  CHECK(before > 0);
  CHECK(data_misfit(r.state, st, wv) < before);
  CHECK(r.state.cost_history.size() == 1);
}

TEST_CASE("extract_lr_spectrum") {
  const Small s;
  const ReconState st = initialize(s.stack(), s.cfg);
  const ComplexField z = extract_lr_spectrum(st, {0, 0});
  const ComplexField central = crop_centered(st.object_spectrum, 32, 32);
  CHECK((z.data == central.data * st.pupil.mask.data).all());

  // All-ones pupil: the LR view is the object band-limited to the tile.
  ReconState open = st;
  open.pupil.mask.data.setConstant(1.0);
  const ComplexField view = ifft2_centered(extract_lr_spectrum(open, {0, 0}));
  ComplexField masked = fft2_centered(object_from_spectrum(st.object_spectrum, 32));
  RealGrid<double> box = RealGrid<double>::Zero(128, 128);
  box.block(48, 48, 32, 32).setOnes();
  masked.data *= box.cast<cd>();
  const ComplexField oracle = ifft2_centered(masked);  // HR band-limited view
  // Sample the HR view on the LR grid.
  for (Index r = 0; r < 32; r += 5)
    for (Index c = 0; c < 32; c += 7)
      CHECK(std::abs(view.data(r, c) - oracle.data(4 * r, 4 * c)) < 1e-10);

  // Linearity in the object spectrum.
  ReconState a = st, b = st, sum = st;
  a.object_spectrum.data = random_grid(128, 1);
  b.object_spectrum.data = random_grid(128, 2);
  const cd ca(0.3, 1.2), cb(-2.0, 0.5);
  sum.object_spectrum.data = ca * a.object_spectrum.data + cb * b.object_spectrum.data;
  const double dk = spectral_pixel(32, kLrPitch);
  const WaveVector wv{5 * dk, -3 * dk};
  const ComplexGrid<double> lhs = extract_lr_spectrum(sum, wv).data;
  const ComplexGrid<double> rhs = ca * extract_lr_spectrum(a, wv).data +
                                  cb * extract_lr_spectrum(b, wv).data;
  CHECK((lhs - rhs).abs().maxCoeff() < 1e-12);

  CHECK_THROWS_AS(extract_lr_spectrum(st, {60 * dk, 0}), OutOfBandError);
}

TEST_CASE("apply_intensity_constraint") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (int t = 0; t < 20; ++t) {
    const ComplexField psi(random_grid(16, 100 + t), 1.0);
    RealGrid<double> i(16, 16);
    for (Index k = 0; k < i.size(); ++k) i(k) = u(rng);
    const ComplexField phi = apply_intensity_constraint(psi, {i, 1.0});
    CHECK(((phi.data.abs2() - i).abs() <= 1e-14 * (1 + i)).all());
    const double eps = 1e-12 * psi.data.abs().maxCoeff();
    for (Index k = 0; k < i.size(); ++k)
      if (std::abs(psi.data(k)) >= eps && i(k) > 0)
        CHECK(std::abs(std::arg(phi.data(k) / psi.data(k))) < 1e-12);
  }
  const ComplexField psi(random_grid(8, 9), 1.0);
  const ComplexField same =
      apply_intensity_constraint(psi, {psi.data.abs2(), 1.0});
  CHECK((same.data - psi.data).abs().maxCoeff() < 1e-14);

  const ComplexField zero(ComplexGrid<double>::Zero(4, 4), 1.0);
  const ComplexField z = apply_intensity_constraint(
      zero, {RealGrid<double>::Constant(4, 4, 0.25), 1.0});
  CHECK((z.data == cd(0.5)).all());
  CHECK_THROWS_AS(apply_intensity_constraint(
                      zero, {RealGrid<double>::Zero(8, 8), 1.0}),
                  SizeError);
}

TEST_CASE("epry_update") {
  const Small s;
  const AcquisitionStack stack = s.stack();
  const ReconState st = initialize(stack, s.cfg);
  const double dk = spectral_pixel(32, kLrPitch);
  const WaveVector wv{2 * dk, -dk};

  SUBCASE("consistent spectrum is a fixed point") {
    ReconState x = st;
    epry_update(x, wv, extract_lr_spectrum(x, wv), s.cfg);
    CHECK((x.object_spectrum.data == st.object_spectrum.data).all());
    CHECK((x.pupil.mask.data == st.pupil.mask.data).all());
  }

  SUBCASE("frozen pupil: on-axis update moves the tile toward phi") {
    ReconState x = st;
    ReconConfig frozen = s.cfg;
    frozen.delta2 = 1e300;
    const ComplexField target = fft2_centered(apply_intensity_constraint(
        ifft2_centered(extract_lr_spectrum(x, {0, 0})), stack.at({0, 0})));
    const double before =
        (extract_lr_spectrum(x, {0, 0}).data - target.data).matrix().norm();
    epry_update(x, {0, 0}, target, frozen);
    const double after =
        (extract_lr_spectrum(x, {0, 0}).data - target.data).matrix().norm();
    CHECK(after < before);
    CHECK((x.pupil.mask.data - st.pupil.mask.data).abs().maxCoeff() < 1e-12);
  }

  SUBCASE("locality and support") {
    ReconState x = st;
    const ComplexField phi(random_grid(32, 4), 1.0);
    epry_update(x, wv, phi, s.cfg);
    const TileWindow w = tile_window(wv, 128, 32, kLrPitch);
    ComplexGrid<double> diff = x.object_spectrum.data - st.object_spectrum.data;
    diff.block(w.row0, w.col0, w.size, w.size).setZero();
    CHECK((diff == cd(0)).all());
    CHECK(((x.pupil.mask.data * (1.0 - x.support).cast<cd>()) == cd(0)).all());
    CHECK((x.pupil.mask.data != st.pupil.mask.data).any());
  }

  SUBCASE("large delta2 freezes the pupil") {
    const ComplexField phi(random_grid(32, 6), 1.0);
    double last = 1e300;
    for (double d2 : {1e3, 1e6, 1e9, 1e12}) {
      ReconState x = st;
      ReconConfig c = s.cfg;
      c.delta2 = d2;
      epry_update(x, wv, phi, c);
      const double change =
          (x.pupil.mask.data - st.pupil.mask.data).abs().maxCoeff();
      CHECK(change < last);
      last = change;
    }
    CHECK(last < 1e-6);
  }

  CHECK_THROWS_AS(
      [&] {
        ReconState x = st;
        epry_update(x, wv, ComplexField(random_grid(16, 1), 1.0), s.cfg);
      }(),
      SizeError);
}

TEST_CASE("update_order") {
  const std::vector<LedIndex> leds = square_range(1);
  const std::vector<LedIndex> rm = update_order(leds, LedOrder::kRowMajor);
  CHECK(rm.front() == LedIndex{-1, -1});
  CHECK(rm[1] == LedIndex{0, -1});
  CHECK(rm.back() == LedIndex{1, 1});
  const std::vector<LedIndex> co = update_order(rm, LedOrder::kCenterOut);
  CHECK(co == leds);
}

TEST_CASE("reconstruct: accuracy, degradation and support") {
  const Small s;
  const AcquisitionStack zero = s.stack();
  const AcquisitionStack shifted = s.stack({1.5e-3, -1.0e-3});
  const ReconResult a = reconstruct(zero, zero.geometry, s.seg, s.cfg);
  const ReconResult b = reconstruct(shifted, shifted.geometry, s.seg, s.cfg);
  const double ea = compare_fields(a.object, s.object).rel_rmse_amplitude;
  const double eb = compare_fields(b.object, s.object).rel_rmse_amplitude;
  CHECK(ea <= 0.05);
  CHECK(eb >= 2 * ea);
  CHECK(a.state.cost_history.size() == std::size_t(s.cfg.max_iters));
  CHECK(a.state.iter == s.cfg.max_iters);
  CHECK(((a.pupil.mask.data * (1.0 - a.state.support).cast<cd>()) == cd(0)).all());
  CHECK(a.state.forward_syntheses == std::size_t(81 * s.cfg.max_iters));
}

TEST_CASE("reconstruct over the bright-field block with 5 iterations") {
  const Small s;
  const AcquisitionStack st = s.stack();
  ReconConfig fast = s.cfg;
  fast.max_iters = 5;
  const ReconResult r =
      reconstruct(st, st.geometry, s.seg, fast, square_range(2));
  CHECK(r.state.cost_history.size() == 5);
  CHECK(std::isfinite(r.state.cost_history.back()));
  CHECK(r.state.forward_syntheses == 125);
}

TEST_CASE("support dilation widens the recoverable pupil") {
  const Small s;
  ReconConfig c = s.cfg;
  c.pupil_support_dilation = 2;
  c.max_iters = 3;
  const AcquisitionStack st = s.stack();
  const ReconResult r = reconstruct(st, st.geometry, s.seg, c);
  const RealGrid<double> wide = disk_mask(32, r.pupil.cutoff_radius_px + 2);
  CHECK((r.state.support == wide).all());
  CHECK(((r.pupil.mask.data * (1.0 - wide).cast<cd>()) == cd(0)).all());
}
