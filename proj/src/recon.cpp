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

#include "fpm/recon.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>

#include "fpm/error.hpp"

namespace fpm {

void ReconConfig::validate() const {
  if (!(delta1 > 0) || !(delta2 > 0))
    throw ConfigError("regularisers delta1 and delta2 must be positive");
  if (max_iters < 1) throw ConfigError("max_iters must be at least 1");
  if (upsample < 1) throw ConfigError("upsample must be a positive integer");
  if (pupil_support_dilation < 0)
    throw ConfigError("pupil support dilation must be non-negative");
}

namespace {

// Periodic bilinear upsampling aligned with the spectral-crop sampling: LR
// sample i sits on HR pixel i*factor.
RealGrid<double> upsample_bilinear(const RealGrid<double>& lr, Index factor) {
  const Index n = lr.rows();
  const Index big = n * factor;
  RealGrid<double> out(big, big);
  for (Index c = 0; c < big; ++c) {
    const Index c0 = c / factor;
    const Index c1 = (c0 + 1) % n;
    const double fc = double(c % factor) / double(factor);
    for (Index r = 0; r < big; ++r) {
      const Index r0 = r / factor;
      const Index r1 = (r0 + 1) % n;
      const double fr = double(r % factor) / double(factor);
      out(r, c) = (1 - fr) * (1 - fc) * lr(r0, c0) + fr * (1 - fc) * lr(r1, c0) +
                  (1 - fr) * fc * lr(r0, c1) + fr * fc * lr(r1, c1);
    }
  }
  return out;
}

void constrain_inplace(ComplexGrid<double>& psi,
                       const RealGrid<double>& captured) {
  const double eps = 1e-12 * std::sqrt(psi.abs2().maxCoeff());
  for (Index i = 0; i < psi.size(); ++i) {
    const double mag = std::sqrt(std::norm(psi(i)));
    const double target = std::sqrt(captured(i));
    psi(i) = (mag >= eps && mag > 0) ? psi(i) * (target / mag)
                                     : std::complex<double>(target, 0.0);
  }
}

TileWindow window_for(const ReconState& state, const WaveVector& wv) {
  return tile_window(wv, state.hr_size(), state.lr_size(), state.lr_pitch());
}

constexpr Index kBlock = 32;

Index block_count(Index n) { return (n + kBlock - 1) / kBlock; }

void refresh_blocks(ReconState& state, Index r0, Index r1, Index c0,
                    Index c1) {
  const ComplexGrid<double>& o = state.object_spectrum.data;
  const Index nb = block_count(o.rows());
  for (Index bc = c0 / kBlock; bc <= (c1 - 1) / kBlock; ++bc) {
    for (Index br = r0 / kBlock; br <= (r1 - 1) / kBlock; ++br) {
      const Index rr = std::min(kBlock, o.rows() - br * kBlock);
      const Index cc = std::min(kBlock, o.cols() - bc * kBlock);
      state.block_max[std::size_t(bc * nb + br)] =
          o.block(br * kBlock, bc * kBlock, rr, cc).abs2().maxCoeff();
    }
  }
}

double object_max(ReconState& state) {
  const ComplexGrid<double>& o = state.object_spectrum.data;
  const Index nb = block_count(o.rows());
  if (state.block_max.size() != std::size_t(nb * block_count(o.cols()))) {
    state.block_max.assign(std::size_t(nb * block_count(o.cols())), 0.0);
    refresh_blocks(state, 0, o.rows(), 0, o.cols());
  }
  return std::sqrt(
      *std::max_element(state.block_max.begin(), state.block_max.end()));
}

// Both updates use the pre-update tile, pupil and |O|max.
void update_tile(ReconState& state, const TileWindow& w,
                 const ComplexGrid<double>& phi_spectrum,
                 const ReconConfig& cfg) {
  const double o_max = cfg.update_pupil ? object_max(state) : 0.0;
  auto tile_ref = state.object_spectrum.data.block(w.row0, w.col0, w.size,
                                                   w.size);
  const ComplexGrid<double> tile = tile_ref;
  ComplexGrid<double>& pupil = state.pupil.mask.data;
  const ComplexGrid<double> diff = phi_spectrum - tile * pupil;

  const RealGrid<double> pupil_abs2 = pupil.abs2();
  const double pupil_max = std::sqrt(pupil_abs2.maxCoeff());
  if (pupil_max > 0) {
    const RealGrid<double> weight =
        pupil_abs2.sqrt() / (pupil_max * (pupil_abs2 + cfg.delta1));
    tile_ref += weight.cast<std::complex<double>>() * pupil.conjugate() * diff;
    if (!state.block_max.empty())
      refresh_blocks(state, w.row0, w.row0 + w.size, w.col0, w.col0 + w.size);
  }
  if (cfg.update_pupil && o_max > 0) {
    const RealGrid<double> tile_abs2 = tile.abs2();
    const RealGrid<double> weight =
        state.support * tile_abs2.sqrt() / (o_max * (tile_abs2 + cfg.delta2));
    pupil = (pupil + weight.cast<std::complex<double>>() * tile.conjugate() *
                         diff) *
            state.support.cast<std::complex<double>>();
  }
}

// Prediction, misfit, intensity constraint and update for one LED.
double step(ReconState& state, const TileWindow& w,
            const RealGrid<double>& captured, const ReconConfig& cfg) {
  ComplexGrid<double> psi =
      predict_field(state.object_spectrum, w, state.pupil.mask.data);
  ++state.forward_syntheses;
  const double misfit = (captured - psi.abs2()).square().sum();
  constrain_inplace(psi, captured);
  fft2_centered_inplace(psi);
  update_tile(state, w, psi, cfg);
  return misfit;
}

}  // namespace

ReconState initialize(const AcquisitionStack& stack, const ReconConfig& cfg) {
  cfg.validate();
  stack.validate();
  const SegmentFrame& seg = stack.segment;
  if (cfg.upsample != seg.upsample())
    throw ConfigError("recon upsample (" + std::to_string(cfg.upsample) +
                      ") differs from hr_size/lr_size (" +
                      std::to_string(seg.upsample()) + ")");
  const IntensityImage& central = stack.at({0, 0});

  ReconState state;
  const RealGrid<double> amp =
      upsample_bilinear(central.data.max(0.0).sqrt(), seg.upsample());
  const ComplexField object(amp.cast<std::complex<double>>(),
                            stack.lr_pitch / seg.upsample());
  state.object_spectrum = object_spectrum(object, seg.lr_size);
  state.pupil = make_ideal_pupil(seg.lr_size, stack.lr_pitch,
                                 stack.objective_na,
                                 stack.geometry.wavelength);
  state.support = disk_mask(seg.lr_size, state.pupil.cutoff_radius_px +
                                             cfg.pupil_support_dilation);
  return state;
}

ComplexField extract_lr_spectrum(const ReconState& state,
                                 const WaveVector& wv) {
  const TileWindow w = window_for(state, wv);
  return {state.object_spectrum.data.block(w.row0, w.col0, w.size, w.size) *
              state.pupil.mask.data,
          state.lr_pitch()};
}

ComplexField apply_intensity_constraint(const ComplexField& psi,
                                        const IntensityImage& captured) {
  if (psi.rows() != captured.rows() || psi.cols() != captured.cols())
    throw SizeError("intensity constraint: field and image sizes differ");
  ComplexField out = psi;
  constrain_inplace(out.data, captured.data);
  return out;
}

void epry_update(ReconState& state, const WaveVector& wv,
                 const ComplexField& phi_spectrum, const ReconConfig& cfg) {
  if (phi_spectrum.rows() != state.lr_size() ||
      phi_spectrum.cols() != state.lr_size())
    throw SizeError("epry_update: spectrum must match the pupil grid");
  update_tile(state, window_for(state, wv), phi_spectrum.data, cfg);
}

double led_misfit(const ReconState& state, const IntensityImage& captured,
                  const WaveVector& wv) {
  const ComplexGrid<double> psi = predict_field(
      state.object_spectrum, window_for(state, wv), state.pupil.mask.data);
  return (captured.data - psi.abs2()).square().sum();
}

double update_led(ReconState& state, const IntensityImage& captured,
                  const WaveVector& wv, const ReconConfig& cfg) {
  return step(state, window_for(state, wv), captured.data, cfg);
}

double data_misfit(const ReconState& state, const AcquisitionStack& stack,
                   const WaveVectorMap& wave_vectors) {
  double total = 0.0;
  for (const auto& [led, wv] : wave_vectors)
    total += led_misfit(state, stack.at(led), wv);
  return total;
}

std::vector<LedIndex> update_order(std::vector<LedIndex> leds,
                                   LedOrder order) {
  if (order == LedOrder::kRowMajor) {
    std::sort(leds.begin(), leds.end(), [](LedIndex a, LedIndex b) {
      return std::tie(a.n, a.m) < std::tie(b.n, b.m);
    });
  } else {
    std::stable_sort(leds.begin(), leds.end(), [](LedIndex a, LedIndex b) {
      const int ra = std::max(std::abs(a.m), std::abs(a.n));
      const int rb = std::max(std::abs(b.m), std::abs(b.n));
      return std::tie(ra, a.n, a.m) < std::tie(rb, b.n, b.m);
    });
  }
  return leds;
}

double sweep(ReconState& state, const AcquisitionStack& stack,
             const WaveVectorMap& wave_vectors,
             const std::vector<LedIndex>& order, const ReconConfig& cfg) {
  double cost = 0.0;
  for (LedIndex led : order) {
    auto it = wave_vectors.find(led);
    if (it == wave_vectors.end())
      throw InputError("no wave vector for LED (" + std::to_string(led.m) +
                       "," + std::to_string(led.n) + ")");
    cost += step(state, window_for(state, it->second), stack.at(led).data, cfg);
  }
  ++state.iter;
  state.cost_history.push_back(cost);
  return cost;
}

ReconResult resume(ReconState state, const AcquisitionStack& stack,
                   const WaveVectorMap& wave_vectors, const ReconConfig& cfg) {
  cfg.validate();
  std::vector<LedIndex> leds;
  leds.reserve(wave_vectors.size());
  for (const auto& [led, wv] : wave_vectors) leds.push_back(led);
  const std::vector<LedIndex> order = update_order(std::move(leds),
                                                   cfg.led_order);
  for (int j = 0; j < cfg.max_iters; ++j)
    sweep(state, stack, wave_vectors, order, cfg);
  ReconResult out;
  out.object = object_from_spectrum(state.object_spectrum, state.lr_size());
  out.pupil = state.pupil;
  out.state = std::move(state);
  return out;
}

ReconResult reconstruct(const AcquisitionStack& stack,
                        const WaveVectorMap& wave_vectors,
                        const ReconConfig& cfg) {
  if (wave_vectors.empty()) throw InputError("empty LED range");
  return resume(initialize(stack, cfg), stack, wave_vectors, cfg);
}

ReconResult reconstruct(const AcquisitionStack& stack, const LedGeometry& geom,
                        const SegmentFrame& seg, const ReconConfig& cfg,
                        std::optional<std::vector<LedIndex>> leds) {
  geom.validate();
  std::vector<LedIndex> range;
  if (leds) {
    range = *leds;
  } else {
    for (LedIndex led : square_range(geom.grid_half))
      if (stack.has(led)) range.push_back(led);
  }
  return reconstruct(stack, wave_vectors(geom, seg, range), cfg);
}

}  // namespace fpm
