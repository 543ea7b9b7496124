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

#include "fpm/forward.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <mutex>
#include <numbers>
#include <random>
#include <string>

#include "fpm/error.hpp"

namespace fpm {

RealGrid<double> disk_mask(Index size, double radius_px) {
  RealGrid<double> mask(size, size);
  const double c = double(size / 2);
  const double r2 = radius_px * radius_px;
  for (Index col = 0; col < size; ++col)
    for (Index row = 0; row < size; ++row) {
      const double dx = double(col) - c;
      const double dy = double(row) - c;
      mask(row, col) = (dx * dx + dy * dy <= r2) ? 1.0 : 0.0;
    }
  return mask;
}

Pupil make_ideal_pupil(int lr_size, double lr_pitch, double na,
                       double wavelength) {
  if (!(na > 0 && na < 1)) throw ConfigError("pupil NA must lie in (0, 1)");
  if (!(lr_pitch > 0) || !(wavelength > 0))
    throw ConfigError("pupil pitch and wavelength must be positive");
  const double radius = na * lr_size * lr_pitch / wavelength;
  if (radius < 1.0)
    throw ConfigError("pupil cutoff radius below one pixel (" +
                      std::to_string(radius) + ")");
  if (radius >= lr_size / 2)
    throw ConfigError("pupil disk exceeds the LR spectral grid (radius " +
                      std::to_string(radius) + " px)");
  if (lr_pitch > wavelength / (4.0 * na)) {
    static std::once_flag warned;
    std::call_once(warned, [] {
      std::cerr << "warning: LR pitch undersamples bright-field intensity\n";
    });
  }
  Pupil p;
  p.mask = ComplexField(disk_mask(lr_size, radius).cast<std::complex<double>>(),
                        lr_pitch);
  p.na = na;
  p.wavelength = wavelength;
  p.cutoff_radius_px = radius;
  return p;
}

const IntensityImage& AcquisitionStack::at(LedIndex led) const {
  auto it = images.find(led);
  if (it == images.end())
    throw InputError("stack has no image for LED (" + std::to_string(led.m) +
                     "," + std::to_string(led.n) + ")");
  return it->second;
}

void AcquisitionStack::validate() const {
  if (images.empty()) throw InputError("acquisition stack is empty");
  for (const auto& [led, img] : images) {
    if (img.rows() != segment.lr_size || img.cols() != segment.lr_size)
      throw InputError("stack image size differs from lr_size");
    if (std::abs(img.pitch - lr_pitch) > 1e-9 * lr_pitch)
      throw InputError("stack image pitch differs from lr_pitch");
  }
}

TileWindow tile_window(const WaveVector& wv, Index hr_size, Index lr_size,
                       double lr_pitch) {
  const PixelOffset off = pixel_offset(wv, int(lr_size), lr_pitch);
  // Psi(k) = O(k - k_led) P(k): the tile is centred at -k_led.
  const Index row0 = hr_size / 2 - off.row - lr_size / 2;
  const Index col0 = hr_size / 2 - off.col - lr_size / 2;
  if (row0 < 0 || col0 < 0 || row0 + lr_size > hr_size ||
      col0 + lr_size > hr_size)
    throw OutOfBandError("spectral tile at offset (" +
                         std::to_string(off.col) + "," +
                         std::to_string(off.row) + ") leaves the HR grid");
  return {row0, col0, lr_size};
}

ComplexField object_spectrum(const ComplexField& object_hr, Index lr_size) {
  const double u = double(object_hr.rows()) / double(lr_size);
  ComplexField spec = fft2_centered(object_hr);
  spec.data /= u * u;
  return spec;
}

ComplexField object_from_spectrum(const ComplexField& spectrum,
                                  Index lr_size) {
  const double u = double(spectrum.rows()) / double(lr_size);
  ComplexField obj = ifft2_centered(spectrum);
  obj.data *= u * u;
  return obj;
}

ComplexGrid<double> predict_field(const ComplexField& spectrum,
                                  const TileWindow& window,
                                  const ComplexGrid<double>& pupil) {
  ComplexGrid<double> psi =
      spectrum.data.block(window.row0, window.col0, window.size, window.size) *
      pupil;
  ifft2_centered_inplace(psi);
  return psi;
}

IntensityImage simulate_capture_spectrum(const ComplexField& spectrum,
                                         const WaveVector& wv,
                                         const Pupil& pupil) {
  const Index lr = pupil.size();
  const TileWindow w = tile_window(wv, spectrum.rows(), lr, pupil.mask.pitch);
  return {predict_field(spectrum, w, pupil.mask.data).abs2(), pupil.mask.pitch};
}

IntensityImage simulate_capture(const ComplexField& object_hr,
                                const WaveVector& wv, const Pupil& pupil,
                                Index lr_size) {
  if (object_hr.rows() % lr_size != 0 || object_hr.cols() != object_hr.rows())
    throw SizeError("object must be square with a side divisible by lr_size");
  if (pupil.size() != lr_size)
    throw SizeError("pupil grid must match lr_size");
  return simulate_capture_spectrum(object_spectrum(object_hr, lr_size), wv,
                                   pupil);
}

namespace {

std::mt19937_64 led_rng(std::uint64_t seed, LedIndex led) {
  std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32),
                    std::uint32_t(led.m + 1024), std::uint32_t(led.n + 1024)};
  return std::mt19937_64(seq);
}

void apply_noise(RealGrid<double>& img, const NoiseSpec& noise, LedIndex led) {
  if (noise.noiseless()) return;
  auto rng = led_rng(noise.seed, led);
  const double mean = img.mean();
  if (mean <= 0) return;
  if (noise.poisson_photons > 0) {
    const double scale = noise.poisson_photons / mean;
    for (Index i = 0; i < img.size(); ++i) {
      std::poisson_distribution<long long> pd(std::max(0.0, img(i) * scale));
      img(i) = double(pd(rng)) / scale;
    }
  }
  if (noise.gaussian_sigma_rel > 0) {
    std::normal_distribution<double> nd(0.0, noise.gaussian_sigma_rel * mean);
    for (Index i = 0; i < img.size(); ++i) img(i) += nd(rng);
  }
  img = img.max(0.0);
}

}  // namespace

AcquisitionStack generate_dataset(const ComplexField& object_hr,
                                  const LedGeometry& geom_true,
                                  const LedGeometry& geom_nominal,
                                  const SegmentFrame& seg, const Pupil& pupil,
                                  const NoiseSpec& noise,
                                  const PositionMap& jitter) {
  geom_true.validate();
  geom_nominal.validate();
  seg.validate();
  if (object_hr.rows() != seg.hr_size || object_hr.cols() != seg.hr_size)
    throw SizeError("object grid must be hr_size x hr_size");
  if (pupil.size() != seg.lr_size)
    throw SizeError("pupil grid must match lr_size");

  const ComplexField spectrum = object_spectrum(object_hr, seg.lr_size);
  AcquisitionStack stack;
  stack.geometry = geom_nominal;
  stack.segment = seg;
  stack.objective_na = pupil.na;
  stack.lr_pitch = pupil.mask.pitch;
  stack.true_shift = geom_true.shift;
  for (LedIndex led : square_range(geom_true.grid_half)) {
    Eigen::Vector2d pos = led_position(led, geom_true);
    if (auto it = jitter.find(led); it != jitter.end()) pos += it->second;
    const WaveVector wv = wave_vector_at(pos, geom_true, seg);
    IntensityImage img = simulate_capture_spectrum(spectrum, wv, pupil);
    apply_noise(img.data, noise, led);
    stack.images.emplace(led, std::move(img));
  }
  return stack;
}

double synthetic_na(const LedGeometry& geom, double objective_na,
                    const SegmentFrame& seg) {
  double edge = 1.0;
  const int h = geom.grid_half;
  for (LedIndex led : {LedIndex{h, 0}, LedIndex{-h, 0}, LedIndex{0, h},
                       LedIndex{0, -h}})
    edge = std::min(edge,
                    direction_sine(wave_vector(led, geom, seg), geom.wavelength));
  return objective_na + edge;
}

ComplexField band_limit(const ComplexField& object, double na,
                        double wavelength) {
  if (object.rows() != object.cols())
    throw SizeError("band_limit expects a square grid");
  ComplexField spec = fft2_centered(object);
  const double radius = na * double(object.rows()) * object.pitch / wavelength;
  spec.data *= disk_mask(object.rows(), radius).cast<std::complex<double>>();
  return ifft2_centered(spec);
}

namespace {

RealGrid<double> blob_field(Index size, std::mt19937_64& rng, int count,
                            double min_width, double max_width) {
  std::uniform_real_distribution<double> pos(0.0, double(size));
  std::uniform_real_distribution<double> width(min_width, max_width);
  std::uniform_real_distribution<double> weight(-1.0, 1.0);
  RealGrid<double> f = RealGrid<double>::Zero(size, size);
  for (int b = 0; b < count; ++b) {
    const double cx = pos(rng), cy = pos(rng), w = width(rng), a = weight(rng);
    const double inv = 1.0 / (2.0 * w * w);
    for (Index col = 0; col < size; ++col) {
      // Periodic distance keeps the field seamless under the DFT.
      double dx = std::abs(double(col) - cx);
      dx = std::min(dx, double(size) - dx);
      for (Index row = 0; row < size; ++row) {
        double dy = std::abs(double(row) - cy);
        dy = std::min(dy, double(size) - dy);
        f(row, col) += a * std::exp(-(dx * dx + dy * dy) * inv);
      }
    }
  }
  const double lo = f.minCoeff(), hi = f.maxCoeff();
  return hi > lo ? RealGrid<double>((f - lo) / (hi - lo))
                 : RealGrid<double>::Zero(size, size);
}

}  // namespace

ComplexField make_test_object(Index size, double pitch, std::uint64_t seed,
                              double phase_range) {
  std::mt19937_64 rng(seed);
  const double s = double(size);
  RealGrid<double> amp = 0.6 * blob_field(size, rng, 24, s / 40, s / 8) +
                         0.4 * blob_field(size, rng, 60, 1.0, s / 64);
  RealGrid<double> phase = 0.7 * blob_field(size, rng, 16, s / 32, s / 6) +
                           0.3 * blob_field(size, rng, 40, 1.0, s / 64);
  amp = 0.4 + 0.6 * amp;
  ComplexGrid<double> data(size, size);
  for (Index i = 0; i < data.size(); ++i)
    data(i) = std::polar(amp(i), phase_range * phase(i));
  return {std::move(data), pitch};
}

}  // namespace fpm
