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

// Coherent forward imaging: pupil filtering of the shifted object spectrum,
// intensity detection, and synthetic acquisition stacks.
//
// Object spectra are stored in LR units: fft2_centered(object) / upsample^2.
// Cropping an LR-sized tile out of such a spectrum and inverse transforming
// it on the LR grid reproduces the object amplitude scale, so a uniform
// object of amplitude a images to a uniform intensity a^2.

#ifndef FPM_FORWARD_HPP_
#define FPM_FORWARD_HPP_

#include <cstdint>
#include <map>
#include <optional>

#include "fpm/field.hpp"
#include "fpm/geometry.hpp"

namespace fpm {

// Coherent transfer function on the LR spectral grid. mask.pitch is the LR
// real-space pitch.
struct Pupil {
  ComplexField mask;
  double na = 0.0;
  double wavelength = 0.0;
  double cutoff_radius_px = 0.0;

  Index size() const { return mask.rows(); }
};

// 1 inside the centred disk of the given pixel radius, 0 outside.
RealGrid<double> disk_mask(Index size, double radius_px);

// Binary disk of radius na*size*pitch/lambda pixels. Throws ConfigError if
// the radius is below one pixel or the disk does not fit the grid.
Pupil make_ideal_pupil(int lr_size, double lr_pitch, double na,
                       double wavelength);

struct NoiseSpec {
  double gaussian_sigma_rel = 0.0;  // sigma / mean intensity, per image
  double poisson_photons = 0.0;     // photons at mean intensity; 0 = off
  std::uint64_t seed = 0;

  bool noiseless() const {
    return gaussian_sigma_rel <= 0 && poisson_photons <= 0;
  }
};

struct AcquisitionStack {
  std::map<LedIndex, IntensityImage> images;
  LedGeometry geometry;  // as believed at capture time
  SegmentFrame segment;
  double objective_na = 0.1;
  double lr_pitch = 1.625e-6;
  std::optional<Shift2> true_shift;

  const IntensityImage& at(LedIndex led) const;
  bool has(LedIndex led) const { return images.count(led) != 0; }
  // Throws InputError on inconsistent image sizes or pitches.
  void validate() const;
};

// Placement of the LR tile inside the HR spectrum for one wave vector.
struct TileWindow {
  Index row0 = 0;
  Index col0 = 0;
  Index size = 0;
};

// Throws OutOfBandError if the tile leaves the HR grid.
TileWindow tile_window(const WaveVector& wv, Index hr_size, Index lr_size,
                       double lr_pitch);

// HR object -> spectrum in LR units, and back.
ComplexField object_spectrum(const ComplexField& object_hr, Index lr_size);
ComplexField object_from_spectrum(const ComplexField& spectrum, Index lr_size);

// Low-resolution exit field psi for one tile: F^-1{tile * pupil}.
ComplexGrid<double> predict_field(const ComplexField& spectrum,
                                  const TileWindow& window,
                                  const ComplexGrid<double>& pupil);

IntensityImage simulate_capture_spectrum(const ComplexField& spectrum,
                                         const WaveVector& wv,
                                         const Pupil& pupil);

IntensityImage simulate_capture(const ComplexField& object_hr,
                                const WaveVector& wv, const Pupil& pupil,
                                Index lr_size);

// Captures every LED of the full array with `geom_true` (plus optional
// per-LED position offsets), stores `geom_nominal` as the believed geometry
// and geom_true.shift as the ground-truth shift.
AcquisitionStack generate_dataset(const ComplexField& object_hr,
                                  const LedGeometry& geom_true,
                                  const LedGeometry& geom_nominal,
                                  const SegmentFrame& seg, const Pupil& pupil,
                                  const NoiseSpec& noise = {},
                                  const PositionMap& jitter = {});

// Largest spatial-frequency NA guaranteed to be covered by the stitched
// spectrum: objective NA plus the smallest edge-LED direction sine.
double synthetic_na(const LedGeometry& geom, double objective_na,
                    const SegmentFrame& seg);

// Zeroes all spectral content above `na` (disk cutoff).
ComplexField band_limit(const ComplexField& object, double na,
                        double wavelength);

// Smooth random amplitude/phase test object: amplitude in roughly
// [0.4, 1], phase spanning `phase_range` radians.
ComplexField make_test_object(Index size, double pitch, std::uint64_t seed,
                              double phase_range = 1.0);

}  // namespace fpm

#endif  // FPM_FORWARD_HPP_
