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

// Complex and intensity grids with a physical sample pitch, centred 2D
// Fourier transforms, and the crop/embed pair used to move between the
// high- and low-resolution spectral grids.
//
// Conventions:
//   * Forward transform is unnormalised; the inverse carries 1/(rows*cols).
//   * Spectra are centred: for an even side N the zero frequency lives at
//     index N/2. Real-space origin stays at index 0.
//   * Only even grid sides are accepted by the transforms.

#ifndef FPM_FIELD_HPP_
#define FPM_FIELD_HPP_

#include <Eigen/Dense>
#include <complex>
#include <string>
#include <vector>
#include <unsupported/Eigen/FFT>

#include "fpm/error.hpp"

namespace fpm {

using Index = Eigen::Index;

template <typename Scalar>
using ComplexGrid =
    Eigen::Array<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using RealGrid = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

// A complex 2D field. `pitch` is the sample-plane pixel size in meters; a
// spectrum carries the pitch of the real-space grid it transforms to.
template <typename Scalar>
struct BasicComplexField {
  ComplexGrid<Scalar> data;
  Scalar pitch = Scalar(1);

  BasicComplexField() = default;
  BasicComplexField(ComplexGrid<Scalar> d, Scalar p)
      : data(std::move(d)), pitch(p) {
    if (data.rows() < 1 || data.cols() < 1)
      throw SizeError("field must have at least one row and column");
    if (!(pitch > 0)) throw ConfigError("field pitch must be positive");
  }

  static BasicComplexField Zero(Index rows, Index cols, Scalar pitch) {
    return {ComplexGrid<Scalar>::Zero(rows, cols), pitch};
  }

  Index rows() const { return data.rows(); }
  Index cols() const { return data.cols(); }
};

// Non-negative real image (captured or predicted intensity).
template <typename Scalar>
struct BasicIntensityImage {
  RealGrid<Scalar> data;
  Scalar pitch = Scalar(1);

  BasicIntensityImage() = default;
  BasicIntensityImage(RealGrid<Scalar> d, Scalar p)
      : data(std::move(d)), pitch(p) {
    if (data.rows() < 1 || data.cols() < 1)
      throw SizeError("image must have at least one row and column");
    if (!(pitch > 0)) throw ConfigError("image pitch must be positive");
    if ((data < Scalar(0)).any())
      throw InputError("intensity image has negative values");
  }

  Index rows() const { return data.rows(); }
  Index cols() const { return data.cols(); }
};

using ComplexField = BasicComplexField<double>;
using IntensityImage = BasicIntensityImage<double>;

namespace detail {

inline void require_even(Index rows, Index cols) {
  if (rows < 2 || cols < 2 || rows % 2 != 0 || cols % 2 != 0)
    throw SizeError("transform grids must have even sides, got " +
                    std::to_string(rows) + "x" + std::to_string(cols));
}

// Generic in-place unnormalised 2D DFT through Eigen's FFT module.
template <typename Scalar>
void fft2_inplace(ComplexGrid<Scalar>& grid, bool inverse) {
  thread_local Eigen::FFT<Scalar> fft;
  fft.SetFlag(Eigen::FFT<Scalar>::Unscaled);
  using Complex = std::complex<Scalar>;
  const Index rows = grid.rows();
  const Index cols = grid.cols();
  std::vector<Complex> in(std::max(rows, cols)), out(in.size());
  for (Index c = 0; c < cols; ++c) {
    Complex* col = grid.data() + c * rows;
    if (inverse)
      fft.inv(out.data(), col, rows);
    else
      fft.fwd(out.data(), col, rows);
    std::copy_n(out.data(), rows, col);
  }
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) in[c] = grid(r, c);
    if (inverse)
      fft.inv(out.data(), in.data(), cols);
    else
      fft.fwd(out.data(), in.data(), cols);
    for (Index c = 0; c < cols; ++c) grid(r, c) = out[c];
  }
}

// Double precision overload; FFTW-backed when the build enables it.
void fft2_inplace(ComplexGrid<double>& grid, bool inverse);

template <typename Scalar>
void apply_checkerboard(ComplexGrid<Scalar>& grid) {
  for (Index c = 0; c < grid.cols(); ++c)
    for (Index r = 1 - (c & 1); r < grid.rows(); r += 2) grid(r, c) = -grid(r, c);
}

}  // namespace detail

// In-place centred transforms on bare grids. (-1)^(r+c) modulation moves the
// zero frequency to the grid centre without an explicit fftshift.
template <typename Scalar>
void fft2_centered_inplace(ComplexGrid<Scalar>& grid) {
  detail::require_even(grid.rows(), grid.cols());
  detail::apply_checkerboard(grid);
  detail::fft2_inplace(grid, false);
}

template <typename Scalar>
void ifft2_centered_inplace(ComplexGrid<Scalar>& grid) {
  detail::require_even(grid.rows(), grid.cols());
  detail::fft2_inplace(grid, true);
  grid /= Scalar(grid.rows() * grid.cols());
  detail::apply_checkerboard(grid);
}

template <typename Scalar>
BasicComplexField<Scalar> fft2_centered(BasicComplexField<Scalar> field) {
  fft2_centered_inplace(field.data);
  return field;
}

template <typename Scalar>
BasicComplexField<Scalar> ifft2_centered(BasicComplexField<Scalar> field) {
  ifft2_centered_inplace(field.data);
  return field;
}

// Top-left corner of an `inner` window centred (DC on DC) inside `outer`.
inline Index centered_origin(Index outer, Index inner) {
  return outer / 2 - inner / 2;
}

// Centred spectral sub-tile. The returned pitch is that of a real-space grid
// with the smaller side covering the same frequency spacing.
template <typename Scalar>
BasicComplexField<Scalar> crop_centered(const BasicComplexField<Scalar>& spec,
                                        Index out_rows, Index out_cols) {
  if (out_rows < 1 || out_cols < 1 || out_rows > spec.rows() ||
      out_cols > spec.cols())
    throw SizeError("crop_centered: output must fit inside the input");
  if ((out_rows % 2) != (spec.rows() % 2) ||
      (out_cols % 2) != (spec.cols() % 2))
    throw SizeError("crop_centered: parities must match to keep DC aligned");
  const Index r0 = centered_origin(spec.rows(), out_rows);
  const Index c0 = centered_origin(spec.cols(), out_cols);
  return {spec.data.block(r0, c0, out_rows, out_cols),
          spec.pitch * Scalar(spec.rows()) / Scalar(out_rows)};
}

// Zero-padded centred embedding; the adjoint of crop_centered.
template <typename Scalar>
BasicComplexField<Scalar> embed_centered(const BasicComplexField<Scalar>& tile,
                                         Index out_rows, Index out_cols) {
  if (out_rows < tile.rows() || out_cols < tile.cols())
    throw SizeError("embed_centered: output must contain the tile");
  if ((out_rows % 2) != (tile.rows() % 2) ||
      (out_cols % 2) != (tile.cols() % 2))
    throw SizeError("embed_centered: parities must match to keep DC aligned");
  auto out = BasicComplexField<Scalar>::Zero(
      out_rows, out_cols, tile.pitch * Scalar(tile.rows()) / Scalar(out_rows));
  out.data.block(centered_origin(out_rows, tile.rows()),
                 centered_origin(out_cols, tile.cols()), tile.rows(),
                 tile.cols()) = tile.data;
  return out;
}

template <typename Scalar>
RealGrid<Scalar> intensity(const ComplexGrid<Scalar>& field) {
  return field.abs2();
}

}  // namespace fpm

#endif  // FPM_FIELD_HPP_
