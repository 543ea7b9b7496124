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

#include "fpm/metrics.hpp"

#include <cmath>
#include <limits>

#include "fpm/error.hpp"

namespace fpm {

namespace {

// Integer tilt maximising |sum r conj(t) e^{-i k x}|, removed from `recon`.
ComplexGrid<double> remove_integer_tilt(const ComplexGrid<double>& recon,
                                        const ComplexGrid<double>& truth) {
  ComplexGrid<double> prod = recon * truth.conjugate();
  ComplexGrid<double> spec = prod;
  fft2_centered_inplace(spec);
  Index r = 0, c = 0;
  spec.abs2().maxCoeff(&r, &c);
  const double fr = double(r - spec.rows() / 2) / double(spec.rows());
  const double fc = double(c - spec.cols() / 2) / double(spec.cols());
  ComplexGrid<double> out = recon;
  for (Index col = 0; col < out.cols(); ++col)
    for (Index row = 0; row < out.rows(); ++row)
      out(row, col) *= std::polar(
          1.0, -2.0 * M_PI * (fr * double(row) + fc * double(col)));
  return out;
}

}  // namespace

FieldComparison compare_fields(const ComplexField& recon,
                               const ComplexField& truth, bool remove_tilt) {
  if (recon.rows() != truth.rows() || recon.cols() != truth.cols())
    throw SizeError("compare_fields: dimensions differ");
  const double n = double(truth.data.size());
  FieldComparison out;

  const RealGrid<double> a = recon.data.abs();
  const RealGrid<double> b = truth.data.abs();
  const double aa = a.square().sum();
  const double gain = aa > 0 ? (a * b).sum() / aa : 0.0;
  out.rmse_amplitude = std::sqrt((gain * a - b).square().sum() / n);
  const double rms_truth = std::sqrt(b.square().sum() / n);
  out.rel_rmse_amplitude =
      rms_truth > 0 ? out.rmse_amplitude / rms_truth : out.rmse_amplitude;
  const double peak = b.maxCoeff();
  out.psnr_amplitude = out.rmse_amplitude > 0
                           ? 20.0 * std::log10(peak / out.rmse_amplitude)
                           : std::numeric_limits<double>::infinity();

  ComplexGrid<double> r = recon.data;
  if (remove_tilt && r.rows() % 2 == 0 && r.cols() % 2 == 0)
    r = remove_integer_tilt(r, truth.data);
  const std::complex<double> overlap = (r * truth.data.conjugate()).sum();
  const std::complex<double> piston =
      std::abs(overlap) > 0 ? std::conj(overlap) / std::abs(overlap)
                            : std::complex<double>(1.0);
  double sq = 0.0;
  for (Index i = 0; i < r.size(); ++i) {
    const double dphi = std::arg(r(i) * piston * std::conj(truth.data(i)));
    sq += dphi * dphi;
  }
  out.rmse_phase = std::sqrt(sq / n);
  return out;
}

double disorder_metric(const PositionMap& positions, double d) {
  double worst = 0.0;
  for (const auto& [led, p] : positions) {
    for (LedIndex next : {LedIndex{led.m + 1, led.n}, LedIndex{led.m, led.n + 1}}) {
      auto it = positions.find(next);
      if (it == positions.end()) continue;
      const double dev = std::abs((it->second - p).norm() - d);
      if (dev > 1e-12 * d) worst = std::max(worst, dev);
    }
  }
  return worst;
}

EvalReport make_report(const FieldComparison& cmp, double final_misfit) {
  EvalReport r;
  r.rmse_amplitude = cmp.rmse_amplitude;
  r.rel_rmse_amplitude = cmp.rel_rmse_amplitude;
  r.rmse_phase = cmp.rmse_phase;
  r.psnr_amplitude = cmp.psnr_amplitude;
  r.final_data_misfit = final_misfit;
  return r;
}

}  // namespace fpm
