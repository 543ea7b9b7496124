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
#include "fpm/field.hpp"

using namespace fpm;
using cd = std::complex<double>;

namespace {

ComplexGrid<double> random_grid(Index r, Index c, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g;
  ComplexGrid<double> out(r, c);
  for (Index i = 0; i < out.size(); ++i) out(i) = cd(g(rng), g(rng));
  return out;
}

double rel_err(const ComplexGrid<double>& a, const ComplexGrid<double>& b) {
  return std::sqrt((a - b).abs2().sum() / b.abs2().sum());
}

// Direct O(N^2 M^2) DFT with the DC moved to (N/2, M/2).
ComplexGrid<double> brute_centered_dft(const ComplexGrid<double>& x) {
  const Index n = x.rows(), m = x.cols();
  ComplexGrid<double> out(n, m);
  for (Index u = 0; u < n; ++u)
    for (Index v = 0; v < m; ++v) {
      cd acc = 0;
      const double fu = double(u - n / 2), fv = double(v - m / 2);
      for (Index r = 0; r < n; ++r)
        for (Index c = 0; c < m; ++c)
          acc += x(r, c) * std::polar(1.0, -2 * M_PI * (fu * r / n + fv * c / m));
      out(u, v) = acc;
    }
  return out;
}

}  // namespace

TEST_CASE("field constructors validate") {
  CHECK_THROWS_AS(ComplexField(ComplexGrid<double>(0, 0), 1.0), SizeError);
  CHECK_THROWS_AS(ComplexField(ComplexGrid<double>::Zero(4, 4), 0.0),
                  ConfigError);
  RealGrid<double> neg = RealGrid<double>::Zero(4, 4);
  neg(1, 1) = -1e-3;
  CHECK_THROWS_AS(IntensityImage(neg, 1.0), InputError);
  CHECK_NOTHROW(IntensityImage(RealGrid<double>::Zero(4, 4), 1.0));
}

TEST_CASE("constant field has a single DC coefficient c*N*M") {
  const cd c(0.7, -0.2);
  ComplexField f(ComplexGrid<double>::Constant(8, 6, c), 1.0);
  const ComplexField s = fft2_centered(f);
  for (Index r = 0; r < 8; ++r)
    for (Index k = 0; k < 6; ++k) {
      if (r == 4 && k == 3)
        CHECK(std::abs(s.data(r, k) - c * 48.0) < 1e-12);
      else
        CHECK(std::abs(s.data(r, k)) < 1e-12);
    }
}

TEST_CASE("delta at the centre has a flat magnitude spectrum") {
  ComplexGrid<double> g = ComplexGrid<double>::Zero(16, 16);
  g(8, 8) = 1.0;
  const ComplexField s = fft2_centered(ComplexField(g, 1.0));
  CHECK((s.data.abs() - 1.0).abs().maxCoeff() < 1e-12);
}

TEST_CASE("centred transform matches a brute-force DFT") {
  const ComplexGrid<double> x = random_grid(8, 12, 3);
  const ComplexField s = fft2_centered(ComplexField(x, 1.0));
  CHECK(rel_err(s.data, brute_centered_dft(x)) < 1e-12);
}

TEST_CASE("round trip and Parseval on a random 64x64 field") {
  const ComplexField f(random_grid(64, 64, 7), 2e-6);
  const ComplexField s = fft2_centered(f);
  CHECK(rel_err(ifft2_centered(s).data, f.data) < 1e-10);
  const double lhs = f.data.abs2().sum();
  const double rhs = s.data.abs2().sum() / (64.0 * 64.0);
  CHECK(std::abs(lhs - rhs) / lhs < 1e-8);
  CHECK(ifft2_centered(s).pitch == doctest::Approx(2e-6));
}

TEST_CASE("odd sizes are rejected") {
  CHECK_THROWS_AS(fft2_centered(ComplexField(random_grid(7, 8, 1), 1.0)),
                  SizeError);
}

TEST_CASE("shift property: a linear phase moves the peak by whole pixels") {
  const Index n = 32;
  for (auto [fr, fc] : {std::pair{3, -5}, std::pair{-7, 2}, std::pair{0, 11}}) {
    ComplexGrid<double> g(n, n);
    for (Index r = 0; r < n; ++r)
      for (Index c = 0; c < n; ++c)
        g(r, c) = std::polar(1.0, 2 * M_PI * (double(fr) * r + double(fc) * c) / n);
    const ComplexField s = fft2_centered(ComplexField(g, 1.0));
    Index pr, pc;
    s.data.abs().maxCoeff(&pr, &pc);
    CHECK(pr == n / 2 + fr);
    CHECK(pc == n / 2 + fc);
  }
}

TEST_CASE("crop_centered") {
  const ComplexField big(random_grid(512, 512, 5), 1.0);
  CHECK(crop_centered(big, 512, 512).data.isApprox(big.data, 0.0));

  ComplexGrid<double> dc = ComplexGrid<double>::Zero(8, 8);
  dc(4, 4) = 3.0;
  const ComplexField small = crop_centered(ComplexField(dc, 1.0), 4, 4);
  CHECK(small.data(2, 2) == cd(3.0));
  CHECK(small.data.abs().sum() == doctest::Approx(3.0));
  // Frequency band preserved: pitch scales by in/out.
  CHECK(small.pitch == doctest::Approx(2.0));

  CHECK_THROWS_AS(crop_centered(big, 1024, 512), SizeError);
  CHECK_THROWS_AS(crop_centered(big, 511, 512), SizeError);
}

TEST_CASE("crop then embed equals brute-force masking") {
  const ComplexField s(random_grid(32, 32, 11), 1.0);
  const ComplexField back =
      embed_centered(crop_centered(s, 12, 12), 32, 32);
  for (Index r = 0; r < 32; ++r)
    for (Index c = 0; c < 32; ++c) {
      const bool inside = r >= 10 && r < 22 && c >= 10 && c < 22;
      CHECK(back.data(r, c) == (inside ? s.data(r, c) : cd(0)));
    }
  // Projection: applying it twice changes nothing.
  const ComplexField twice =
      embed_centered(crop_centered(back, 12, 12), 32, 32);
  CHECK(twice.data.isApprox(back.data, 0.0));
  CHECK(back.pitch == doctest::Approx(s.pitch));
}

TEST_CASE("embed_centered") {
  const ComplexField t(random_grid(4, 4, 2), 1.0);
  CHECK(embed_centered(t, 4, 4).data.isApprox(t.data, 0.0));

  const ComplexField tile(random_grid(16, 16, 9), 1.0);
  const ComplexField e = embed_centered(tile, 64, 64);
  CHECK((crop_centered(e, 16, 16).data == tile.data).all());
  Index nonzero_outside = 0;
  for (Index r = 0; r < 64; ++r)
    for (Index c = 0; c < 64; ++c)
      if ((r < 24 || r >= 40 || c < 24 || c >= 40) && e.data(r, c) != cd(0))
        ++nonzero_outside;
  CHECK(nonzero_outside == 0);
  CHECK_THROWS_AS(embed_centered(tile, 8, 8), SizeError);
}

TEST_CASE("single-precision fields use the generic transform") {
  ComplexGrid<float> g = ComplexGrid<float>::Constant(8, 8, {1.0f, 0.0f});
  const BasicComplexField<float> s = fft2_centered(BasicComplexField<float>(g, 1.0f));
  CHECK(std::abs(s.data(4, 4) - std::complex<float>(64.0f)) < 1e-4f);
  const BasicComplexField<float> back = ifft2_centered(s);
  CHECK((back.data - g).abs().maxCoeff() < 1e-5f);
}
