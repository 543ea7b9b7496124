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

// On-disk formats: 16-bit grayscale PNG, raw float64 dumps, acquisition stack
// directories with a JSON manifest, and CSV traces.
//
// Stack layout:
//   manifest.json             geometry, segment, pitch, quantisation scale,
//                             optional true shift and truth file names
//   led_m{m}_n{n}.png         16-bit image, value = round(I / full_scale * 65535)
//   truth_real.f64, truth_imag.f64   optional ground-truth object (synthetic)

#ifndef FPM_IO_HPP_
#define FPM_IO_HPP_

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fpm/correction.hpp"
#include "fpm/field.hpp"
#include "fpm/forward.hpp"
#include "fpm/metrics.hpp"
#include "json.hpp"

namespace fpm::io {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

inline constexpr double kPngFullScale = 65535.0;

// Reads an 8- or 16-bit grayscale (or RGB, averaged) PNG scaled to [0, 1].
// Throws InputError naming the path on failure.
RealGrid<double> read_png(const fs::path& path);

// Writes `values` (clamped to [0, 1]) as a 16-bit grayscale PNG.
void write_png16(const fs::path& path, const RealGrid<double>& values);

// Row-major little-endian float64.
void write_f64(const fs::path& path, const RealGrid<double>& values);
RealGrid<double> read_f64(const fs::path& path, Index rows, Index cols);

std::string led_filename(LedIndex led);

void write_stack(const fs::path& dir, const AcquisitionStack& stack,
                 const std::optional<ComplexField>& truth = {});
AcquisitionStack read_stack(const fs::path& dir);
std::optional<ComplexField> read_truth(const fs::path& dir);

void write_cost_csv(const fs::path& path, const std::vector<double>& history);
void write_trace_csv(const fs::path& path, const std::vector<TraceRow>& trace);

Json to_json(const CorrectionResult& r, const std::string& trace_path);
Json to_json(const EvalReport& r);

void write_json(const fs::path& path, const Json& j);
Json read_json(const fs::path& path);

// Amplitude and phase PNGs (amplitude normalised to its max, phase mapped
// from [-pi, pi]) plus raw float64 dumps of both.
void write_field(const fs::path& dir, const std::string& stem,
                 const ComplexField& field);

}  // namespace fpm::io

#endif  // FPM_IO_HPP_
