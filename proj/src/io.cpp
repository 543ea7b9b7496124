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

#include "fpm/io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

#include "fpm/error.hpp"

namespace fpm::io {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const fs::path& path, const char* mode) {
  FilePtr f(std::fopen(path.string().c_str(), mode));
  if (!f) throw InputError("cannot open " + path.string());
  return f;
}

}  // namespace

RealGrid<double> read_png(const fs::path& path) {
  FilePtr f = open_file(path, "rb");
  unsigned char sig[8];
  if (std::fread(sig, 1, 8, f.get()) != 8 || png_sig_cmp(sig, 0, 8))
    throw InputError("not a PNG file: " + path.string());

  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw InputError("libpng initialisation failed for " + path.string());
  }
  RealGrid<double> out;
  std::vector<png_bytep> rows;
  std::vector<unsigned char> buffer;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw InputError("corrupt PNG: " + path.string());
  }
  png_init_io(png, f.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  const png_uint_32 width = png_get_image_width(png, info);
  const png_uint_32 height = png_get_image_height(png, info);
  const int color = png_get_color_type(png, info);
  int depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8)
    png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (depth == 16) png_set_swap(png);  // little-endian samples
  png_read_update_info(png, info);
  depth = png_get_bit_depth(png, info);
  const int channels = png_get_channels(png, info);
  const std::size_t stride = png_get_rowbytes(png, info);

  buffer.resize(stride * height);
  rows.resize(height);
  for (png_uint_32 r = 0; r < height; ++r) rows[r] = buffer.data() + r * stride;
  png_read_image(png, rows.data());
  png_destroy_read_struct(&png, &info, nullptr);

  const double full = depth == 16 ? 65535.0 : 255.0;
  out.resize(height, width);
  for (png_uint_32 r = 0; r < height; ++r)
    for (png_uint_32 c = 0; c < width; ++c) {
      double sum = 0.0;
      for (int ch = 0; ch < channels; ++ch) {
        const std::size_t idx = std::size_t(c) * channels + ch;
        if (depth == 16) {
          const auto* p = reinterpret_cast<const std::uint16_t*>(rows[r]);
          sum += p[idx];
        } else {
          sum += rows[r][idx];
        }
      }
      out(r, c) = sum / channels / full;
    }
  return out;
}

void write_png16(const fs::path& path, const RealGrid<double>& values) {
  FilePtr f = open_file(path, "wb");
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw InputError("libpng initialisation failed for " + path.string());
  }
  const Index h = values.rows(), w = values.cols();
  std::vector<unsigned char> buffer(std::size_t(h * w) * 2);
  for (Index r = 0; r < h; ++r)
    for (Index c = 0; c < w; ++c) {
      const double v = std::clamp(values(r, c), 0.0, 1.0);
      const auto q = std::uint16_t(std::lround(v * kPngFullScale));
      buffer[std::size_t(r * w + c) * 2] = std::uint8_t(q >> 8);
      buffer[std::size_t(r * w + c) * 2 + 1] = std::uint8_t(q & 0xff);
    }
  std::vector<png_bytep> rows(static_cast<std::size_t>(h));
  for (Index r = 0; r < h; ++r)
    rows[std::size_t(r)] = buffer.data() + std::size_t(r * w) * 2;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw InputError("failed writing PNG: " + path.string());
  }
  png_init_io(png, f.get());
  png_set_IHDR(png, info, png_uint_32(w), png_uint_32(h), 16,
               PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

void write_f64(const fs::path& path, const RealGrid<double>& values) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  const Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>
      row_major = values;
  out.write(reinterpret_cast<const char*>(row_major.data()),
            std::streamsize(row_major.size() * sizeof(double)));
}

RealGrid<double> read_f64(const fs::path& path, Index rows, Index cols) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> data(
      rows, cols);
  in.read(reinterpret_cast<char*>(data.data()),
          std::streamsize(data.size() * sizeof(double)));
  if (in.gcount() != std::streamsize(data.size() * sizeof(double)))
    throw InputError("short float64 dump: " + path.string());
  return data;
}

std::string led_filename(LedIndex led) {
  return "led_m" + std::to_string(led.m) + "_n" + std::to_string(led.n) +
         ".png";
}

void write_json(const fs::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

Json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InputError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

void write_stack(const fs::path& dir, const AcquisitionStack& stack,
                 const std::optional<ComplexField>& truth) {
  stack.validate();
  fs::create_directories(dir);
  double full_scale = 0.0;
  for (const auto& [led, img] : stack.images)
    full_scale = std::max(full_scale, img.data.maxCoeff());
  if (!(full_scale > 0)) full_scale = 1.0;

  Json manifest;
  const LedGeometry& g = stack.geometry;
  manifest["geometry"] = {{"d_mm", g.pitch * 1e3},
                          {"s_mm", g.distance * 1e3},
                          {"lambda_nm", g.wavelength * 1e9},
                          {"grid_half", g.grid_half},
                          {"shift_mm", {g.shift.dx * 1e3, g.shift.dy * 1e3}}};
  manifest["segment"] = {{"x0_mm", stack.segment.x0 * 1e3},
                         {"y0_mm", stack.segment.y0 * 1e3},
                         {"lr_size_px", stack.segment.lr_size},
                         {"hr_size_px", stack.segment.hr_size}};
  manifest["objective_na"] = stack.objective_na;
  manifest["lr_pitch_um"] = stack.lr_pitch * 1e6;
  manifest["full_scale"] = full_scale;
  if (stack.true_shift)
    manifest["true_shift_mm"] = {stack.true_shift->dx * 1e3,
                                 stack.true_shift->dy * 1e3};
  Json images = Json::array();
  for (const auto& [led, img] : stack.images) {
    const std::string name = led_filename(led);
    write_png16(dir / name, img.data / full_scale);
    images.push_back({{"m", led.m}, {"n", led.n}, {"file", name}});
  }
  manifest["images"] = std::move(images);
  if (truth) {
    write_f64(dir / "truth_real.f64", truth->data.real());
    write_f64(dir / "truth_imag.f64", truth->data.imag());
    manifest["truth"] = {{"real", "truth_real.f64"},
                         {"imag", "truth_imag.f64"},
                         {"size_px", truth->rows()},
                         {"pitch_um", truth->pitch * 1e6}};
  }
  write_json(dir / "manifest.json", manifest);
}

namespace {

template <typename T>
T field(const Json& j, const char* key, const fs::path& where) {
  if (!j.contains(key))
    throw InputError("manifest " + where.string() + " lacks '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw InputError("manifest " + where.string() + ": bad type for '" + key +
                     "'");
  }
}

}  // namespace

AcquisitionStack read_stack(const fs::path& dir) {
  const fs::path mpath = dir / "manifest.json";
  const Json m = read_json(mpath);
  AcquisitionStack stack;
  const Json& g = m.at("geometry");
  stack.geometry.pitch = field<double>(g, "d_mm", mpath) * 1e-3;
  stack.geometry.distance = field<double>(g, "s_mm", mpath) * 1e-3;
  stack.geometry.wavelength = field<double>(g, "lambda_nm", mpath) * 1e-9;
  stack.geometry.grid_half = field<int>(g, "grid_half", mpath);
  const auto shift = field<std::vector<double>>(g, "shift_mm", mpath);
  if (shift.size() != 2) throw InputError("shift_mm must have two entries");
  stack.geometry.shift = {shift[0] * 1e-3, shift[1] * 1e-3};
  const Json& s = m.at("segment");
  stack.segment.x0 = field<double>(s, "x0_mm", mpath) * 1e-3;
  stack.segment.y0 = field<double>(s, "y0_mm", mpath) * 1e-3;
  stack.segment.lr_size = field<int>(s, "lr_size_px", mpath);
  stack.segment.hr_size = field<int>(s, "hr_size_px", mpath);
  stack.objective_na = field<double>(m, "objective_na", mpath);
  stack.lr_pitch = field<double>(m, "lr_pitch_um", mpath) * 1e-6;
  const double full_scale = field<double>(m, "full_scale", mpath);
  if (m.contains("true_shift_mm")) {
    const auto t = field<std::vector<double>>(m, "true_shift_mm", mpath);
    if (t.size() != 2) throw InputError("true_shift_mm must have two entries");
    stack.true_shift = Shift2{t[0] * 1e-3, t[1] * 1e-3};
  }
  for (const Json& e : m.at("images")) {
    const LedIndex led{field<int>(e, "m", mpath), field<int>(e, "n", mpath)};
    const fs::path file = dir / field<std::string>(e, "file", mpath);
    RealGrid<double> img = read_png(file) * full_scale;
    if (img.rows() != stack.segment.lr_size ||
        img.cols() != stack.segment.lr_size)
      throw InputError("image " + file.string() + " does not match lr_size");
    stack.images.emplace(led, IntensityImage(std::move(img), stack.lr_pitch));
  }
  stack.validate();
  return stack;
}

std::optional<ComplexField> read_truth(const fs::path& dir) {
  const fs::path mpath = dir / "manifest.json";
  const Json m = read_json(mpath);
  if (!m.contains("truth")) return std::nullopt;
  const Json& t = m.at("truth");
  const Index n = field<Index>(t, "size_px", mpath);
  const RealGrid<double> re =
      read_f64(dir / field<std::string>(t, "real", mpath), n, n);
  const RealGrid<double> im =
      read_f64(dir / field<std::string>(t, "imag", mpath), n, n);
  ComplexGrid<double> data(n, n);
  data.real() = re;
  data.imag() = im;
  return ComplexField(std::move(data), field<double>(t, "pitch_um", mpath) * 1e-6);
}

void write_cost_csv(const fs::path& path, const std::vector<double>& history) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << "iter,cost\n" << std::setprecision(17);
  for (std::size_t i = 0; i < history.size(); ++i)
    out << i + 1 << ',' << history[i] << '\n';
}

void write_trace_csv(const fs::path& path, const std::vector<TraceRow>& trace) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << "eval,candidate_dx,candidate_dy,cost,accepted\n"
      << std::setprecision(17);
  for (const TraceRow& r : trace)
    out << r.eval << ',' << r.dx << ',' << r.dy << ',' << r.cost << ','
        << (r.accepted ? 1 : 0) << '\n';
}

Json to_json(const CorrectionResult& r, const std::string& trace_path) {
  return {{"shift_m", {r.shift.dx, r.shift.dy}},
          {"n_cost_evals", r.n_cost_evals},
          {"n_forward_syntheses", r.n_forward_syntheses},
          {"bright_field_side", r.bright_field_side},
          {"inner_iters", r.inner_iters},
          {"wall_time_s", r.wall_time},
          {"trace_path", trace_path}};
}

Json to_json(const EvalReport& r) {
  Json j = {{"rmse_amplitude", r.rmse_amplitude},
            {"rel_rmse_amplitude", r.rel_rmse_amplitude},
            {"rmse_phase", r.rmse_phase},
            {"psnr_amplitude", r.psnr_amplitude},
            {"final_data_misfit", r.final_data_misfit}};
  if (r.shift_error)
    j["shift_error_m"] = {r.shift_error->dx, r.shift_error->dy};
  if (r.disorder) j["disorder_metric_m"] = *r.disorder;
  return j;
}

void write_field(const fs::path& dir, const std::string& stem,
                 const ComplexField& field) {
  fs::create_directories(dir);
  const RealGrid<double> amp = field.data.abs();
  const RealGrid<double> phase = field.data.arg();
  const double peak = amp.maxCoeff();
  write_png16(dir / (stem + "_amplitude.png"),
              peak > 0 ? RealGrid<double>(amp / peak) : amp);
  write_png16(dir / (stem + "_phase.png"), (phase + M_PI) / (2.0 * M_PI));
  write_f64(dir / (stem + "_amplitude.f64"), amp);
  write_f64(dir / (stem + "_phase.f64"), phase);
}

}  // namespace fpm::io
