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


// fpm: simulate, reconstruct, correct, bench and evaluate FPM segments.
//
// Exit codes: 0 success, 2 configuration or usage error, 3 input-data error,
// 4 assertion failure. FPM_THREADS caps the worker count for batches.

#include <algorithm>
#include <cmath>
#include <complex>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fpm/config.hpp"
#include "fpm/error.hpp"
#include "fpm/io.hpp"
#include "fpm/pipeline.hpp"

namespace fs = std::filesystem;
using fpm::io::Json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitInput = 3;
constexpr int kExitAssert = 4;

struct AssertionFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string correct = "none";
  std::string stack;
  std::string out;
  std::string result;
  bool assert_order = false;
};

fpm::RunConfig load(const Options& o) {
  fpm::RunConfig cfg;
  if (!o.config.empty()) cfg = fpm::load_config(o.config);
  if (o.seed) {
    cfg.annealer.seed = *o.seed;
    cfg.annealer_seed_set = true;
    cfg.noise.seed = *o.seed;
  }
  cfg.validate();
  return cfg;
}

void require_seed(const fpm::RunConfig& cfg) {
  if (!cfg.annealer_seed_set)
    throw fpm::ConfigError(
        "correction needs an annealer seed: set annealer.seed or pass --seed");
}

// A stack directory holds manifest.json; a batch directory holds seg_*
// stacks.
std::vector<fs::path> stack_dirs(const fs::path& dir) {
  if (fs::exists(dir / "manifest.json")) return {dir};
  std::vector<fs::path> out;
  if (fs::is_directory(dir))
    for (const auto& e : fs::directory_iterator(dir))
      if (e.is_directory() && fs::exists(e.path() / "manifest.json"))
        out.push_back(e.path());
  if (out.empty())
    throw fpm::InputError("no stack (manifest.json) under " + dir.string());
  std::sort(out.begin(), out.end());
  return out;
}

fs::path out_for(const fs::path& out, const fs::path& stack, bool batch) {
  return batch ? out / stack.filename() : out;
}

std::string segment_name(std::size_t i) {
  std::ostringstream s;
  s << "seg_" << std::setw(3) << std::setfill('0') << i;
  return s.str();
}

int cmd_simulate(const Options& o) {
  const fpm::RunConfig cfg = load(o);
  const fpm::ComplexField object = fpm::build_object(cfg);
  const fs::path out(o.out);
  if (cfg.segments.empty()) {
    const fpm::AcquisitionStack st =
        fpm::simulate_segment(cfg, object, cfg.segment, cfg.geometry.shift);
    fpm::io::write_stack(out, st, object);
    std::cout << "wrote " << st.images.size() << " images to " << out << "\n";
    return 0;
  }
  // Batch: one object per segment, offset seeds keep segments distinct.
  fpm::parallel_for(cfg.segments.size(), [&](std::size_t i) {
    const fpm::SegmentSpec& spec = cfg.segments[i];
    fpm::SegmentFrame seg = cfg.segment;
    seg.x0 = spec.x0;
    seg.y0 = spec.y0;
    const fpm::ComplexField obj = fpm::build_object(cfg, i);
    fpm::io::write_stack(out / segment_name(i),
                         fpm::simulate_segment(cfg, obj, seg, spec.shift), obj);
  });
  std::cout << "wrote " << cfg.segments.size() << " segments to " << out
            << "\n";
  return 0;
}

void write_run(const fs::path& dir, const fpm::MethodRun& run) {
  fs::create_directories(dir);
  fpm::io::write_field(dir, "object", run.object);
  fpm::io::write_field(dir, "pupil", run.pupil.mask);
  fpm::io::write_cost_csv(dir / "cost.csv", run.cost_history);
  if (run.correction) {
    fpm::io::write_trace_csv(dir / "trace.csv", run.correction->trace);
    fpm::io::write_json(dir / "correction.json",
                        fpm::io::to_json(*run.correction, "trace.csv"));
  }
}

Json run_summary(const fpm::MethodRun& run, const fpm::EvalReport& rep) {
  Json j;
  j["method"] = fpm::mode_name(run.mode);
  j["wall_time_s"] = run.wall_time;
  j["n_cost_evals"] = run.n_cost_evals;
  j["n_correction_syntheses"] = run.n_correction_syntheses;
  j["n_forward_syntheses"] = run.n_forward_syntheses;
  if (run.shift) j["shift_mm"] = {run.shift->dx * 1e3, run.shift->dy * 1e3};
  j["report"] = fpm::io::to_json(rep);
  return j;
}

int cmd_reconstruct(const Options& o) {
  const fpm::RunConfig cfg = load(o);
  const fpm::CorrectionMode mode = fpm::parse_correction_mode(o.correct);
  if (mode != fpm::CorrectionMode::kNone) require_seed(cfg);
  const std::vector<fs::path> dirs = stack_dirs(o.stack);
  const bool batch = dirs.size() > 1 || dirs[0] != fs::path(o.stack);
  const fpm::MethodSettings s = fpm::settings_from(cfg);
  fpm::parallel_for(dirs.size(), [&](std::size_t i) {
    const fpm::AcquisitionStack st = fpm::io::read_stack(dirs[i]);
    const fs::path out = out_for(o.out, dirs[i], batch);
    const fpm::MethodRun run = fpm::run_method(st, s, mode);
    write_run(out, run);
    const fpm::EvalReport rep =
        fpm::evaluate(run, st, fpm::io::read_truth(dirs[i]));
    fpm::io::write_json(out / "report.json", run_summary(run, rep));
  });
  std::cout << "reconstructed " << dirs.size() << " segment(s) into " << o.out
            << "\n";
  return 0;
}

int cmd_correct(const Options& o) {
  const fpm::RunConfig cfg = load(o);
  require_seed(cfg);
  const std::vector<fs::path> dirs = stack_dirs(o.stack);
  const bool batch = dirs.size() > 1 || dirs[0] != fs::path(o.stack);
  fpm::parallel_for(dirs.size(), [&](std::size_t i) {
    const fpm::AcquisitionStack st = fpm::io::read_stack(dirs[i]);
    const fs::path out = out_for(o.out, dirs[i], batch);
    fs::create_directories(out);
    const fpm::CorrectionResult c = fpm::mc_correct(
        st, st.segment, cfg.recon, cfg.annealer, cfg.inner_iters);
    fpm::io::write_trace_csv(out / "trace.csv", c.trace);
    Json j = fpm::io::to_json(c, "trace.csv");
    if (st.true_shift)
      j["shift_error_mm"] = {std::abs(c.shift.dx - st.true_shift->dx) * 1e3,
                             std::abs(c.shift.dy - st.true_shift->dy) * 1e3};
    fpm::io::write_json(out / "correction.json", j);
  });
  std::cout << "corrected " << dirs.size() << " segment(s) into " << o.out
            << "\n";
  return 0;
}

int cmd_bench(const Options& o) {
  const fpm::RunConfig cfg = load(o);
  require_seed(cfg);
  const fs::path dir = stack_dirs(o.stack).front();
  const fpm::AcquisitionStack st = fpm::io::read_stack(dir);
  if (!st.true_shift)
    throw fpm::InputError("bench needs a stack with a recorded true shift");
  const std::optional<fpm::ComplexField> truth = fpm::io::read_truth(dir);
  const fpm::MethodSettings s = fpm::settings_from(cfg);

  const fpm::CorrectionMode modes[] = {
      fpm::CorrectionMode::kNone, fpm::CorrectionMode::kPerLedSa,
      fpm::CorrectionMode::kMcFpm, fpm::CorrectionMode::kMcFpmLocal};
  const fs::path out(o.out);
  fs::create_directories(out);
  std::ofstream csv(out / "bench.csv");
  csv << "method,wall_time_s,n_cost_evals,n_correction_syntheses,"
         "n_forward_syntheses,rmse_amplitude,rel_rmse_amplitude,rmse_phase,"
         "final_data_misfit,shift_error_x_mm,shift_error_y_mm,disorder_mm\n";
  csv << std::setprecision(10);
  Json rows = Json::array();
  double t_mc = 0, t_sa = 0;
  std::size_t n_mc = 0, n_sa = 0, mc_evals = 0;
  for (fpm::CorrectionMode mode : modes) {
    const fpm::MethodRun run = fpm::run_method(st, s, mode);
    const fpm::EvalReport rep = fpm::evaluate(run, st, truth);
    csv << fpm::mode_name(mode) << ',' << run.wall_time << ','
        << run.n_cost_evals << ',' << run.n_correction_syntheses << ','
        << run.n_forward_syntheses << ',' << rep.rmse_amplitude << ','
        << rep.rel_rmse_amplitude << ',' << rep.rmse_phase << ','
        << rep.final_data_misfit << ',';
    if (rep.shift_error)
      csv << rep.shift_error->dx * 1e3 << ',' << rep.shift_error->dy * 1e3;
    else
      csv << ',';
    csv << ',' << run.disorder * 1e3 << '\n';
    rows.push_back(run_summary(run, rep));
    if (mode == fpm::CorrectionMode::kMcFpm) {
      t_mc = run.wall_time;
      n_mc = run.n_correction_syntheses;
      mc_evals = run.n_cost_evals;
    }
    if (mode == fpm::CorrectionMode::kPerLedSa) {
      t_sa = run.wall_time;
      n_sa = run.n_correction_syntheses;
    }
    std::cout << fpm::mode_name(mode) << ": " << run.wall_time << " s\n";
  }
  const int r2 = fpm::bright_field_set(st.geometry, st.objective_na,
                                       st.segment).side;
  Json j;
  j["stack"] = dir.string();
  j["methods"] = rows;
  j["accounting_ok"] =
      n_mc == mc_evals * std::size_t(r2 * r2 * cfg.inner_iters);
  fpm::io::write_json(out / "bench.json", j);

  if (o.assert_order) {
    if (!(t_mc < t_sa))
      throw AssertionFailure("wall_time(mcfpm) >= wall_time(sa)");
    if (!(n_mc < n_sa))
      throw AssertionFailure("n_forward_syntheses(mcfpm) >= (sa)");
    if (!j["accounting_ok"].get<bool>())
      throw AssertionFailure("mcfpm synthesis count != evals * R2^2 * J");
  }
  return 0;
}

fpm::ComplexField read_result(const fs::path& dir, fpm::Index n,
                              double pitch) {
  const fpm::RealGrid<double> amp =
      fpm::io::read_f64(dir / "object_amplitude.f64", n, n);
  const fpm::RealGrid<double> phase =
      fpm::io::read_f64(dir / "object_phase.f64", n, n);
  fpm::ComplexGrid<double> data(n, n);
  for (fpm::Index i = 0; i < data.size(); ++i)
    data(i) = std::polar(amp(i), phase(i));
  return {std::move(data), pitch};
}

int cmd_evaluate(const Options& o) {
  const fs::path dir = stack_dirs(o.stack).front();
  const fpm::AcquisitionStack st = fpm::io::read_stack(dir);
  const std::optional<fpm::ComplexField> truth = fpm::io::read_truth(dir);
  if (!truth) throw fpm::InputError("stack " + dir.string() + " has no truth");
  const fs::path res(o.result);
  const fpm::ComplexField recon =
      read_result(res, truth->rows(), truth->pitch);
  fpm::EvalReport rep = fpm::make_report(
      fpm::compare_fields(recon, *truth), 0.0);
  if (fs::exists(res / "cost.csv")) {
    std::ifstream in(res / "cost.csv");
    std::string line, last;
    while (std::getline(in, line))
      if (!line.empty()) last = line;
    const auto comma = last.find(',');
    if (comma != std::string::npos && last.rfind("iter", 0) != 0)
      rep.final_data_misfit = std::stod(last.substr(comma + 1));
  }
  if (fs::exists(res / "correction.json") && st.true_shift) {
    const Json c = fpm::io::read_json(res / "correction.json");
    const double dx = c["shift_m"][0].get<double>();
    const double dy = c["shift_m"][1].get<double>();
    rep.shift_error = fpm::Shift2{std::abs(dx - st.true_shift->dx),
                                  std::abs(dy - st.true_shift->dy)};
  }
  const Json j = fpm::io::to_json(rep);
  fpm::io::write_json(o.out.empty() ? res / "evaluation.json" : fs::path(o.out),
                      j);
  std::cout << j.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fourier ptychographic reconstruction with LED misalignment "
               "correction"};
  app.require_subcommand(1);
  Options o;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "RunConfig JSON")
        ->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "annealer and noise seed");
  };

  CLI::App* sim = app.add_subcommand("simulate", "write a synthetic stack");
  common(sim);
  sim->add_option("--out", o.out, "output directory")->required();

  CLI::App* rec = app.add_subcommand("reconstruct",
                                     "reconstruct a stack or batch");
  common(rec);
  rec->add_option("--stack", o.stack, "stack or batch directory")->required();
  rec->add_option("--out", o.out, "output directory")->required();
  rec->add_option("--correct", o.correct, "none|mcfpm|sa|mcfpm+local");

  CLI::App* cor = app.add_subcommand("correct", "global-shift search only");
  common(cor);
  cor->add_option("--stack", o.stack, "stack or batch directory")->required();
  cor->add_option("--out", o.out, "output directory")->required();

  CLI::App* bench = app.add_subcommand("bench", "compare all four methods");
  common(bench);
  bench->add_option("--stack", o.stack, "stack directory")->required();
  bench->add_option("--out", o.out, "output directory")->required();
  bench->add_flag("--assert-order", o.assert_order,
                  "exit 4 unless mcfpm beats sa on time and syntheses");

  CLI::App* ev = app.add_subcommand("evaluate",
                                    "score a reconstruction against truth");
  common(ev);
  ev->add_option("--stack", o.stack, "stack directory")->required();
  ev->add_option("--result", o.result, "reconstruct output directory")
      ->required();
  ev->add_option("--out", o.out, "report path (default RESULT/evaluation.json)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (*sim) return cmd_simulate(o);
    if (*rec) return cmd_reconstruct(o);
    if (*cor) return cmd_correct(o);
    if (*bench) return cmd_bench(o);
    if (*ev) return cmd_evaluate(o);
  } catch (const AssertionFailure& e) {
    std::cerr << "assertion failed: " << e.what() << "\n";
    return kExitAssert;
  } catch (const fpm::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const fpm::Error& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitConfig;
}
