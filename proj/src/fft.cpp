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

#include <map>
#include <mutex>
#include <tuple>

#include "fpm/field.hpp"

#ifdef FPM_HAVE_FFTW
#include <fftw3.h>
#endif

namespace fpm::detail {

#ifdef FPM_HAVE_FFTW

namespace {

// Plans are created once per (shape, direction, alignment) and executed
// through the new-array interface. FFTW_ESTIMATE keeps the chosen algorithm,
// and hence every rounding, identical from one process to the next.
class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(int n0, int n1, bool inverse, int alignment) {
    const auto key = std::make_tuple(n0, n1, inverse, alignment);
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    unsigned flags = FFTW_ESTIMATE;
    if (alignment != 0) flags |= FFTW_UNALIGNED;
    auto* buf = static_cast<fftw_complex*>(
        fftw_malloc(sizeof(fftw_complex) * std::size_t(n0) * std::size_t(n1)));
    fftw_plan plan = fftw_plan_dft_2d(n0, n1, buf, buf,
                                      inverse ? FFTW_BACKWARD : FFTW_FORWARD,
                                      flags);
    fftw_free(buf);
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<std::tuple<int, int, bool, int>, fftw_plan> plans_;
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

}  // namespace

void fft2_inplace(ComplexGrid<double>& grid, bool inverse) {
  // Column-major rows x cols is row-major cols x rows.
  auto* data = reinterpret_cast<fftw_complex*>(grid.data());
  const int alignment = fftw_alignment_of(reinterpret_cast<double*>(data));
  fftw_plan plan = plan_cache().get(int(grid.cols()), int(grid.rows()),
                                    inverse, alignment);
  fftw_execute_dft(plan, data, data);
}

#else

void fft2_inplace(ComplexGrid<double>& grid, bool inverse) {
  fft2_inplace<double>(grid, inverse);
}

#endif

}  // namespace fpm::detail
