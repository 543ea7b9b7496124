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

#include "fpm/anneal.hpp"

#include <cmath>
#include <deque>
#include <random>

#include "fpm/error.hpp"

namespace fpm {

void AnnealerConfig::validate() const {
  if (bounds.empty()) throw ConfigError("annealer needs at least one bound");
  for (const auto& [lo, hi] : bounds)
    if (!(lo < hi)) throw ConfigError("annealer bounds need lo < hi");
  if (!(cooling_rate > 0 && cooling_rate < 1))
    throw ConfigError("cooling_rate must lie in (0, 1)");
  if (!(tol > 0)) throw ConfigError("tol must be positive");
  if (!(initial_temperature > 0))
    throw ConfigError("initial_temperature must be positive");
  if (!(step_scale > 0)) throw ConfigError("step_scale must be positive");
  if (max_iters < 0 || window < 1)
    throw ConfigError("max_iters must be >= 0 and window >= 1");
}

AnnealResult sa_minimize(const CostFunction& cost, const Eigen::VectorXd& start,
                         const AnnealerConfig& cfg) {
  cfg.validate();
  const Eigen::Index dims = Eigen::Index(cfg.bounds.size());
  if (start.size() != dims)
    throw ConfigError("annealer start point and bounds differ in dimension");

  Eigen::VectorXd lo(dims), hi(dims);
  for (Eigen::Index i = 0; i < dims; ++i) {
    lo(i) = cfg.bounds[std::size_t(i)].first;
    hi(i) = cfg.bounds[std::size_t(i)].second;
  }
  const Eigen::VectorXd range = hi - lo;

  AnnealResult out;
  Eigen::VectorXd x = start.cwiseMax(lo).cwiseMin(hi);
  const double c0 = cost(x);
  if (!std::isfinite(c0)) throw InputError("annealer start cost is not finite");
  const double norm = c0 > 0 ? c0 : 1.0;
  double fx = c0 / norm;
  out.best = x;
  out.best_cost = c0;
  out.trace.push_back({x, c0, true});

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::deque<double> changes;
  double previous_candidate = fx;
  double temperature = cfg.initial_temperature;

  for (int it = 0; it < cfg.max_iters; ++it) {
    const double sigma_scale =
        cfg.step_scale * temperature / cfg.initial_temperature;
    Eigen::VectorXd y(dims);
    for (Eigen::Index i = 0; i < dims; ++i)
      y(i) = x(i) + sigma_scale * range(i) * gauss(rng);
    y = y.cwiseMax(lo).cwiseMin(hi);

    const double cy = cost(y);
    const double fy = cy / norm;
    const double delta = fy - fx;
    // The uniform draw is consumed every iteration so traces depend only on
    // the seed and the cost values.
    const double u = unif(rng);
    const bool accept =
        std::isfinite(fy) && (delta <= 0 || u < std::exp(-delta / temperature));
    out.trace.push_back({y, cy, accept});
    if (std::isfinite(cy) && cy < out.best_cost) {
      out.best = y;
      out.best_cost = cy;
    }
    if (accept) {
      x = y;
      fx = fy;
    }
    temperature *= cfg.cooling_rate;

    // Change between consecutive candidates. A rejected run leaves the
    // current cost fixed, so measuring that would stop on any plateau of
    // rejections.
    const double change =
        std::isfinite(fy) ? std::abs(fy - previous_candidate) : 1.0;
    if (std::isfinite(fy)) previous_candidate = fy;
    changes.push_back(change);
    if (int(changes.size()) > cfg.window) changes.pop_front();
    if (int(changes.size()) == cfg.window) {
      double mean = 0.0;
      for (double c : changes) mean += c;
      mean /= double(cfg.window);
      if (mean < cfg.tol) {
        out.converged = true;
        break;
      }
    }
  }
  return out;
}

}  // namespace fpm
