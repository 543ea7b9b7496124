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

// Bounded simulated annealing over a small real vector.

#ifndef FPM_ANNEAL_HPP_
#define FPM_ANNEAL_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

namespace fpm {

struct AnnealerConfig {
  std::vector<std::pair<double, double>> bounds;  // [lo, hi] per dimension
  double initial_temperature = 0.01;  // normalised-cost units
  double cooling_rate = 0.97;
  double step_scale = 0.25;  // proposal sigma as a fraction of the range at T0
  double tol = 1e-3;  // windowed mean |change| between candidate costs
  int max_iters = 100;
  int window = 10;
  std::uint64_t seed = 0;

  void validate() const;
};

struct AnnealStep {
  Eigen::VectorXd candidate;
  double cost = 0.0;  // raw, not normalised
  bool accepted = false;
};

struct AnnealResult {
  Eigen::VectorXd best;
  double best_cost = 0.0;
  std::vector<AnnealStep> trace;  // trace[0] is the start point
  bool converged = false;         // stopped by the tolerance rule
};

using CostFunction = std::function<double(const Eigen::VectorXd&)>;

// Gaussian proposals with sigma = step_scale * range * T / T0, clipped to the
// box; Metropolis acceptance on the cost normalised by its value at `start`;
// geometric cooling. Stops after max_iters proposals or once the normalised
// cost changes by less than tol on average between consecutive candidates
// over the last `window` proposals. Returns the best point ever evaluated.
// Throws InputError if the cost at `start` is not finite.
AnnealResult sa_minimize(const CostFunction& cost, const Eigen::VectorXd& start,
                         const AnnealerConfig& cfg);

}  // namespace fpm

#endif  // FPM_ANNEAL_HPP_
