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

#include "doctest.h"
#include "fpm/anneal.hpp"
#include "fpm/error.hpp"

using namespace fpm;

namespace {

AnnealerConfig unit_box(std::uint64_t seed) {
  AnnealerConfig c;
  c.bounds = {{-1, 1}, {-1, 1}};
  c.seed = seed;
  return c;
}

}  // namespace

TEST_CASE("quadratic bowl: the optimum is found for most seeds") {
  const Eigen::Vector2d target(0.3, -0.4);
  const CostFunction bowl = [&](const Eigen::VectorXd& v) {
    return (v - target).squaredNorm();
  };
  int hits = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const AnnealResult r = sa_minimize(bowl, Eigen::Vector2d::Zero(), unit_box(seed));
    if ((r.best - target).cwiseAbs().maxCoeff() <= 0.05) ++hits;
  }
  CHECK(hits >= 9);
}

TEST_CASE("flat cost stops by the tolerance rule at the start point") {
  AnnealerConfig c = unit_box(3);
  const AnnealResult r = sa_minimize(
      [](const Eigen::VectorXd&) { return 2.0; }, Eigen::Vector2d(0.1, 0.2), c);
  CHECK(r.converged);
  CHECK(int(r.trace.size()) - 1 <= c.window + 1);
  CHECK(r.best == Eigen::Vector2d(0.1, 0.2));
  CHECK(r.best_cost == 2.0);
}

TEST_CASE("every candidate lies in the box") {
  AnnealerConfig c;
  c.bounds = {{-0.01, 0.02}, {3, 4}};
  c.seed = 11;
  c.step_scale = 5.0;  // proposals overshoot constantly
  const AnnealResult r = sa_minimize(
      [](const Eigen::VectorXd& v) { return std::sin(100 * v(0)) + 2 + v(1); },
      Eigen::Vector2d(0, 3.5), c);
  for (const AnnealStep& s : r.trace) {
    CHECK(s.candidate(0) >= -0.01);
    CHECK(s.candidate(0) <= 0.02);
    CHECK(s.candidate(1) >= 3);
    CHECK(s.candidate(1) <= 4);
  }
  CHECK(int(r.trace.size()) <= c.max_iters + 1);
}

TEST_CASE("best point is the lowest evaluated cost") {
  const CostFunction f = [](const Eigen::VectorXd& v) {
    return std::abs(v(0) - 0.7) + std::abs(v(1) + 0.2) + 0.1 * std::cos(40 * v(0));
  };
  const AnnealResult r = sa_minimize(f, Eigen::Vector2d::Zero(), unit_box(5));
  double lowest = r.trace.front().cost;
  for (const AnnealStep& s : r.trace) lowest = std::min(lowest, s.cost);
  CHECK(r.best_cost == lowest);
  CHECK(f(r.best) == r.best_cost);
}

TEST_CASE("deterministic for a fixed seed") {
  const CostFunction f = [](const Eigen::VectorXd& v) { return v.squaredNorm() + 1; };
  const AnnealResult a = sa_minimize(f, Eigen::Vector2d(0.5, 0.5), unit_box(9));
  const AnnealResult b = sa_minimize(f, Eigen::Vector2d(0.5, 0.5), unit_box(9));
  REQUIRE(a.trace.size() == b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i)
    CHECK(a.trace[i].candidate == b.trace[i].candidate);
}

TEST_CASE("errors") {
  AnnealerConfig c = unit_box(1);
  CHECK_THROWS_AS(sa_minimize([](const Eigen::VectorXd&) { return NAN; },
                              Eigen::Vector2d::Zero(), c),
                  InputError);
  c.bounds = {{1, -1}, {0, 1}};
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = unit_box(1);
  c.cooling_rate = 1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = unit_box(1);
  c.tol = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}
