// Copyright 2026 the mfhmc authors
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

#include "mfhmc/rng.hpp"

#include <cmath>

#include "doctest.h"
#include "mfhmc/sampler.hpp"

using namespace mfhmc;

TEST_CASE("same key reproduces the same stream") {
  CounterRng a(42, 0, RngStream::momentum);
  CounterRng b(42, 0, RngStream::momentum);
  Eigen::VectorXd va = sample_momentum(a, 3);
  Eigen::VectorXd vb = sample_momentum(b, 3);
  CHECK(va == vb);

  CounterRng c(43, 0, RngStream::momentum);
  CHECK(sample_momentum(c, 3) != va);
}

TEST_CASE("streams with different purposes are distinct") {
  CounterRng a(42, 7, RngStream::stage1);
  CounterRng b(42, 7, RngStream::stage2);
  CHECK(a.uniform01() != b.uniform01());
}

TEST_CASE("uniform01 stays in [0,1)") {
  CounterRng rng(1234, 0, RngStream::generic);
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("momentum draws are standard normal") {
  const int n = 100000;
  CounterRng rng(42, 0, RngStream::momentum);
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    sum_sq += z * z;
  }
  const double mean = sum / n;
  const double var = sum_sq / n - mean * mean;
  CHECK(std::abs(mean) < 0.02);
  CHECK(std::abs(var - 1.0) < 0.03);
}

TEST_CASE("per-coordinate moments of sample_momentum") {
  const int draws = 20000;
  const int dim = 5;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd sum_sq = Eigen::VectorXd::Zero(dim);
  for (int i = 0; i < draws; ++i) {
    CounterRng rng(99, static_cast<std::uint64_t>(i), RngStream::momentum);
    Eigen::VectorXd z = sample_momentum(rng, dim);
    sum += z;
    sum_sq += z.cwiseProduct(z);
  }
  for (int d = 0; d < dim; ++d) {
    CHECK(std::abs(sum[d] / draws) < 0.03);
    CHECK(std::abs(sum_sq[d] / draws - 1.0) < 0.05);
  }
}

TEST_CASE("derive_seed separates indices") {
  CHECK(derive_seed(7, 0) != derive_seed(7, 1));
  CHECK(derive_seed(7, 0) == derive_seed(7, 0));
}
