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

#include "mfhmc/experiments.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "doctest.h"

using namespace mfhmc;

namespace {

SweepSpec tiny_sweep() {
  SweepSpec spec;
  spec.budgets = {300, 800};
  spec.trajectory_grid = {{0.15, 8}};
  spec.gammas = {0.0, 1e-3};
  spec.n_seeds = 2;
  return spec;
}

}  // namespace

TEST_CASE("sweep spec validation") {
  SweepSpec spec = tiny_sweep();
  spec.budgets = {500, 500};
  CHECK_THROWS_WITH_AS(spec.validate(), doctest::Contains("increasing"), Error);
  spec.budgets = {};
  CHECK_THROWS_AS(spec.validate(), Error);
  spec = tiny_sweep();
  spec.n_seeds = 0;
  CHECK_THROWS_AS(spec.validate(), Error);
}

TEST_CASE("mvn experiment: gamma 0 accepts every evaluated proposal at every budget") {
  SweepSpec spec = tiny_sweep();
  const auto cells = run_mvn_experiment(spec, 8, 12, 101, 2);
  bool saw_gamma0 = false;
  for (const auto& c : cells) {
    if (c.algorithm != "mfhmc" || c.gamma != 0.0) continue;
    saw_gamma0 = true;
    CHECK(c.stage2_acceptance == 1.0);  // degenerate fidelity
  }
  CHECK(saw_gamma0);
}

TEST_CASE("mvn experiment: budget accounting within the stated overshoot") {
  SweepSpec spec = tiny_sweep();
  const auto cells = run_mvn_experiment(spec, 6, 9, 55, 2);
  for (const auto& c : cells) {
    if (c.algorithm == "mfhmc") {
      CHECK(c.report.n_hf_total >= c.budget);
      CHECK(c.report.n_hf_total <= c.budget + 1);
    } else {
      CHECK(c.report.n_hf_total >= c.budget);
      CHECK(c.report.n_hf_total < c.budget + 2ull * static_cast<std::uint64_t>(c.n_leapfrog));
    }
  }
}

TEST_CASE("a closer surrogate raises stage-2 acceptance and lowers the error") {
  SweepSpec spec;
  spec.budgets = {4000};
  spec.trajectory_grid = {{0.15, 10}};
  spec.gammas = {2.0, 1e-7};  // genuinely coarse vs near-exact surrogate
  spec.n_seeds = 4;
  const auto cells = run_mvn_experiment(spec, 12, 16, 404, 2);

  double acc_coarse = 0, acc_fine = 0, err_coarse = 0, err_fine = 0;
  for (const auto& c : cells) {
    if (c.algorithm != "mfhmc") continue;
    (c.gamma == 2.0 ? acc_coarse : acc_fine) += c.stage2_acceptance / spec.n_seeds;
    (c.gamma == 2.0 ? err_coarse : err_fine) += c.rel_err_pct() / spec.n_seeds;
  }
  CHECK(acc_fine > acc_coarse);
  CHECK(err_fine < err_coarse);
}

TEST_CASE("mvn experiment cells are deterministic given (seed0, spec)") {
  SweepSpec spec = tiny_sweep();
  spec.budgets = {300};
  spec.gammas = {1e-3};
  spec.n_seeds = 1;
  const auto a = run_mvn_experiment(spec, 5, 8, 7, 2);
  const auto b = run_mvn_experiment(spec, 5, 8, 7, 1);  // worker count must not matter
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].algorithm == b[i].algorithm);
    CHECK(a[i].report.ess_per_hf == b[i].report.ess_per_hf);
    CHECK(a[i].rel_err_pct() == b[i].rel_err_pct());
  }
}

TEST_CASE("mvn cells csv carries one row per cell and recomputable averages") {
  SweepSpec spec = tiny_sweep();
  const auto cells = run_mvn_experiment(spec, 6, 9, 313, 2);
  const auto path = std::filesystem::temp_directory_path() / "mfhmc_mvn_cells.csv";
  write_mvn_cells_csv(cells, path);

  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header ==
        "algorithm,gamma_or_modes,epsilon,L,budget,seed,accepted_per_hf,ess_per_hf,"
        "esjd_per_hf,rel_err_pct,coverage95,n_hf");
  std::size_t rows = 0;
  std::map<std::string, std::pair<double, int>> sums;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++rows;
    // parse algorithm + gamma + budget as the key, ess as value
    std::vector<std::string> f;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    REQUIRE(f.size() == 12);
    auto& [sum, count] = sums[f[0] + "," + f[1] + "," + f[4]];
    sum += std::stod(f[7]);
    ++count;
  }
  CHECK(rows == cells.size());

  // Seed averages recomputed from the CSV match averages over the cells.
  for (const auto& [key, sc] : sums) {
    double expect = 0.0;
    int n = 0;
    for (const auto& c : cells) {
      char gamma_buf[40];
      std::snprintf(gamma_buf, sizeof gamma_buf, "%.17g", c.gamma);
      const std::string k = c.algorithm + "," + gamma_buf + "," + std::to_string(c.budget);
      if (k == key) {
        expect += c.report.ess_per_hf;
        ++n;
      }
    }
    REQUIRE(n == sc.second);
    CHECK(sc.first / sc.second == doctest::Approx(expect / n).epsilon(1e-12));
  }
  std::filesystem::remove(path);
}

TEST_CASE("heat experiment at desk scale: degenerate surrogate accepts everything") {
  HeatExperimentSpec spec;
  spec.op.grid_n = 8;  // 64 unknowns
  spec.op.n_time_steps = 20;
  spec.epsilon = 0.05;
  spec.n_leapfrog = 5;
  spec.n_steps = 400;
  spec.n_seeds = 2;
  spec.modes = {16, 64};
  const auto cells = run_heat_experiment(spec, 2027, 2);

  // one hmc row + two mfhmc rows per seed
  CHECK(cells.size() == 6);
  for (const auto& c : cells) {
    if (c.algorithm == "hmc") {
      CHECK(c.modes == 64);
      CHECK(std::isnan(c.lf_acceptance));
      CHECK(c.n_hf == 2ull * 5 * 400);
      continue;
    }
    // n_hf = 1 + stage-1 acceptances (lf_acceptance * m recovers the count)
    CHECK(c.n_hf == 1 + static_cast<std::uint64_t>(std::llround(c.lf_acceptance * 400)));
    if (c.modes == 64) {
      // full rank: the surrogate is the forward map itself
      CHECK(c.hf_acceptance == 1.0);
      CHECK(c.n_rejected_hf == 0);
    } else {
      CHECK(c.hf_acceptance > 0.3);
    }
    CHECK(c.report.accepted_per_hf <= 1.0);
  }

  const auto path = std::filesystem::temp_directory_path() / "mfhmc_heat_summary.csv";
  write_heat_summary_csv(cells, path);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header ==
        "algorithm,modes,seed,lf_acceptance,hf_acceptance,n_hf,n_rejected_hf,"
        "mean_rel_err_pct,coverage95");
  std::size_t rows = 0;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  CHECK(rows == cells.size());
  std::filesystem::remove(path);
}

TEST_CASE("heat experiment rejects out-of-range modes") {
  HeatExperimentSpec spec;
  spec.op.grid_n = 4;
  spec.modes = {17};
  CHECK_THROWS_WITH_AS(spec.validate(), doctest::Contains("modes"), Error);
}
