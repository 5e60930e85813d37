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

#ifndef MFHMC_EXPERIMENTS_HPP
#define MFHMC_EXPERIMENTS_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "mfhmc/diagnostics.hpp"
#include "mfhmc/forward_models.hpp"
#include "mfhmc/types.hpp"

namespace mfhmc {

/// Grid for the ill-conditioned MVN budget study: HMC and MFHMC chains run
/// until each HF-evaluation cap is exhausted (2L units per HMC iteration,
/// one unit per stage-1 acceptance for MFHMC), for every trajectory (eps, L),
/// gamma, and seed.
struct SweepSpec {
  std::vector<std::uint64_t> budgets = {10000, 20000, 30000, 40000, 50000};
  std::vector<std::pair<double, int>> trajectory_grid = {{0.05, 10}, {0.1, 25}, {0.1, 50}};
  std::vector<double> gammas = {1e-4, 1e-5, 1e-6, 1e-7};
  int n_seeds = 5;
  double burn_in_frac = 0.25;

  void validate() const {
    if (budgets.empty()) throw Error("sweep: budgets must be non-empty");
    for (std::size_t i = 0; i + 1 < budgets.size(); ++i)
      if (budgets[i + 1] <= budgets[i]) throw Error("sweep: budgets must be strictly increasing");
    if (budgets.front() == 0) throw Error("sweep: budgets must be positive");
    if (trajectory_grid.empty()) throw Error("sweep: trajectory grid must be non-empty");
    if (n_seeds < 1) throw Error("sweep: n-seeds must be >= 1");
  }
};

struct MvnCell {
  std::string algorithm;  // "hmc" or "mfhmc"
  double gamma = 0.0;     // NaN for hmc cells
  double epsilon = 0.0;
  int n_leapfrog = 0;
  std::uint64_t budget = 0;
  std::uint64_t seed = 0;
  double stage2_acceptance = 0.0;  // acceptance per evaluated HF proposal
  DiagnosticsReport report;

  /// The study's accuracy metric: covariance error against A_HF^{-1}.
  double rel_err_pct() const { return report.rel_error_cov_pct.value_or(0.0); }
};

/// Runs the full sweep against one Wishart draw A_HF = Wishart(I, dof) keyed
/// by seed0. Chain seeds are seed0+1 ... seed0+n_seeds, shared across cells
/// so that larger budgets extend smaller ones.
std::vector<MvnCell> run_mvn_experiment(const SweepSpec& spec, int dim, int dof,
                                        std::uint64_t seed0, int n_workers = 0);

/// Conjugate heat-inversion study: one measured field, an analytic posterior
/// as ground truth, an HMC baseline on the high-fidelity posterior, and one
/// MFHMC run per TSVD surrogate rank, n_seeds chains each.
struct HeatExperimentSpec {
  HeatOperatorSpec op;
  double sigma_noise = 0.1;
  double sigma_prior = 0.1;
  double epsilon = 0.0375;  // ~0.6-0.75 acceptance on the default 32x32 problem
  int n_leapfrog = 10;
  std::int64_t n_steps = 20000;
  double burn_in_frac = 0.25;
  int n_seeds = 5;
  std::vector<int> modes = {25, 50, 75, 100, 200};
  bool include_hmc = true;
  Eigen::VectorXd x_true;  // empty -> default_true_field(op.grid_n)

  void validate() const {
    op.validate();
    if (!(sigma_noise > 0.0) || !(sigma_prior > 0.0))
      throw Error("heat experiment: sigmas must be > 0");
    if (n_seeds < 1) throw Error("heat experiment: n-seeds must be >= 1");
    for (int k : modes)
      if (k < 1 || k > op.dim())
        throw Error("heat experiment: modes value " + std::to_string(k) + " outside [1, " +
                    std::to_string(op.dim()) + "]");
  }
};

struct HeatCell {
  std::string algorithm;
  int modes = 0;  // retained TSVD modes; full dimension for the hmc baseline
  std::uint64_t seed = 0;
  double lf_acceptance = 0.0;  // NaN for hmc
  double hf_acceptance = 0.0;  // stage-2 accepts per HF-evaluated proposal
  std::uint64_t n_hf = 0;      // HF work (density evaluations; 2Lm for hmc)
  std::uint64_t n_rejected_hf = 0;
  DiagnosticsReport report;

  double rel_err_pct() const { return report.rel_error_mean_pct; }
};

std::vector<HeatCell> run_heat_experiment(const HeatExperimentSpec& spec, std::uint64_t seed0,
                                          int n_workers = 0);

/// Per-cell CSV shared by both studies:
/// "algorithm,gamma_or_modes,epsilon,L,budget,seed,accepted_per_hf,
///  ess_per_hf,esjd_per_hf,rel_err_pct,coverage95,n_hf".
void write_mvn_cells_csv(const std::vector<MvnCell>& cells, const std::filesystem::path& path);
void write_heat_cells_csv(const std::vector<HeatCell>& cells, double epsilon, int n_leapfrog,
                          const std::filesystem::path& path);

/// Table-style CSV mirroring the heat study's comparison columns.
void write_heat_summary_csv(const std::vector<HeatCell>& cells,
                            const std::filesystem::path& path);

}  // namespace mfhmc

#endif  // MFHMC_EXPERIMENTS_HPP
