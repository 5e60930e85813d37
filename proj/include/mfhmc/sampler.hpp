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

#ifndef MFHMC_SAMPLER_HPP
#define MFHMC_SAMPLER_HPP

#include <cstdint>
#include <optional>

#include "mfhmc/rng.hpp"
#include "mfhmc/targets.hpp"
#include "mfhmc/types.hpp"

namespace mfhmc {

/// Draws dim i.i.d. standard normals for the fictitious momentum.
StateVector sample_momentum(CounterRng& rng, Eigen::Index dim);

/// Leapfrog integration of Hamiltonian dynamics for the potential U whose
/// gradient is grad_u: initial half-kick, then L-1 drift/kick pairs, a final
/// drift and half-kick, and a momentum negation that makes the proposal map
/// symmetric. Calls grad_u exactly n_leapfrog+1 times.
///
/// Throws IntegrationError (with the offending gradient-call index) if a
/// gradient comes back non-finite.
PhasePoint leapfrog_trajectory(const PhasePoint& start, double epsilon, int n_leapfrog,
                               const GradientFn& grad_u);

struct HmcStepResult {
  StateVector next;
  bool accepted = false;
  double delta_h = 0.0;
  double log_density_next = 0.0;  // target log-density at `next`
};

/// One HMC transition: momentum draw, leapfrog trajectory, accept with
/// probability min(1, exp(-delta_H)). A non-finite proposal density is an
/// ordinary rejection (delta_H = +inf). `current_log_density` lets the chain
/// runner reuse the cached value, so each step costs one fresh density
/// evaluation and n_leapfrog+1 gradient calls.
///
/// Randomness comes from the (config.seed, iteration) substreams; see
/// RngStream for the order of use.
HmcStepResult hmc_step(const StateVector& current, double current_log_density,
                       const DifferentiableTarget& target, const KernelConfig& config,
                       std::uint64_t iteration);

/// Convenience overload that evaluates the current log-density itself.
HmcStepResult hmc_step(const StateVector& current, const DifferentiableTarget& target,
                       const KernelConfig& config, std::uint64_t iteration = 0);

struct MfhmcStepResult {
  StateVector next;
  bool stage1_accepted = false;
  bool stage2_accepted = false;
  double hf_log_density_next = 0.0;  // cache to carry into the next iteration
  double lf_log_density_next = 0.0;
  int hf_evaluations = 0;            // 1 iff stage 1 accepted, else 0
  double stage1_delta_h = 0.0;
};

/// Log of the stage-2 acceptance probability (before the min with 1):
/// the high-fidelity posterior ratio corrected by the inverse low-fidelity
/// ratio. Kinetic terms cancel because both stages share the momentum
/// distribution.
double mfhmc_stage2_log_alpha(double hf_proposal, double hf_current, double lf_current,
                              double lf_proposal);

/// One two-stage MFHMC transition. Stage 1 is a full HMC step against the
/// low-fidelity posterior only. On stage-1 rejection the step ends with zero
/// high-fidelity work. On stage-1 acceptance the high-fidelity density is
/// evaluated once at the proposal and the move is kept with probability
/// min(1, exp(mfhmc_stage2_log_alpha(...))). A non-finite high-fidelity value
/// at the proposal rejects.
///
/// `cached_hf_log_density` must equal the HF log-density at `current`; the
/// chain runner maintains it so retained states are never re-evaluated.
MfhmcStepResult mfhmc_step(const StateVector& current, const DualFidelityTarget& target,
                           const KernelConfig& config, std::uint64_t iteration,
                           double cached_hf_log_density,
                           std::optional<double> cached_lf_log_density = std::nullopt);

/// Runs an HMC chain for config.n_steps iterations (or until `hf_budget`
/// units of HF work are consumed, counting 2L per iteration). Burn-in is not
/// discarded here; diagnostics apply the fraction.
ChainRecord run_hmc_chain(const DifferentiableTarget& target, const StateVector& start,
                          const KernelConfig& config,
                          std::optional<std::uint64_t> hf_budget = std::nullopt);

/// Runs an MFHMC chain; `hf_budget` counts HF density evaluations, including
/// the one spent on the start state.
ChainRecord run_mfhmc_chain(const DualFidelityTarget& target, const StateVector& start,
                            const KernelConfig& config,
                            std::optional<std::uint64_t> hf_budget = std::nullopt);

}  // namespace mfhmc

#endif  // MFHMC_SAMPLER_HPP
