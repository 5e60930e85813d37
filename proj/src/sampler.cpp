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

#include "mfhmc/sampler.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace mfhmc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool accept_with_log_prob(double log_alpha, CounterRng& rng) {
  // log(u) < log_alpha with u in [0,1); u == 0 maps to -inf and accepts
  // whenever log_alpha > -inf.
  const double u = rng.uniform01();
  return std::log(u) < log_alpha;
}

}  // namespace

StateVector sample_momentum(CounterRng& rng, Eigen::Index dim) {
  if (dim < 1) throw Error("sample_momentum: dim must be >= 1");
  return rng.normal_vector(dim);
}

PhasePoint leapfrog_trajectory(const PhasePoint& start, double epsilon, int n_leapfrog,
                               const GradientFn& grad_u) {
  if (!(epsilon > 0.0)) throw Error("leapfrog: epsilon must be > 0");
  if (n_leapfrog < 1) throw Error("leapfrog: n_leapfrog must be >= 1");
  if (start.position.size() != start.momentum.size())
    throw Error("leapfrog: position and momentum lengths differ");

  int call_index = 0;
  auto kick = [&](const StateVector& x, double step, StateVector& xi) {
    StateVector g = grad_u(x);
    if (!g.allFinite())
      throw IntegrationError(
          "leapfrog: non-finite gradient at gradient call " + std::to_string(call_index),
          call_index);
    ++call_index;
    xi -= step * g;
  };

  StateVector x = start.position;
  StateVector xi = start.momentum;

  // half-step update of xi
  kick(x, 0.5 * epsilon, xi);
  for (int l = 1; l <= n_leapfrog - 1; ++l) {
    // full-step update of x, then of xi
    x += epsilon * xi;
    kick(x, epsilon, xi);
  }
  // final full step of x, final half-step of xi
  x += epsilon * xi;
  kick(x, 0.5 * epsilon, xi);

  // negate momentum so the proposal map is symmetric
  xi = -xi;
  return {std::move(x), std::move(xi)};
}

HmcStepResult hmc_step(const StateVector& current, double current_log_density,
                       const DifferentiableTarget& target, const KernelConfig& config,
                       std::uint64_t iteration) {
  CounterRng momentum_rng(config.seed, iteration, RngStream::momentum);
  StateVector xi0 = sample_momentum(momentum_rng, current.size());

  GradientFn grad_u = [&target](const StateVector& x) -> StateVector {
    return -target.gradient(x);
  };
  PhasePoint end = leapfrog_trajectory({current, xi0}, config.epsilon, config.n_leapfrog, grad_u);

  const double log_density_proposal = target.log_density(end.position);
  double delta_h;
  if (std::isfinite(log_density_proposal)) {
    // U = -log density; K is invariant under the final negation.
    delta_h = (-log_density_proposal + kinetic_energy(end.momentum)) -
              (-current_log_density + kinetic_energy(xi0));
  } else {
    delta_h = kInf;  // zero-density proposal: ordinary rejection
  }

  CounterRng accept_rng(config.seed, iteration, RngStream::stage1);
  const bool accepted = accept_with_log_prob(-delta_h, accept_rng);

  HmcStepResult r;
  r.accepted = accepted;
  r.delta_h = delta_h;
  r.next = accepted ? std::move(end.position) : current;
  r.log_density_next = accepted ? log_density_proposal : current_log_density;
  return r;
}

HmcStepResult hmc_step(const StateVector& current, const DifferentiableTarget& target,
                       const KernelConfig& config, std::uint64_t iteration) {
  const double ld = target.log_density(current);
  if (!std::isfinite(ld)) throw Error("hmc_step: target log-density not finite at current state");
  return hmc_step(current, ld, target, config, iteration);
}

double mfhmc_stage2_log_alpha(double hf_proposal, double hf_current, double lf_current,
                              double lf_proposal) {
  if (!std::isfinite(hf_proposal)) return -kInf;
  return (hf_proposal - hf_current) + (lf_current - lf_proposal);
}

MfhmcStepResult mfhmc_step(const StateVector& current, const DualFidelityTarget& target,
                           const KernelConfig& config, std::uint64_t iteration,
                           double cached_hf_log_density,
                           std::optional<double> cached_lf_log_density) {
  const double lf_current =
      cached_lf_log_density ? *cached_lf_log_density : target.lf_log_density(current);

  // Stage 1: standard HMC against the low-fidelity posterior.
  DifferentiableTarget lf = target.lf_view();
  HmcStepResult stage1 = hmc_step(current, lf_current, lf, config, iteration);

  MfhmcStepResult r;
  r.stage1_delta_h = stage1.delta_h;
  if (!stage1.accepted) {
    // alpha_HF(x, x) = 1: retaining the state needs no high-fidelity work.
    r.next = current;
    r.hf_log_density_next = cached_hf_log_density;
    r.lf_log_density_next = lf_current;
    return r;
  }
  r.stage1_accepted = true;

  // Stage 2: gradient-free correction against the high-fidelity posterior;
  // the single HF evaluation of this iteration.
  const double hf_proposal = target.hf_log_density(stage1.next);
  r.hf_evaluations = 1;
  const double log_alpha =
      mfhmc_stage2_log_alpha(hf_proposal, cached_hf_log_density, lf_current,
                             stage1.log_density_next);

  CounterRng stage2_rng(config.seed, iteration, RngStream::stage2);
  if (accept_with_log_prob(log_alpha, stage2_rng)) {
    r.stage2_accepted = true;
    r.next = std::move(stage1.next);
    r.hf_log_density_next = hf_proposal;
    r.lf_log_density_next = stage1.log_density_next;
  } else {
    r.next = current;
    r.hf_log_density_next = cached_hf_log_density;
    r.lf_log_density_next = lf_current;
  }
  return r;
}

ChainRecord run_hmc_chain(const DifferentiableTarget& target, const StateVector& start,
                          const KernelConfig& config, std::optional<std::uint64_t> hf_budget) {
  config.validate();
  if (start.size() != target.dim || !start.allFinite())
    throw Error("run_hmc_chain: start state invalid for target of dim " +
                std::to_string(target.dim));
  double log_density = target.log_density(start);
  if (!std::isfinite(log_density))
    throw Error("run_hmc_chain: target log-density not finite at start");

  const auto grads_per_step = static_cast<std::uint64_t>(config.n_leapfrog) + 1;
  const auto work_per_step = 2ull * static_cast<std::uint64_t>(config.n_leapfrog);

  ChainRecord rec;
  rec.kind = KernelKind::hmc;
  rec.config = config;
  std::vector<StateVector> samples;
  samples.reserve(static_cast<std::size_t>(config.n_steps) + 1);
  samples.push_back(start);

  StateVector current = start;
  std::uint64_t n_hf = 1;  // density evaluation at the start state
  std::uint64_t n_grad = 0;
  for (std::int64_t i = 1; i <= config.n_steps; ++i) {
    HmcStepResult step;
    try {
      step = hmc_step(current, log_density, target, config, static_cast<std::uint64_t>(i));
    } catch (const IntegrationError& e) {
      throw ChainError("iteration " + std::to_string(i) + ": " + e.what(), i);
    }
    current = step.next;
    log_density = step.log_density_next;
    n_hf += 1;  // proposal density evaluation
    n_grad += grads_per_step;

    samples.push_back(current);
    rec.stage1_accepted.push_back(step.accepted ? 1 : 0);
    rec.stage2_accepted.push_back(step.accepted ? 1 : 0);
    rec.n_hf_cumulative.push_back(n_hf);
    rec.n_grad_cumulative.push_back(n_grad);

    if (hf_budget && work_per_step * static_cast<std::uint64_t>(i) >= *hf_budget) break;
  }

  rec.samples.resize(static_cast<Eigen::Index>(samples.size()), target.dim);
  for (std::size_t t = 0; t < samples.size(); ++t)
    rec.samples.row(static_cast<Eigen::Index>(t)) = samples[t].transpose();
  return rec;
}

ChainRecord run_mfhmc_chain(const DualFidelityTarget& target, const StateVector& start,
                            const KernelConfig& config, std::optional<std::uint64_t> hf_budget) {
  config.validate();
  if (start.size() != target.dim || !start.allFinite())
    throw Error("run_mfhmc_chain: start state invalid for target of dim " +
                std::to_string(target.dim));
  double hf_log_density = target.hf_log_density(start);  // counted before iteration 1
  double lf_log_density = target.lf_log_density(start);
  if (!std::isfinite(hf_log_density) || !std::isfinite(lf_log_density))
    throw Error("run_mfhmc_chain: target log-density not finite at start");

  const auto grads_per_step = static_cast<std::uint64_t>(config.n_leapfrog) + 1;

  ChainRecord rec;
  rec.kind = KernelKind::mfhmc;
  rec.config = config;
  std::vector<StateVector> samples;
  samples.reserve(static_cast<std::size_t>(config.n_steps) + 1);
  samples.push_back(start);

  StateVector current = start;
  std::uint64_t n_hf = 1;
  std::uint64_t n_grad = 0;
  for (std::int64_t i = 1; i <= config.n_steps; ++i) {
    MfhmcStepResult step;
    try {
      step = mfhmc_step(current, target, config, static_cast<std::uint64_t>(i), hf_log_density,
                        lf_log_density);
    } catch (const IntegrationError& e) {
      throw ChainError("iteration " + std::to_string(i) + ": " + e.what(), i);
    }
    current = step.next;
    hf_log_density = step.hf_log_density_next;
    lf_log_density = step.lf_log_density_next;
    n_hf += static_cast<std::uint64_t>(step.hf_evaluations);
    n_grad += grads_per_step;

    samples.push_back(current);
    rec.stage1_accepted.push_back(step.stage1_accepted ? 1 : 0);
    rec.stage2_accepted.push_back(step.stage2_accepted ? 1 : 0);
    rec.n_hf_cumulative.push_back(n_hf);
    rec.n_grad_cumulative.push_back(n_grad);

    if (hf_budget && n_hf >= *hf_budget) break;
  }

  rec.samples.resize(static_cast<Eigen::Index>(samples.size()), target.dim);
  for (std::size_t t = 0; t < samples.size(); ++t)
    rec.samples.row(static_cast<Eigen::Index>(t)) = samples[t].transpose();
  return rec;
}

}  // namespace mfhmc
