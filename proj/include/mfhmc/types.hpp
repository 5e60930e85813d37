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

#ifndef MFHMC_TYPES_HPP
#define MFHMC_TYPES_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace mfhmc {

/// A point in parameter space (and, with the same layout, a momentum).
using StateVector = Eigen::VectorXd;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown when a leapfrog trajectory encounters a non-finite gradient.
class IntegrationError : public Error {
 public:
  IntegrationError(const std::string& msg, int gradient_call_index)
      : Error(msg), gradient_call_index(gradient_call_index) {}
  int gradient_call_index;
};

/// Thrown by run_chain with the iteration at which a kernel failed.
class ChainError : public Error {
 public:
  ChainError(const std::string& msg, std::int64_t iteration)
      : Error(msg), iteration(iteration) {}
  std::int64_t iteration;
};

struct PhasePoint {
  StateVector position;
  StateVector momentum;
};

/// Kinetic energy with identity mass matrix, K(xi) = xi' xi / 2.
inline double kinetic_energy(const StateVector& momentum) {
  return 0.5 * momentum.squaredNorm();
}

struct KernelConfig {
  double epsilon = 0.1;      // leapfrog step size
  int n_leapfrog = 10;       // leapfrog steps L per proposal
  std::int64_t n_steps = 1000;  // chain iterations m
  double burn_in_frac = 0.25;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(epsilon > 0.0)) throw Error("epsilon must be > 0 (got " + std::to_string(epsilon) + ")");
    if (n_leapfrog < 1) throw Error("n-leapfrog must be >= 1 (got " + std::to_string(n_leapfrog) + ")");
    if (n_steps < 1) throw Error("n-steps must be >= 1 (got " + std::to_string(n_steps) + ")");
    if (!(burn_in_frac >= 0.0 && burn_in_frac < 1.0))
      throw Error("burn-in-frac must be in [0, 1) (got " + std::to_string(burn_in_frac) + ")");
  }
};

enum class KernelKind { hmc, mfhmc };

inline const char* kernel_name(KernelKind k) { return k == KernelKind::hmc ? "hmc" : "mfhmc"; }

/// Full record of one chain run.
///
/// Row t of `samples` is the state after iteration t (row 0 is the start),
/// so a completed run holds n_iterations()+1 rows. Per-iteration flags and
/// cumulative counters are indexed by iteration-1.
///
/// Counter conventions:
///  - MFHMC: n_hf_cumulative counts high-fidelity density evaluations. The
///    start state costs one evaluation before iteration 1; afterwards each
///    iteration adds 1 exactly when stage 1 accepted (the stage-2 check),
///    so the final value is 1 + number of stage-1 acceptances.
///  - HMC: n_hf_cumulative counts target density evaluations (1 + iteration);
///    hf_work() converts to the 2L-solves-per-iteration cost convention,
///    counting each gradient as one forward plus one adjoint solve.
struct ChainRecord {
  KernelKind kind = KernelKind::hmc;
  KernelConfig config;
  Eigen::MatrixXd samples;  // (n_iterations+1) x D, row-per-state
  std::vector<std::uint8_t> stage1_accepted;
  std::vector<std::uint8_t> stage2_accepted;
  std::vector<std::uint64_t> n_hf_cumulative;
  std::vector<std::uint64_t> n_grad_cumulative;

  std::int64_t n_iterations() const { return static_cast<std::int64_t>(stage1_accepted.size()); }
  Eigen::Index dim() const { return samples.cols(); }

  std::int64_t stage1_count() const {
    std::int64_t c = 0;
    for (auto f : stage1_accepted) c += f;
    return c;
  }
  std::int64_t stage2_count() const {
    std::int64_t c = 0;
    for (auto f : stage2_accepted) c += f;
    return c;
  }

  /// High-fidelity density evaluations actually performed.
  std::uint64_t hf_evaluations() const {
    return n_hf_cumulative.empty() ? 1 : n_hf_cumulative.back();
  }

  /// Gradient-oracle calls actually performed (LF gradient for MFHMC).
  std::uint64_t grad_evaluations() const {
    return n_grad_cumulative.empty() ? 0 : n_grad_cumulative.back();
  }

  /// HF work in budget units: density evaluations for MFHMC, 2L equivalent
  /// solves per iteration for HMC.
  std::uint64_t hf_work() const {
    if (kind == KernelKind::mfhmc) return hf_evaluations();
    return 2ull * static_cast<std::uint64_t>(config.n_leapfrog) *
           static_cast<std::uint64_t>(n_iterations());
  }

  /// Iterations dropped as burn-in for a given fraction.
  std::int64_t burn_in_iterations(double burn_in_frac) const {
    return static_cast<std::int64_t>(burn_in_frac * static_cast<double>(n_iterations()));
  }

  /// Post-burn-in samples: states from iteration floor(frac*m) onward.
  Eigen::Block<const Eigen::MatrixXd> post_burn_in(double burn_in_frac) const {
    const std::int64_t drop = burn_in_iterations(burn_in_frac);
    return samples.bottomRows(samples.rows() - drop);
  }
};

}  // namespace mfhmc

#endif  // MFHMC_TYPES_HPP
