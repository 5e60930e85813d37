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

#ifndef MFHMC_TARGETS_HPP
#define MFHMC_TARGETS_HPP

#include <filesystem>
#include <functional>
#include <memory>
#include <utility>

#include <Eigen/Core>

#include "mfhmc/types.hpp"

namespace mfhmc {

using LogDensityFn = std::function<double(const StateVector&)>;
using GradientFn = std::function<StateVector(const StateVector&)>;

/// Unnormalized log-density with an analytic gradient; drives HMC proposals.
struct DifferentiableTarget {
  Eigen::Index dim = 0;
  LogDensityFn log_density;
  GradientFn gradient;
};

/// Pair of unnormalized log-posteriors. The high-fidelity side is value-only
/// by contract (black-box forward model); only the low-fidelity side carries
/// a gradient.
struct DualFidelityTarget {
  Eigen::Index dim = 0;
  LogDensityFn hf_log_density;
  LogDensityFn lf_log_density;
  GradientFn lf_gradient;

  DifferentiableTarget lf_view() const { return {dim, lf_log_density, lf_gradient}; }
};

/// Builds the degenerate dual target where both fidelities are the same model.
DualFidelityTarget degenerate_dual_target(const DifferentiableTarget& t);

/// log p(x) = -x'Ax/2 up to a constant; gradient -Ax.
std::pair<double, StateVector> mvn_log_density_and_grad(const StateVector& x,
                                                        const Eigen::MatrixXd& precision);

/// Zero-mean Gaussian with a fixed precision matrix.
class MvnTarget {
 public:
  explicit MvnTarget(Eigen::MatrixXd precision);

  double log_density(const StateVector& x) const;
  StateVector gradient(const StateVector& x) const;
  Eigen::Index dim() const { return precision_->rows(); }
  const Eigen::MatrixXd& precision() const { return *precision_; }

  DifferentiableTarget as_target() const;

 private:
  std::shared_ptr<const Eigen::MatrixXd> precision_;
};

/// log-posterior value and gradient for the linear-Gaussian model
/// y = Fx + noise with N(0, sigma_prior^2 I) prior:
///   value    = -|y - Fx|^2 / (2 sigma_noise^2) - |x|^2 / (2 sigma_prior^2)
///   gradient =  F'(y - Fx) / sigma_noise^2     -  x    / sigma_prior^2
std::pair<double, StateVector> linear_gaussian_log_density_and_grad(
    const StateVector& x, const Eigen::MatrixXd& forward, const Eigen::VectorXd& data,
    double sigma_noise, double sigma_prior);

/// Gaussian posterior of a linear inverse problem. The dense constructor
/// precomputes F'F and F'y so each gradient costs one symmetric matvec; the
/// factored constructor evaluates through a rank-k operator U diag(s) V'.
/// Both paths implement the same density as the free operation above.
class LinearGaussianPosterior {
 public:
  LinearGaussianPosterior(Eigen::MatrixXd forward, Eigen::VectorXd data, double sigma_noise,
                          double sigma_prior);
  LinearGaussianPosterior(Eigen::MatrixXd u, Eigen::VectorXd singular_values, Eigen::MatrixXd v,
                          Eigen::VectorXd data, double sigma_noise, double sigma_prior);

  double log_density(const StateVector& x) const;
  StateVector gradient(const StateVector& x) const;
  std::pair<double, StateVector> log_density_and_grad(const StateVector& x) const;

  Eigen::Index dim() const;
  DifferentiableTarget as_target() const;
  LogDensityFn as_log_density() const;

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

/// Reads a dense matrix from the CSV format "rows,cols" header followed by
/// one comma-separated row per line.
Eigen::MatrixXd load_linear_operator(const std::filesystem::path& path);

/// Writes the matching CSV with 17 significant digits (lossless round-trip).
void save_linear_operator(const Eigen::MatrixXd& m, const std::filesystem::path& path);

/// Central finite-difference validation of a target's gradient at n_points
/// standard-normal test points. Returns the worst relative error seen.
double max_gradient_fd_error(const DifferentiableTarget& target, int n_points,
                             std::uint64_t seed);

}  // namespace mfhmc

#endif  // MFHMC_TARGETS_HPP
