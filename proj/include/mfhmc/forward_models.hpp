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

#ifndef MFHMC_FORWARD_MODELS_HPP
#define MFHMC_FORWARD_MODELS_HPP

#include <cstdint>
#include <numbers>
#include <utility>

#include <Eigen/Core>

#include "mfhmc/types.hpp"

namespace mfhmc {

/// Transient heat conduction on a square domain, discretized with the
/// 5-point second-order Laplacian and backward Euler in time. grid_n is the
/// number of unknown nodes per side; homogeneous Dirichlet values sit on a
/// surrounding ghost boundary, so the grid spacing is
/// domain_length / (grid_n + 1).
struct HeatOperatorSpec {
  int grid_n = 32;
  double domain_length = 2.0 * std::numbers::pi;
  double alpha = 0.64;  // thermal diffusivity
  int n_time_steps = 100;
  double final_time = 1.0;

  void validate() const {
    if (grid_n < 2) throw Error("heat operator: grid-n must be >= 2");
    if (!(alpha >= 0.0)) throw Error("heat operator: alpha must be >= 0");
    if (n_time_steps < 1) throw Error("heat operator: n-time-steps must be >= 1");
    if (!(domain_length > 0.0)) throw Error("heat operator: domain-length must be > 0");
    if (!(final_time > 0.0)) throw Error("heat operator: final-time must be > 0");
  }

  Eigen::Index dim() const { return static_cast<Eigen::Index>(grid_n) * grid_n; }
  double spacing() const { return domain_length / (grid_n + 1); }
};

/// Dense forward map F = M^{-n_t} with M = I - dt*alpha*L_h mapping an
/// initial temperature field to the field at final_time. F is symmetric
/// positive definite with spectrum inside (0, 1] (strictly below 1 for
/// alpha > 0: diffusion only loses information).
Eigen::MatrixXd build_heat_operator(const HeatOperatorSpec& spec);

/// Smallest eigenvalue magnitude of the discrete Dirichlet Laplacian on the
/// spec's grid, (8/h^2) sin^2(pi / (2(grid_n+1))); test oracle for the heat
/// operator spectrum.
double heat_laplacian_min_eigenvalue(const HeatOperatorSpec& spec);

/// Rank-k truncation F_k = sum_{i<=k} s_i u_i v_i' of the SVD of F, singular
/// values sorted descending. Spectral-norm error |F - F_k|_2 = s_{k+1}.
Eigen::MatrixXd tsvd_truncate(const Eigen::MatrixXd& f, int k);

/// Thin SVD factors of a dense operator, reusable across truncation ranks.
struct SvdFactors {
  Eigen::MatrixXd u;
  Eigen::VectorXd s;  // descending
  Eigen::MatrixXd v;
};

SvdFactors svd_factors(const Eigen::MatrixXd& f);

/// Dense reconstruction of a rank-k truncation from precomputed factors.
Eigen::MatrixXd truncate_from_factors(const SvdFactors& factors, int k);

/// Largest singular value estimated by power iteration on f'f; test oracle
/// independent of the SVD path.
double spectral_norm(const Eigen::MatrixXd& f, int iterations = 200);

struct WishartSpec {
  int dim = 250;
  int dof = 250;
  std::uint64_t seed = 0;

  void validate() const {
    if (dim < 1) throw Error("wishart: dim must be >= 1");
    if (dof < dim) throw Error("wishart: dof must be >= dim for positive definiteness");
  }
};

/// Draws A ~ Wishart(I, dof) via the Bartlett decomposition A = BB' with B
/// lower triangular: B_ii = sqrt(chi-square(dof - i)) (0-based row i) and
/// standard-normal strict lower entries. Chi-squares come from sums of
/// squared normals.
Eigen::MatrixXd sample_wishart_precision(const WishartSpec& spec);

/// Low-fidelity covariance family of the ill-conditioned MVN study:
/// Sigma_LF = Sigma_HF + (gamma / d) * trace(Sigma_HF) * I.
Eigen::MatrixXd build_lf_covariance(const Eigen::MatrixXd& sigma_hf, double gamma);

/// Closed-form Gaussian posterior for the conjugate linear model:
/// covariance = (F'F / sn^2 + I / sp^2)^{-1}, mean = covariance * F'y / sn^2.
std::pair<Eigen::VectorXd, Eigen::MatrixXd> conjugate_posterior(const Eigen::MatrixXd& forward,
                                                                const Eigen::VectorXd& data,
                                                                double sigma_noise,
                                                                double sigma_prior);

/// Synthetic measurement y = F x_true + eta with eta i.i.d.
/// N(0, noise_sigma^2); noise_sigma = 0.1 gives the 0.01 noise variance used
/// by the conjugate heat study.
Eigen::VectorXd make_heat_measurement(const Eigen::MatrixXd& forward,
                                      const Eigen::VectorXd& x_true, double noise_sigma,
                                      std::uint64_t seed);

/// Stand-in "true" initial condition: a smooth two-bump field on the grid_n x
/// grid_n grid, flattened row by row. The repo ships the same field as a
/// matrix CSV for external tools.
Eigen::VectorXd default_true_field(int grid_n);

}  // namespace mfhmc

#endif  // MFHMC_FORWARD_MODELS_HPP
