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

#include "mfhmc/forward_models.hpp"

#include <cmath>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/SVD>

#include "mfhmc/rng.hpp"

namespace mfhmc {

namespace {

// C = A * B for symmetric A, B that commute keeps symmetry to roundoff; the
// binary-power ladder below squares a bitwise-symmetric matrix, which stays
// bitwise symmetric because IEEE products commute.
Eigen::MatrixXd matrix_power(Eigen::MatrixXd base, int exponent) {
  Eigen::MatrixXd result = Eigen::MatrixXd::Identity(base.rows(), base.cols());
  bool result_is_identity = true;
  while (exponent > 0) {
    if (exponent & 1) {
      if (result_is_identity) {
        result = base;
        result_is_identity = false;
      } else {
        result = (result * base).eval();
      }
    }
    exponent >>= 1;
    if (exponent > 0) base = (base * base).eval();
  }
  return result;
}

}  // namespace

Eigen::MatrixXd build_heat_operator(const HeatOperatorSpec& spec) {
  spec.validate();
  const Eigen::Index n = spec.grid_n;
  const Eigen::Index d = spec.dim();
  const double h = spec.spacing();
  const double dt = spec.final_time / spec.n_time_steps;
  const double c = spec.alpha * dt / (h * h);

  // M = I - dt*alpha*L_h, 5-point Laplacian, zero Dirichlet ghost boundary.
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const Eigen::Index k = i * n + j;
      m(k, k) = 1.0 + 4.0 * c;
      if (i > 0) m(k, k - n) = -c;
      if (i + 1 < n) m(k, k + n) = -c;
      if (j > 0) m(k, k - 1) = -c;
      if (j + 1 < n) m(k, k + 1) = -c;
    }
  }

  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success)
    throw Error("heat operator: factorization of the backward-Euler matrix failed");
  Eigen::MatrixXd m_inv = llt.solve(Eigen::MatrixXd::Identity(d, d));
  m_inv = (0.5 * (m_inv + m_inv.transpose())).eval();  // bitwise symmetric base

  return matrix_power(std::move(m_inv), spec.n_time_steps);
}

double heat_laplacian_min_eigenvalue(const HeatOperatorSpec& spec) {
  const double h = spec.spacing();
  const double s = std::sin(std::numbers::pi / (2.0 * (spec.grid_n + 1)));
  return 8.0 / (h * h) * s * s;
}

SvdFactors svd_factors(const Eigen::MatrixXd& f) {
  Eigen::BDCSVD<Eigen::MatrixXd> svd(f, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return {svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

Eigen::MatrixXd truncate_from_factors(const SvdFactors& factors, int k) {
  if (k < 1 || k > factors.s.size())
    throw Error("tsvd: k must be in [1, " + std::to_string(factors.s.size()) + "] (got " +
                std::to_string(k) + ")");
  return factors.u.leftCols(k) * factors.s.head(k).asDiagonal() *
         factors.v.leftCols(k).transpose();
}

Eigen::MatrixXd tsvd_truncate(const Eigen::MatrixXd& f, int k) {
  if (k < 1 || k > std::min(f.rows(), f.cols()))
    throw Error("tsvd: k must be in [1, " + std::to_string(std::min(f.rows(), f.cols())) +
                "] (got " + std::to_string(k) + ")");
  return truncate_from_factors(svd_factors(f), k);
}

double spectral_norm(const Eigen::MatrixXd& f, int iterations) {
  CounterRng rng(0x5eed, 0, RngStream::generic);
  Eigen::VectorXd v = rng.normal_vector(f.cols());
  v.normalize();
  double sigma = 0.0;
  for (int it = 0; it < iterations; ++it) {
    Eigen::VectorXd w = f.transpose() * (f * v);
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    v = w / norm;
    sigma = std::sqrt(norm);
  }
  return sigma;
}

Eigen::MatrixXd sample_wishart_precision(const WishartSpec& spec) {
  spec.validate();
  CounterRng rng(spec.seed, 0, RngStream::wishart);
  const Eigen::Index d = spec.dim;
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    double chi2 = 0.0;
    for (int j = 0; j < spec.dof - i; ++j) {
      const double z = rng.normal();
      chi2 += z * z;
    }
    b(i, i) = std::sqrt(chi2);
    for (Eigen::Index j = 0; j < i; ++j) b(i, j) = rng.normal();
  }
  return b * b.transpose();
}

Eigen::MatrixXd build_lf_covariance(const Eigen::MatrixXd& sigma_hf, double gamma) {
  if (sigma_hf.rows() != sigma_hf.cols()) throw Error("lf covariance: input must be square");
  const double asym = (sigma_hf - sigma_hf.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10 * std::max(1.0, sigma_hf.cwiseAbs().maxCoeff()))
    throw Error("lf covariance: input not symmetric (max asymmetry " + std::to_string(asym) + ")");
  if (!(gamma >= 0.0)) throw Error("lf covariance: gamma must be >= 0");
  const double d = static_cast<double>(sigma_hf.rows());
  const double shift = gamma / d * sigma_hf.trace();
  Eigen::MatrixXd sigma_lf = sigma_hf;
  sigma_lf.diagonal().array() += shift;
  return sigma_lf;
}

std::pair<Eigen::VectorXd, Eigen::MatrixXd> conjugate_posterior(const Eigen::MatrixXd& forward,
                                                                const Eigen::VectorXd& data,
                                                                double sigma_noise,
                                                                double sigma_prior) {
  if (forward.rows() != data.size())
    throw Error("conjugate posterior: F has " + std::to_string(forward.rows()) +
                " rows but y has " + std::to_string(data.size()) + " entries");
  if (!(sigma_noise > 0.0) || !(sigma_prior > 0.0))
    throw Error("conjugate posterior: sigma-noise and sigma-prior must be > 0");
  const Eigen::Index d = forward.cols();
  const double inv_n2 = 1.0 / (sigma_noise * sigma_noise);
  const double inv_p2 = 1.0 / (sigma_prior * sigma_prior);
  Eigen::MatrixXd precision = inv_n2 * (forward.transpose() * forward);
  precision.diagonal().array() += inv_p2;
  Eigen::LLT<Eigen::MatrixXd> llt(precision);
  if (llt.info() != Eigen::Success)
    throw Error("conjugate posterior: posterior precision factorization failed");
  Eigen::MatrixXd covariance = llt.solve(Eigen::MatrixXd::Identity(d, d));
  Eigen::VectorXd mean = llt.solve(inv_n2 * (forward.transpose() * data));
  return {std::move(mean), std::move(covariance)};
}

Eigen::VectorXd make_heat_measurement(const Eigen::MatrixXd& forward,
                                      const Eigen::VectorXd& x_true, double noise_sigma,
                                      std::uint64_t seed) {
  if (forward.cols() != x_true.size())
    throw Error("heat measurement: F has " + std::to_string(forward.cols()) +
                " cols but x_true has " + std::to_string(x_true.size()) + " entries");
  if (!(noise_sigma >= 0.0)) throw Error("heat measurement: noise-sigma must be >= 0");
  Eigen::VectorXd y = forward * x_true;
  if (noise_sigma > 0.0) {
    CounterRng rng(seed, 0, RngStream::measurement_noise);
    y += noise_sigma * rng.normal_vector(y.size());
  }
  return y;
}

Eigen::VectorXd default_true_field(int grid_n) {
  if (grid_n < 2) throw Error("true field: grid-n must be >= 2");
  // Two smooth Gaussian bumps of opposite sign on the unit square, scaled to
  // the prior's 0.1 length scale. Stand-in for a measured field.
  Eigen::VectorXd x(static_cast<Eigen::Index>(grid_n) * grid_n);
  for (int i = 0; i < grid_n; ++i) {
    for (int j = 0; j < grid_n; ++j) {
      const double s1 = (i + 1.0) / (grid_n + 1.0);
      const double s2 = (j + 1.0) / (grid_n + 1.0);
      const double b1 = 0.35 * std::exp(-((s1 - 0.35) * (s1 - 0.35) + (s2 - 0.4) * (s2 - 0.4)) /
                                        (2.0 * 0.14 * 0.14));
      const double b2 = -0.25 * std::exp(-((s1 - 0.7) * (s1 - 0.7) + (s2 - 0.65) * (s2 - 0.65)) /
                                         (2.0 * 0.12 * 0.12));
      x[static_cast<Eigen::Index>(i) * grid_n + j] = b1 + b2;
    }
  }
  return x;
}

}  // namespace mfhmc
