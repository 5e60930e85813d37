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

#ifndef MFHMC_DIAGNOSTICS_HPP
#define MFHMC_DIAGNOSTICS_HPP

#include <cstdint>
#include <optional>

#include <Eigen/Core>

#include "mfhmc/types.hpp"

namespace mfhmc {

/// Sampler quality metrics, all normalized by high-fidelity work. For MFHMC
/// chains n_hf_total counts HF density evaluations (including burn-in and
/// the start state); for HMC it counts 2L equivalent solves per iteration.
/// Both raw counters stay available on the ChainRecord.
struct DiagnosticsReport {
  double accepted_per_hf = 0.0;
  double ess_per_hf = 0.0;
  double esjd_per_hf = 0.0;
  double rel_error_mean_pct = 0.0;               // NaN when the true mean is zero
  std::optional<double> rel_error_cov_pct;       // set when a true covariance is known
  double coverage95 = 0.0;
  std::uint64_t n_hf_total = 0;
  std::int64_t m_post_burnin = 0;
};

/// Biased-normalization autocorrelation at the given lag:
/// [(1/M) sum_{t} (x_t - xbar)(x_{t+lag} - xbar)] / [(1/M) sum (x_t - xbar)^2].
/// Throws on a zero-variance (degenerate) series.
double autocorrelation(const Eigen::VectorXd& series, Eigen::Index lag);

/// Effective sample size of one series under the truncated lag-window sum
/// ESS = M / (1 + 2 sum_s (1 - s/M) rho_s), stopping at the first lag with
/// rho_s < 0.05 (exclusive) or at s = M-1. A zero-variance series has ESS 0.
double effective_sample_size(const Eigen::VectorXd& series);

/// min over dimensions of the post-burn-in ESS, divided by n_hf_total (which
/// by convention counts all HF work including burn-in).
double ess_per_hf(const ChainRecord& chain, double burn_in_frac, std::uint64_t n_hf_total);

/// Mean squared jump |x_{t+1} - x_t|^2 over post-burn-in consecutive pairs,
/// divided by n_hf_total.
double esjd_per_hf(const ChainRecord& chain, double burn_in_frac, std::uint64_t n_hf_total);

/// ||v_mcmc - v_true|| / ||v_true|| * 100, Euclidean for vectors and
/// Frobenius for matrices. Throws when the truth has zero norm.
double relative_error_pct(const Eigen::VectorXd& v_mcmc, const Eigen::VectorXd& v_true);
double relative_error_pct(const Eigen::MatrixXd& v_mcmc, const Eigen::MatrixXd& v_true);

/// Fraction of entries where |truth - post_mean| <= 1.96 * post_std.
double coverage95(const Eigen::VectorXd& post_mean, const Eigen::VectorXd& post_std,
                  const Eigen::VectorXd& truth);

/// Accepted HF moves per unit of HF work: stage-2 acceptances over HF density
/// evaluations for MFHMC; acceptances over 2L solves per iteration for HMC.
double accepted_moves_per_hf(const ChainRecord& chain);

/// Ground truth for report assembly. coverage_truth is the field whose
/// credible-interval coverage is reported (the true parameter, not the
/// posterior mean).
struct TruthRefs {
  Eigen::VectorXd mean_true;
  std::optional<Eigen::MatrixXd> cov_true;
  std::optional<Eigen::VectorXd> coverage_truth;
};

/// Post-burn-in sample mean and per-dimension standard deviation.
std::pair<Eigen::VectorXd, Eigen::VectorXd> posterior_mean_std(const ChainRecord& chain,
                                                               double burn_in_frac);

/// Post-burn-in sample covariance (denominator M).
Eigen::MatrixXd posterior_covariance(const ChainRecord& chain, double burn_in_frac);

/// Assembles the full report for a chain; burn-in fraction comes from the
/// chain's config. rel_error_mean_pct is NaN when |mean_true| = 0 (as in the
/// zero-mean MVN study, where the covariance error is the accuracy metric).
DiagnosticsReport make_report(const ChainRecord& chain, const TruthRefs& truth);

}  // namespace mfhmc

#endif  // MFHMC_DIAGNOSTICS_HPP
