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

#include "mfhmc/diagnostics.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace mfhmc {

namespace {

// Autocovariance at `lag` with 1/M normalization, given centered data.
double autocovariance_biased(const Eigen::VectorXd& centered, Eigen::Index lag) {
  const Eigen::Index m = centered.size();
  return centered.head(m - lag).dot(centered.tail(m - lag)) / static_cast<double>(m);
}

}  // namespace

double autocorrelation(const Eigen::VectorXd& series, Eigen::Index lag) {
  const Eigen::Index m = series.size();
  if (m < 2) throw Error("autocorrelation: series must have at least 2 entries");
  if (lag < 0 || lag >= m)
    throw Error("autocorrelation: lag must be in [0, " + std::to_string(m - 1) + "]");
  Eigen::VectorXd centered = series.array() - series.mean();
  const double var = autocovariance_biased(centered, 0);
  if (!(var > 0.0)) throw Error("autocorrelation: degenerate series (zero variance)");
  return autocovariance_biased(centered, lag) / var;
}

double effective_sample_size(const Eigen::VectorXd& series) {
  const Eigen::Index m = series.size();
  if (m < 2) throw Error("ess: series must have at least 2 entries");
  Eigen::VectorXd centered = series.array() - series.mean();
  const double var = autocovariance_biased(centered, 0);
  if (!(var > 0.0)) return 0.0;  // degenerate dimension

  double window_sum = 0.0;
  for (Eigen::Index s = 1; s < m; ++s) {
    const double rho = autocovariance_biased(centered, s) / var;
    if (rho < 0.05) break;
    window_sum += (1.0 - static_cast<double>(s) / static_cast<double>(m)) * rho;
  }
  return static_cast<double>(m) / (1.0 + 2.0 * window_sum);
}

double ess_per_hf(const ChainRecord& chain, double burn_in_frac, std::uint64_t n_hf_total) {
  if (n_hf_total == 0) throw Error("ess_per_hf: n_hf_total must be > 0");
  const auto post = chain.post_burn_in(burn_in_frac);
  if (post.rows() < 10) throw Error("ess_per_hf: need at least 10 post-burn-in samples");
  double min_ess = std::numeric_limits<double>::infinity();
  for (Eigen::Index d = 0; d < post.cols(); ++d) {
    min_ess = std::min(min_ess, effective_sample_size(post.col(d)));
    if (min_ess == 0.0) break;
  }
  return min_ess / static_cast<double>(n_hf_total);
}

double esjd_per_hf(const ChainRecord& chain, double burn_in_frac, std::uint64_t n_hf_total) {
  if (n_hf_total == 0) throw Error("esjd_per_hf: n_hf_total must be > 0");
  const auto post = chain.post_burn_in(burn_in_frac);
  const Eigen::Index m = post.rows();
  if (m < 2) throw Error("esjd_per_hf: need at least 2 post-burn-in samples");
  double sum = 0.0;
  for (Eigen::Index t = 0; t + 1 < m; ++t) sum += (post.row(t + 1) - post.row(t)).squaredNorm();
  return sum / static_cast<double>(m - 1) / static_cast<double>(n_hf_total);
}

namespace {

double relative_error_pct_impl(double diff_norm, double true_norm) {
  if (!(true_norm > 0.0)) throw Error("relative_error_pct: truth has zero norm");
  return diff_norm / true_norm * 100.0;
}

}  // namespace

double relative_error_pct(const Eigen::VectorXd& v_mcmc, const Eigen::VectorXd& v_true) {
  if (v_mcmc.size() != v_true.size()) throw Error("relative_error_pct: shape mismatch");
  return relative_error_pct_impl((v_mcmc - v_true).norm(), v_true.norm());
}

double relative_error_pct(const Eigen::MatrixXd& v_mcmc, const Eigen::MatrixXd& v_true) {
  if (v_mcmc.rows() != v_true.rows() || v_mcmc.cols() != v_true.cols())
    throw Error("relative_error_pct: shape mismatch");
  return relative_error_pct_impl((v_mcmc - v_true).norm(), v_true.norm());
}

double coverage95(const Eigen::VectorXd& post_mean, const Eigen::VectorXd& post_std,
                  const Eigen::VectorXd& truth) {
  if (post_mean.size() != post_std.size() || post_mean.size() != truth.size())
    throw Error("coverage95: shape mismatch");
  if ((post_std.array() < 0.0).any()) throw Error("coverage95: negative posterior std");
  Eigen::Index hits = 0;
  for (Eigen::Index i = 0; i < truth.size(); ++i)
    if (std::abs(truth[i] - post_mean[i]) <= 1.96 * post_std[i]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

double accepted_moves_per_hf(const ChainRecord& chain) {
  const std::uint64_t work = chain.hf_work();
  if (work == 0) throw Error("accepted_moves_per_hf: chain has no HF work recorded");
  const std::int64_t accepted =
      chain.kind == KernelKind::mfhmc ? chain.stage2_count() : chain.stage1_count();
  return static_cast<double>(accepted) / static_cast<double>(work);
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> posterior_mean_std(const ChainRecord& chain,
                                                               double burn_in_frac) {
  const auto post = chain.post_burn_in(burn_in_frac);
  const double m = static_cast<double>(post.rows());
  Eigen::VectorXd mean = post.colwise().mean();
  Eigen::VectorXd var =
      (post.rowwise() - mean.transpose()).colwise().squaredNorm().transpose() / m;
  return {std::move(mean), var.cwiseSqrt()};
}

Eigen::MatrixXd posterior_covariance(const ChainRecord& chain, double burn_in_frac) {
  const auto post = chain.post_burn_in(burn_in_frac);
  const double m = static_cast<double>(post.rows());
  Eigen::MatrixXd centered = post.rowwise() - post.colwise().mean();
  return centered.transpose() * centered / m;
}

DiagnosticsReport make_report(const ChainRecord& chain, const TruthRefs& truth) {
  const double burn = chain.config.burn_in_frac;
  DiagnosticsReport r;
  r.n_hf_total = chain.hf_work();
  r.m_post_burnin = chain.post_burn_in(burn).rows();
  r.accepted_per_hf = accepted_moves_per_hf(chain);
  r.ess_per_hf = ess_per_hf(chain, burn, r.n_hf_total);
  r.esjd_per_hf = esjd_per_hf(chain, burn, r.n_hf_total);

  auto [mean, stddev] = posterior_mean_std(chain, burn);
  r.rel_error_mean_pct = truth.mean_true.norm() > 0.0
                             ? relative_error_pct(mean, truth.mean_true)
                             : std::numeric_limits<double>::quiet_NaN();
  if (truth.cov_true)
    r.rel_error_cov_pct = relative_error_pct(posterior_covariance(chain, burn), *truth.cov_true);
  const Eigen::VectorXd& cover_truth =
      truth.coverage_truth ? *truth.coverage_truth : truth.mean_true;
  r.coverage95 = coverage95(mean, stddev, cover_truth);
  return r;
}

}  // namespace mfhmc
