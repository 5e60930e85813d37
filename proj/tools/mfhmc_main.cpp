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

#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Cholesky>

#include "mfhmc/cli_io.hpp"
#include "mfhmc/diagnostics.hpp"
#include "mfhmc/experiments.hpp"
#include "mfhmc/forward_models.hpp"
#include "mfhmc/rng.hpp"
#include "mfhmc/sampler.hpp"
#include "mfhmc/targets.hpp"

namespace {

using namespace mfhmc;

namespace fs = std::filesystem;

void print_chain_summary(const ChainRecord& chain, const DiagnosticsReport& report) {
  const std::int64_t m = chain.n_iterations();
  std::printf("algorithm           %s\n", kernel_name(chain.kind));
  std::printf("iterations          %lld\n", static_cast<long long>(m));
  if (chain.kind == KernelKind::mfhmc) {
    std::printf("stage1 acceptance   %.4f\n",
                static_cast<double>(chain.stage1_count()) / static_cast<double>(m));
    const std::int64_t s1 = chain.stage1_count();
    std::printf("stage2 acceptance   %s\n",
                s1 > 0 ? std::to_string(static_cast<double>(chain.stage2_count()) /
                                        static_cast<double>(s1))
                             .c_str()
                       : "n/a");
  } else {
    std::printf("acceptance          %.4f\n",
                static_cast<double>(chain.stage2_count()) / static_cast<double>(m));
  }
  // Both HF cost conventions, to keep comparisons unambiguous.
  std::printf("hf density evals    %llu\n",
              static_cast<unsigned long long>(chain.hf_evaluations()));
  std::printf("hf work (2L conv.)  %llu%s\n",
              static_cast<unsigned long long>(
                  2ull * static_cast<std::uint64_t>(chain.config.n_leapfrog) *
                  static_cast<std::uint64_t>(m)),
              chain.kind == KernelKind::hmc ? "  [used as n_hf for hmc]" : "");
  std::printf("gradient calls      %llu\n",
              static_cast<unsigned long long>(chain.grad_evaluations()));
  std::printf("accepted/n_hf       %.6g\n", report.accepted_per_hf);
  std::printf("ess/n_hf            %.6g\n", report.ess_per_hf);
  std::printf("esjd/n_hf           %.6g\n", report.esjd_per_hf);
  std::printf("rel err mean (%%)    %.6g\n", report.rel_error_mean_pct);
  if (report.rel_error_cov_pct)
    std::printf("rel err cov (%%)     %.6g\n", *report.rel_error_cov_pct);
  std::printf("coverage95          %.6g\n", report.coverage95);
}

int cmd_sample(const RunConfig& config) {
  fs::create_directories(config.output_dir);
  ChainRecord chain;
  TruthRefs truth;

  if (config.problem == "mvn") {
    WishartSpec wishart{config.dim, config.effective_dof(), config.seed};
    const Eigen::MatrixXd a_hf = sample_wishart_precision(wishart);
    const Eigen::Index d = a_hf.rows();
    const Eigen::MatrixXd sigma_hf =
        Eigen::LLT<Eigen::MatrixXd>(a_hf).solve(Eigen::MatrixXd::Identity(d, d));
    const MvnTarget hf(a_hf);
    const StateVector start = StateVector::Zero(d);
    const auto budget =
        config.budget > 0 ? std::optional<std::uint64_t>(config.budget) : std::nullopt;
    if (config.algorithm == "hmc") {
      chain = run_hmc_chain(hf.as_target(), start, config.kernel(), budget);
    } else {
      const Eigen::MatrixXd sigma_lf = build_lf_covariance(sigma_hf, config.gamma);
      const Eigen::MatrixXd a_lf =
          Eigen::LLT<Eigen::MatrixXd>(sigma_lf).solve(Eigen::MatrixXd::Identity(d, d));
      const MvnTarget lf(a_lf);
      DualFidelityTarget dual{d, hf.as_target().log_density, lf.as_target().log_density,
                              lf.as_target().gradient};
      chain = run_mfhmc_chain(dual, start, config.kernel(), budget);
    }
    truth = {Eigen::VectorXd::Zero(d), sigma_hf, Eigen::VectorXd::Zero(d)};
  } else {  // heat
    HeatOperatorSpec op{config.grid_n, config.domain_length, config.alpha, config.n_time_steps,
                        config.final_time};
    const Eigen::MatrixXd f = build_heat_operator(op);
    const Eigen::Index d = op.dim();
    Eigen::VectorXd x_true;
    if (!config.true_field.empty()) {
      const Eigen::MatrixXd field = load_linear_operator(config.true_field);
      if (field.size() != d)
        throw Error("true-field has " + std::to_string(field.size()) + " entries, expected " +
                    std::to_string(d));
      x_true = Eigen::MatrixXd(field.transpose()).reshaped();  // row-major flatten
    } else {
      x_true = default_true_field(config.grid_n);
    }
    const Eigen::VectorXd y =
        make_heat_measurement(f, x_true, config.sigma_noise, derive_seed(config.seed, 0x6d656173));
    const auto [post_mean, post_cov] =
        conjugate_posterior(f, y, config.sigma_noise, config.sigma_prior);
    const LinearGaussianPosterior hf(f, y, config.sigma_noise, config.sigma_prior);
    const StateVector start = StateVector::Zero(d);
    const auto budget =
        config.budget > 0 ? std::optional<std::uint64_t>(config.budget) : std::nullopt;
    if (config.algorithm == "hmc") {
      chain = run_hmc_chain(hf.as_target(), start, config.kernel(), budget);
    } else {
      if (config.modes > d)
        throw Error("key modes: must be <= " + std::to_string(d) + " for this grid");
      const SvdFactors factors = svd_factors(f);
      const int k = config.modes;
      const LinearGaussianPosterior lf =
          2 * k < d ? LinearGaussianPosterior(factors.u.leftCols(k), factors.s.head(k).eval(),
                                              factors.v.leftCols(k), y, config.sigma_noise,
                                              config.sigma_prior)
                    : LinearGaussianPosterior(truncate_from_factors(factors, k), y,
                                              config.sigma_noise, config.sigma_prior);
      DualFidelityTarget dual{d, hf.as_log_density(), lf.as_log_density(),
                              [lf](const StateVector& x) { return lf.gradient(x); }};
      chain = run_mfhmc_chain(dual, start, config.kernel(), budget);
    }
    truth = {post_mean, std::nullopt, x_true};
  }

  const DiagnosticsReport report = make_report(chain, truth);
  const fs::path out(config.output_dir);
  write_chain(chain, out / "chain.csv", config.thin);
  write_report(report, out / "report.csv");
  print_chain_summary(chain, report);
  std::printf("wrote %s and %s\n", (out / "chain.csv").c_str(), (out / "report.csv").c_str());
  return 0;
}

int cmd_mvn_sweep(const RunConfig& config) {
  fs::create_directories(config.output_dir);
  SweepSpec spec;
  spec.budgets = config.budgets;
  spec.trajectory_grid = config.trajectories;
  spec.gammas = config.gammas;
  spec.n_seeds = config.n_seeds;
  spec.burn_in_frac = config.burn_in_frac;
  const auto cells =
      run_mvn_experiment(spec, config.dim, config.effective_dof(), config.seed, config.workers);
  const fs::path out(config.output_dir);
  write_mvn_cells_csv(cells, out / "mvn_cells.csv");

  // Seed-averaged table.
  struct Key {
    std::string algorithm;
    double gamma;
    double epsilon;
    int l;
    std::uint64_t budget;
    bool operator<(const Key& o) const {
      return std::tie(algorithm, gamma, epsilon, l, budget) <
             std::tie(o.algorithm, o.gamma, o.epsilon, o.l, o.budget);
    }
  };
  std::map<Key, std::vector<const MvnCell*>> groups;
  for (const auto& c : cells) {
    // NaN (hmc has no gamma) would poison the tuple ordering; key it as -1.
    const double gamma_key = c.algorithm == "hmc" ? -1.0 : c.gamma;
    groups[{c.algorithm, gamma_key, c.epsilon, c.n_leapfrog, c.budget}].push_back(&c);
  }
  std::printf("%-6s %-9s %-6s %-4s %-8s %-12s %-12s %-12s %-10s\n", "algo", "gamma", "eps", "L",
              "budget", "acc/n_hf", "ess/n_hf", "esjd/n_hf", "cov err %");
  for (const auto& [key, group] : groups) {
    double acc = 0, ess = 0, esjd = 0, err = 0;
    for (const auto* c : group) {
      acc += c->report.accepted_per_hf;
      ess += c->report.ess_per_hf;
      esjd += c->report.esjd_per_hf;
      err += c->rel_err_pct();
    }
    const double n = static_cast<double>(group.size());
    char gamma_str[24];
    if (key.gamma < 0.0)
      std::snprintf(gamma_str, sizeof gamma_str, "-");
    else
      std::snprintf(gamma_str, sizeof gamma_str, "%.2g", key.gamma);
    std::printf("%-6s %-9s %-6.3g %-4d %-8llu %-12.5g %-12.5g %-12.5g %-10.4g\n",
                key.algorithm.c_str(), gamma_str, key.epsilon, key.l,
                static_cast<unsigned long long>(key.budget), acc / n, ess / n, esjd / n, err / n);
  }
  std::printf("wrote %s\n", (out / "mvn_cells.csv").c_str());
  return 0;
}

int cmd_heat_table(const RunConfig& config) {
  fs::create_directories(config.output_dir);
  HeatExperimentSpec spec;
  spec.op = {config.grid_n, config.domain_length, config.alpha, config.n_time_steps,
             config.final_time};
  spec.sigma_noise = config.sigma_noise;
  spec.sigma_prior = config.sigma_prior;
  spec.epsilon = config.epsilon;
  spec.n_leapfrog = config.n_leapfrog;
  spec.n_steps = config.n_steps;
  spec.burn_in_frac = config.burn_in_frac;
  spec.n_seeds = config.n_seeds;
  spec.modes = config.modes_list;
  if (!config.true_field.empty()) {
    const Eigen::MatrixXd field = load_linear_operator(config.true_field);
    if (field.size() != spec.op.dim())
      throw Error("true-field has " + std::to_string(field.size()) + " entries, expected " +
                  std::to_string(spec.op.dim()));
    spec.x_true = Eigen::MatrixXd(field.transpose()).reshaped();
  }
  const auto cells = run_heat_experiment(spec, config.seed, config.workers);
  const fs::path out(config.output_dir);
  write_heat_cells_csv(cells, spec.epsilon, spec.n_leapfrog, out / "heat_cells.csv");
  write_heat_summary_csv(cells, out / "heat_summary.csv");

  std::map<std::pair<std::string, int>, std::vector<const HeatCell*>> groups;
  for (const auto& c : cells) groups[{c.algorithm, c.modes}].push_back(&c);
  std::printf("%-6s %-6s %-10s %-10s %-12s %-14s %-12s\n", "algo", "modes", "acc (LF)",
              "acc (HF)", "n_hf", "rejected HF", "mean err %");
  for (const auto& [key, group] : groups) {
    double lf = 0, hf = 0, nhf = 0, rej = 0, err = 0;
    for (const auto* c : group) {
      lf += c->lf_acceptance;
      hf += c->hf_acceptance;
      nhf += static_cast<double>(c->n_hf);
      rej += static_cast<double>(c->n_rejected_hf);
      err += c->rel_err_pct();
    }
    const double n = static_cast<double>(group.size());
    std::printf("%-6s %-6d %-10.3g %-10.4g %-12.1f %-14.1f %-12.4g\n", key.first.c_str(),
                key.second, lf / n, hf / n, nhf / n, rej / n, err / n);
  }
  std::printf("wrote %s and %s\n", (out / "heat_cells.csv").c_str(),
              (out / "heat_summary.csv").c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  if (args.empty() || args[0] == "--help" || args[0] == "-h") {
    std::fputs(usage(), args.empty() ? stderr : stdout);
    return args.empty() ? 2 : 0;
  }
  try {
    const RunConfig config = parse_config(args);
    switch (config.command) {
      case Command::sample:
        return cmd_sample(config);
      case Command::mvn_sweep:
        return cmd_mvn_sweep(config);
      case Command::heat_table:
        return cmd_heat_table(config);
    }
    return 1;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
