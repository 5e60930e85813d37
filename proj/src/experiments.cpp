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

#include "mfhmc/experiments.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <thread>

#include <Eigen/Cholesky>

#include "mfhmc/rng.hpp"
#include "mfhmc/sampler.hpp"
#include "mfhmc/targets.hpp"

namespace mfhmc {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

int resolve_workers(int n_workers) {
  if (n_workers > 0) return n_workers;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs fn(0..n-1) on a small worker pool; rethrows the first failure.
void parallel_for(std::size_t n, int n_workers, const std::function<void(std::size_t)>& fn) {
  const int workers = std::min<int>(resolve_workers(n_workers), static_cast<int>(n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_cells_header(std::ofstream& out) {
  out << "algorithm,gamma_or_modes,epsilon,L,budget,seed,accepted_per_hf,ess_per_hf,"
         "esjd_per_hf,rel_err_pct,coverage95,n_hf\n";
}

}  // namespace

std::vector<MvnCell> run_mvn_experiment(const SweepSpec& spec, int dim, int dof,
                                        std::uint64_t seed0, int n_workers) {
  spec.validate();
  WishartSpec wishart{dim, dof, seed0};
  const Eigen::MatrixXd a_hf = sample_wishart_precision(wishart);
  const Eigen::Index d = a_hf.rows();
  const Eigen::MatrixXd sigma_hf =
      Eigen::LLT<Eigen::MatrixXd>(a_hf).solve(Eigen::MatrixXd::Identity(d, d));

  const MvnTarget hf_target(a_hf);
  const DifferentiableTarget hf = hf_target.as_target();

  // One LF precision per gamma, inverted once at setup.
  std::vector<Eigen::MatrixXd> a_lf;
  a_lf.reserve(spec.gammas.size());
  for (double gamma : spec.gammas) {
    const Eigen::MatrixXd sigma_lf = build_lf_covariance(sigma_hf, gamma);
    a_lf.push_back(
        Eigen::LLT<Eigen::MatrixXd>(sigma_lf).solve(Eigen::MatrixXd::Identity(d, d)));
  }

  struct CellJob {
    bool is_mfhmc;
    std::size_t gamma_index;
    double epsilon;
    int n_leapfrog;
    std::uint64_t budget;
    std::uint64_t seed;
  };
  std::vector<CellJob> jobs;
  for (const auto& [epsilon, n_leapfrog] : spec.trajectory_grid) {
    for (std::uint64_t budget : spec.budgets) {
      for (int s = 0; s < spec.n_seeds; ++s) {
        const std::uint64_t seed = seed0 + 1 + static_cast<std::uint64_t>(s);
        jobs.push_back({false, 0, epsilon, n_leapfrog, budget, seed});
        for (std::size_t g = 0; g < spec.gammas.size(); ++g)
          jobs.push_back({true, g, epsilon, n_leapfrog, budget, seed});
      }
    }
  }

  const TruthRefs truth{Eigen::VectorXd::Zero(d), sigma_hf, Eigen::VectorXd::Zero(d)};
  std::vector<MvnCell> cells(jobs.size());
  parallel_for(jobs.size(), n_workers, [&](std::size_t i) {
    const CellJob& job = jobs[i];
    KernelConfig cfg;
    cfg.epsilon = job.epsilon;
    cfg.n_leapfrog = job.n_leapfrog;
    cfg.burn_in_frac = spec.burn_in_frac;
    cfg.seed = job.seed;

    const StateVector start = StateVector::Zero(d);
    ChainRecord chain;
    if (job.is_mfhmc) {
      cfg.n_steps = static_cast<std::int64_t>(8 * job.budget);  // hard cap; budget stops earlier
      const MvnTarget lf_target(a_lf[job.gamma_index]);
      DualFidelityTarget dual{d, hf.log_density, lf_target.as_target().log_density,
                              lf_target.as_target().gradient};
      chain = run_mfhmc_chain(dual, start, cfg, job.budget);
    } else {
      const auto work_per_step = 2ull * static_cast<std::uint64_t>(job.n_leapfrog);
      cfg.n_steps =
          static_cast<std::int64_t>((job.budget + work_per_step - 1) / work_per_step);
      chain = run_hmc_chain(hf, start, cfg, job.budget);
    }

    MvnCell cell;
    cell.algorithm = job.is_mfhmc ? "mfhmc" : "hmc";
    cell.gamma = job.is_mfhmc ? spec.gammas[job.gamma_index] : kNan;
    cell.epsilon = job.epsilon;
    cell.n_leapfrog = job.n_leapfrog;
    cell.budget = job.budget;
    cell.seed = job.seed;
    const std::int64_t evaluated = job.is_mfhmc ? chain.stage1_count() : chain.n_iterations();
    cell.stage2_acceptance =
        evaluated > 0 ? static_cast<double>(chain.stage2_count()) / static_cast<double>(evaluated)
                      : kNan;
    cell.report = make_report(chain, truth);
    cells[i] = std::move(cell);
  });
  return cells;
}

std::vector<HeatCell> run_heat_experiment(const HeatExperimentSpec& spec, std::uint64_t seed0,
                                          int n_workers) {
  spec.validate();
  const Eigen::Index d = spec.op.dim();
  const Eigen::MatrixXd f = build_heat_operator(spec.op);
  const Eigen::VectorXd x_true =
      spec.x_true.size() > 0 ? spec.x_true : default_true_field(spec.op.grid_n);
  if (x_true.size() != d)
    throw Error("heat experiment: true field has " + std::to_string(x_true.size()) +
                " entries, expected " + std::to_string(d));

  // One measured field, fixed across sampler seeds.
  const Eigen::VectorXd y =
      make_heat_measurement(f, x_true, spec.sigma_noise, derive_seed(seed0, 0x6d656173));
  const auto [posterior_mean, posterior_cov] =
      conjugate_posterior(f, y, spec.sigma_noise, spec.sigma_prior);

  const LinearGaussianPosterior hf_posterior(f, y, spec.sigma_noise, spec.sigma_prior);
  const LogDensityFn hf_log_density = hf_posterior.as_log_density();

  const SvdFactors factors = svd_factors(f);

  // One LF posterior per retained-modes value. Past half rank the dense
  // reconstruction evaluates cheaper than the factored form.
  std::vector<LinearGaussianPosterior> lf_posteriors;
  lf_posteriors.reserve(spec.modes.size());
  for (int k : spec.modes) {
    if (2 * k < d) {
      lf_posteriors.emplace_back(factors.u.leftCols(k), factors.s.head(k).eval(),
                                 factors.v.leftCols(k), y, spec.sigma_noise, spec.sigma_prior);
    } else {
      lf_posteriors.emplace_back(truncate_from_factors(factors, k), y, spec.sigma_noise,
                                 spec.sigma_prior);
    }
  }

  struct CellJob {
    bool is_mfhmc;
    std::size_t modes_index;
    std::uint64_t seed;
  };
  std::vector<CellJob> jobs;
  for (int s = 0; s < spec.n_seeds; ++s) {
    const std::uint64_t seed = seed0 + 1 + static_cast<std::uint64_t>(s);
    if (spec.include_hmc) jobs.push_back({false, 0, seed});
    for (std::size_t m = 0; m < spec.modes.size(); ++m) jobs.push_back({true, m, seed});
  }

  const TruthRefs truth{posterior_mean, std::nullopt, x_true};
  std::vector<HeatCell> cells(jobs.size());
  parallel_for(jobs.size(), n_workers, [&](std::size_t i) {
    const CellJob& job = jobs[i];
    KernelConfig cfg;
    cfg.epsilon = spec.epsilon;
    cfg.n_leapfrog = spec.n_leapfrog;
    cfg.n_steps = spec.n_steps;
    cfg.burn_in_frac = spec.burn_in_frac;
    cfg.seed = job.seed;

    const StateVector start = StateVector::Zero(d);
    HeatCell cell;
    cell.seed = job.seed;
    if (job.is_mfhmc) {
      DualFidelityTarget dual{d, hf_log_density,
                              lf_posteriors[job.modes_index].as_log_density(),
                              [lf = lf_posteriors[job.modes_index]](const StateVector& x) {
                                return lf.gradient(x);
                              }};
      const ChainRecord chain = run_mfhmc_chain(dual, start, cfg);
      cell.algorithm = "mfhmc";
      cell.modes = spec.modes[job.modes_index];
      const std::int64_t s1 = chain.stage1_count();
      const std::int64_t s2 = chain.stage2_count();
      cell.lf_acceptance = static_cast<double>(s1) / static_cast<double>(chain.n_iterations());
      cell.hf_acceptance = s1 > 0 ? static_cast<double>(s2) / static_cast<double>(s1) : kNan;
      cell.n_hf = chain.hf_evaluations();
      cell.n_rejected_hf = static_cast<std::uint64_t>(s1 - s2);
      cell.report = make_report(chain, truth);
    } else {
      const ChainRecord chain = run_hmc_chain(hf_posterior.as_target(), start, cfg);
      cell.algorithm = "hmc";
      cell.modes = static_cast<int>(d);
      cell.lf_acceptance = kNan;
      const std::int64_t accepted = chain.stage2_count();
      cell.hf_acceptance =
          static_cast<double>(accepted) / static_cast<double>(chain.n_iterations());
      cell.n_hf = chain.hf_work();
      cell.n_rejected_hf = 2ull * static_cast<std::uint64_t>(cfg.n_leapfrog) *
                           static_cast<std::uint64_t>(chain.n_iterations() - accepted);
      cell.report = make_report(chain, truth);
    }
    cells[i] = std::move(cell);
  });
  return cells;
}

void write_mvn_cells_csv(const std::vector<MvnCell>& cells, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  write_cells_header(out);
  for (const auto& c : cells) {
    out << c.algorithm << "," << format_double(c.gamma) << "," << format_double(c.epsilon) << ","
        << c.n_leapfrog << "," << c.budget << "," << c.seed << ","
        << format_double(c.report.accepted_per_hf) << "," << format_double(c.report.ess_per_hf)
        << "," << format_double(c.report.esjd_per_hf) << "," << format_double(c.rel_err_pct())
        << "," << format_double(c.report.coverage95) << "," << c.report.n_hf_total << "\n";
  }
  if (!out) throw Error("write failed: " + path.string());
}

void write_heat_cells_csv(const std::vector<HeatCell>& cells, double epsilon, int n_leapfrog,
                          const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  write_cells_header(out);
  for (const auto& c : cells) {
    out << c.algorithm << "," << c.modes << "," << format_double(epsilon) << "," << n_leapfrog
        << ",0," << c.seed << "," << format_double(c.report.accepted_per_hf) << ","
        << format_double(c.report.ess_per_hf) << "," << format_double(c.report.esjd_per_hf) << ","
        << format_double(c.rel_err_pct()) << "," << format_double(c.report.coverage95) << ","
        << c.report.n_hf_total << "\n";
  }
  if (!out) throw Error("write failed: " + path.string());
}

void write_heat_summary_csv(const std::vector<HeatCell>& cells,
                            const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "algorithm,modes,seed,lf_acceptance,hf_acceptance,n_hf,n_rejected_hf,"
         "mean_rel_err_pct,coverage95\n";
  for (const auto& c : cells) {
    out << c.algorithm << "," << c.modes << "," << c.seed << ","
        << format_double(c.lf_acceptance) << "," << format_double(c.hf_acceptance) << ","
        << c.n_hf << "," << c.n_rejected_hf << "," << format_double(c.rel_err_pct()) << ","
        << format_double(c.report.coverage95) << "\n";
  }
  if (!out) throw Error("write failed: " + path.string());
}

}  // namespace mfhmc
