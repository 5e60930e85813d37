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

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "mfhmc/cli_io.hpp"
#include "mfhmc/diagnostics.hpp"
#include "mfhmc/experiments.hpp"
#include "mfhmc/forward_models.hpp"
#include "mfhmc/rng.hpp"
#include "mfhmc/sampler.hpp"
#include "mfhmc/targets.hpp"

namespace py = pybind11;
using namespace mfhmc;

namespace {

DualFidelityTarget make_dual_target(Eigen::Index dim, LogDensityFn hf, LogDensityFn lf,
                                    GradientFn lf_grad) {
  return {dim, std::move(hf), std::move(lf), std::move(lf_grad)};
}

}  // namespace

PYBIND11_MODULE(mfhmc, m) {
  m.doc() = "Multi-fidelity Hamiltonian Monte Carlo sampling library";

  py::register_exception<Error>(m, "MfhmcError");

  py::class_<KernelConfig>(m, "KernelConfig")
      .def(py::init([](double epsilon, int n_leapfrog, std::int64_t n_steps, double burn_in_frac,
                       std::uint64_t seed) {
             KernelConfig c{epsilon, n_leapfrog, n_steps, burn_in_frac, seed};
             c.validate();
             return c;
           }),
           py::arg("epsilon"), py::arg("n_leapfrog"), py::arg("n_steps"),
           py::arg("burn_in_frac") = 0.25, py::arg("seed") = 0)
      .def_readwrite("epsilon", &KernelConfig::epsilon)
      .def_readwrite("n_leapfrog", &KernelConfig::n_leapfrog)
      .def_readwrite("n_steps", &KernelConfig::n_steps)
      .def_readwrite("burn_in_frac", &KernelConfig::burn_in_frac)
      .def_readwrite("seed", &KernelConfig::seed);

  py::class_<ChainRecord>(m, "ChainRecord")
      .def_property_readonly("samples", [](const ChainRecord& c) { return c.samples; })
      .def_property_readonly("stage1_accepted",
                             [](const ChainRecord& c) { return c.stage1_accepted; })
      .def_property_readonly("stage2_accepted",
                             [](const ChainRecord& c) { return c.stage2_accepted; })
      .def_property_readonly("n_hf_cumulative",
                             [](const ChainRecord& c) { return c.n_hf_cumulative; })
      .def_property_readonly("kind",
                             [](const ChainRecord& c) { return std::string(kernel_name(c.kind)); })
      .def("n_iterations", &ChainRecord::n_iterations)
      .def("stage1_count", &ChainRecord::stage1_count)
      .def("stage2_count", &ChainRecord::stage2_count)
      .def("hf_evaluations", &ChainRecord::hf_evaluations)
      .def("grad_evaluations", &ChainRecord::grad_evaluations)
      .def("hf_work", &ChainRecord::hf_work);

  py::class_<DifferentiableTarget>(m, "DifferentiableTarget")
      .def(py::init(
               [](Eigen::Index dim, LogDensityFn log_density, GradientFn gradient) {
                 return DifferentiableTarget{dim, std::move(log_density), std::move(gradient)};
               }),
           py::arg("dim"), py::arg("log_density"), py::arg("gradient"))
      .def_readonly("dim", &DifferentiableTarget::dim)
      .def("log_density", [](const DifferentiableTarget& t, const StateVector& x) {
        return t.log_density(x);
      })
      .def("gradient",
           [](const DifferentiableTarget& t, const StateVector& x) { return t.gradient(x); });

  py::class_<DualFidelityTarget>(m, "DualFidelityTarget")
      .def(py::init(&make_dual_target), py::arg("dim"), py::arg("hf_log_density"),
           py::arg("lf_log_density"), py::arg("lf_gradient"))
      .def_readonly("dim", &DualFidelityTarget::dim);

  m.def("degenerate_dual_target", &degenerate_dual_target, py::arg("target"),
        "Dual target whose two fidelities are the same model");

  py::class_<MvnTarget>(m, "MvnTarget")
      .def(py::init<Eigen::MatrixXd>(), py::arg("precision"))
      .def("log_density", &MvnTarget::log_density)
      .def("gradient", &MvnTarget::gradient)
      .def("as_target", &MvnTarget::as_target)
      .def_property_readonly("dim", &MvnTarget::dim);

  py::class_<LinearGaussianPosterior>(m, "LinearGaussianPosterior")
      .def(py::init<Eigen::MatrixXd, Eigen::VectorXd, double, double>(), py::arg("forward"),
           py::arg("data"), py::arg("sigma_noise"), py::arg("sigma_prior"))
      .def("log_density", &LinearGaussianPosterior::log_density)
      .def("gradient", &LinearGaussianPosterior::gradient)
      .def("as_target", &LinearGaussianPosterior::as_target)
      .def_property_readonly("dim", &LinearGaussianPosterior::dim);

  m.def("mvn_log_density_and_grad", &mvn_log_density_and_grad, py::arg("x"), py::arg("precision"));
  m.def("linear_gaussian_log_density_and_grad", &linear_gaussian_log_density_and_grad,
        py::arg("x"), py::arg("forward"), py::arg("data"), py::arg("sigma_noise"),
        py::arg("sigma_prior"));

  m.def("run_hmc_chain", &run_hmc_chain, py::arg("target"), py::arg("start"), py::arg("config"),
        py::arg("hf_budget") = std::nullopt);
  m.def("run_mfhmc_chain", &run_mfhmc_chain, py::arg("target"), py::arg("start"),
        py::arg("config"), py::arg("hf_budget") = std::nullopt);

  // forward models
  py::class_<HeatOperatorSpec>(m, "HeatOperatorSpec")
      .def(py::init([](int grid_n, double domain_length, double alpha, int n_time_steps,
                       double final_time) {
             HeatOperatorSpec s{grid_n, domain_length, alpha, n_time_steps, final_time};
             s.validate();
             return s;
           }),
           py::arg("grid_n") = 32, py::arg("domain_length") = 2.0 * std::numbers::pi,
           py::arg("alpha") = 0.64, py::arg("n_time_steps") = 100, py::arg("final_time") = 1.0)
      .def_readwrite("grid_n", &HeatOperatorSpec::grid_n)
      .def_readwrite("alpha", &HeatOperatorSpec::alpha)
      .def("dim", &HeatOperatorSpec::dim)
      .def("spacing", &HeatOperatorSpec::spacing);

  m.def("build_heat_operator", &build_heat_operator, py::arg("spec"));
  m.def("tsvd_truncate", &tsvd_truncate, py::arg("f"), py::arg("k"));
  m.def("spectral_norm", &spectral_norm, py::arg("f"), py::arg("iterations") = 200);
  m.def(
      "sample_wishart_precision",
      [](int dim, int dof, std::uint64_t seed) {
        return sample_wishart_precision({dim, dof, seed});
      },
      py::arg("dim"), py::arg("dof"), py::arg("seed") = 0);
  m.def("build_lf_covariance", &build_lf_covariance, py::arg("sigma_hf"), py::arg("gamma"));
  m.def("conjugate_posterior", &conjugate_posterior, py::arg("forward"), py::arg("data"),
        py::arg("sigma_noise"), py::arg("sigma_prior"));
  m.def("make_heat_measurement", &make_heat_measurement, py::arg("forward"), py::arg("x_true"),
        py::arg("noise_sigma"), py::arg("seed"));
  m.def("default_true_field", &default_true_field, py::arg("grid_n"));

  // diagnostics
  py::class_<DiagnosticsReport>(m, "DiagnosticsReport")
      .def_readonly("accepted_per_hf", &DiagnosticsReport::accepted_per_hf)
      .def_readonly("ess_per_hf", &DiagnosticsReport::ess_per_hf)
      .def_readonly("esjd_per_hf", &DiagnosticsReport::esjd_per_hf)
      .def_readonly("rel_error_mean_pct", &DiagnosticsReport::rel_error_mean_pct)
      .def_readonly("rel_error_cov_pct", &DiagnosticsReport::rel_error_cov_pct)
      .def_readonly("coverage95", &DiagnosticsReport::coverage95)
      .def_readonly("n_hf_total", &DiagnosticsReport::n_hf_total)
      .def_readonly("m_post_burnin", &DiagnosticsReport::m_post_burnin);

  m.def("autocorrelation", &autocorrelation, py::arg("series"), py::arg("lag"));
  m.def("effective_sample_size", &effective_sample_size, py::arg("series"));
  m.def("ess_per_hf", &ess_per_hf, py::arg("chain"), py::arg("burn_in_frac"),
        py::arg("n_hf_total"));
  m.def("esjd_per_hf", &esjd_per_hf, py::arg("chain"), py::arg("burn_in_frac"),
        py::arg("n_hf_total"));
  m.def("relative_error_pct",
        py::overload_cast<const Eigen::VectorXd&, const Eigen::VectorXd&>(&relative_error_pct),
        py::arg("v_mcmc"), py::arg("v_true"));
  m.def("relative_error_matrix_pct",
        py::overload_cast<const Eigen::MatrixXd&, const Eigen::MatrixXd&>(&relative_error_pct),
        py::arg("v_mcmc"), py::arg("v_true"));
  m.def("coverage95", &coverage95, py::arg("post_mean"), py::arg("post_std"), py::arg("truth"));
  m.def("accepted_moves_per_hf", &accepted_moves_per_hf, py::arg("chain"));
  m.def(
      "make_report",
      [](const ChainRecord& chain, const Eigen::VectorXd& mean_true,
         std::optional<Eigen::MatrixXd> cov_true, std::optional<Eigen::VectorXd> coverage_truth) {
        return make_report(chain, {mean_true, std::move(cov_true), std::move(coverage_truth)});
      },
      py::arg("chain"), py::arg("mean_true"), py::arg("cov_true") = std::nullopt,
      py::arg("coverage_truth") = std::nullopt);

  // io
  m.def("load_linear_operator", &load_linear_operator, py::arg("path"));
  m.def("save_linear_operator", &save_linear_operator, py::arg("matrix"), py::arg("path"));
  m.def("write_chain", &write_chain, py::arg("chain"), py::arg("path"), py::arg("thin") = 1);
  m.def("write_report", &write_report, py::arg("report"), py::arg("path"));
}
