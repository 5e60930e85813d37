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

#include "mfhmc/targets.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <Eigen/Cholesky>

#include "mfhmc/rng.hpp"

namespace mfhmc {

DualFidelityTarget degenerate_dual_target(const DifferentiableTarget& t) {
  return {t.dim, t.log_density, t.log_density, t.gradient};
}

std::pair<double, StateVector> mvn_log_density_and_grad(const StateVector& x,
                                                        const Eigen::MatrixXd& precision) {
  if (x.size() != precision.rows() || precision.rows() != precision.cols())
    throw Error("mvn target: dimension mismatch (x has " + std::to_string(x.size()) +
                " entries, precision is " + std::to_string(precision.rows()) + "x" +
                std::to_string(precision.cols()) + ")");
  StateVector ax = precision * x;
  return {-0.5 * x.dot(ax), -ax};
}

MvnTarget::MvnTarget(Eigen::MatrixXd precision) {
  if (precision.rows() != precision.cols()) throw Error("mvn target: precision must be square");
  const double asym = (precision - precision.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * std::max(1.0, precision.cwiseAbs().maxCoeff()))
    throw Error("mvn target: precision not symmetric (max asymmetry " + std::to_string(asym) + ")");
  Eigen::LLT<Eigen::MatrixXd> llt(precision);
  if (llt.info() != Eigen::Success)
    throw Error("mvn target: precision is not positive definite (Cholesky failed)");
  precision_ = std::make_shared<const Eigen::MatrixXd>(std::move(precision));
}

double MvnTarget::log_density(const StateVector& x) const {
  return -0.5 * x.dot(*precision_ * x);
}

StateVector MvnTarget::gradient(const StateVector& x) const { return -(*precision_ * x); }

DifferentiableTarget MvnTarget::as_target() const {
  auto a = precision_;
  return {a->rows(),
          [a](const StateVector& x) { return -0.5 * x.dot(*a * x); },
          [a](const StateVector& x) -> StateVector { return -(*a * x); }};
}

std::pair<double, StateVector> linear_gaussian_log_density_and_grad(
    const StateVector& x, const Eigen::MatrixXd& forward, const Eigen::VectorXd& data,
    double sigma_noise, double sigma_prior) {
  if (forward.cols() != x.size() || forward.rows() != data.size())
    throw Error("linear-gaussian target: shape mismatch (F is " + std::to_string(forward.rows()) +
                "x" + std::to_string(forward.cols()) + ", x has " + std::to_string(x.size()) +
                " entries, y has " + std::to_string(data.size()) + ")");
  if (!(sigma_noise > 0.0) || !(sigma_prior > 0.0))
    throw Error("linear-gaussian target: sigma-noise and sigma-prior must be > 0");
  const double inv_n2 = 1.0 / (sigma_noise * sigma_noise);
  const double inv_p2 = 1.0 / (sigma_prior * sigma_prior);
  Eigen::VectorXd residual = data - forward * x;
  const double value = -0.5 * inv_n2 * residual.squaredNorm() - 0.5 * inv_p2 * x.squaredNorm();
  StateVector grad = inv_n2 * (forward.transpose() * residual) - inv_p2 * x;
  return {value, std::move(grad)};
}

struct LinearGaussianPosterior::Impl {
  // dense path
  Eigen::MatrixXd gram;      // F'F
  Eigen::VectorXd ft_data;   // F'y
  double data_sq = 0.0;      // y'y
  // factored path
  bool factored = false;
  Eigen::MatrixXd u;
  Eigen::VectorXd s;
  Eigen::MatrixXd v;
  Eigen::VectorXd data;
  double inv_n2 = 0.0;
  double inv_p2 = 0.0;
  Eigen::Index dim = 0;
};

namespace {

void check_sigmas(double sigma_noise, double sigma_prior) {
  if (!(sigma_noise > 0.0) || !(sigma_prior > 0.0))
    throw Error("linear-gaussian target: sigma-noise and sigma-prior must be > 0");
}

}  // namespace

LinearGaussianPosterior::LinearGaussianPosterior(Eigen::MatrixXd forward, Eigen::VectorXd data,
                                                 double sigma_noise, double sigma_prior) {
  check_sigmas(sigma_noise, sigma_prior);
  if (forward.rows() != data.size())
    throw Error("linear-gaussian target: F has " + std::to_string(forward.rows()) +
                " rows but y has " + std::to_string(data.size()) + " entries");
  auto impl = std::make_shared<Impl>();
  impl->gram = forward.transpose() * forward;
  impl->ft_data = forward.transpose() * data;
  impl->data_sq = data.squaredNorm();
  impl->inv_n2 = 1.0 / (sigma_noise * sigma_noise);
  impl->inv_p2 = 1.0 / (sigma_prior * sigma_prior);
  impl->dim = forward.cols();
  impl_ = std::move(impl);
}

LinearGaussianPosterior::LinearGaussianPosterior(Eigen::MatrixXd u, Eigen::VectorXd singular_values,
                                                 Eigen::MatrixXd v, Eigen::VectorXd data,
                                                 double sigma_noise, double sigma_prior) {
  check_sigmas(sigma_noise, sigma_prior);
  if (u.cols() != singular_values.size() || v.cols() != singular_values.size() ||
      u.rows() != data.size())
    throw Error("linear-gaussian target: inconsistent factored operator shapes");
  auto impl = std::make_shared<Impl>();
  impl->factored = true;
  impl->u = std::move(u);
  impl->s = std::move(singular_values);
  impl->v = std::move(v);
  impl->data = std::move(data);
  impl->inv_n2 = 1.0 / (sigma_noise * sigma_noise);
  impl->inv_p2 = 1.0 / (sigma_prior * sigma_prior);
  impl->dim = impl->v.rows();
  impl_ = std::move(impl);
}

Eigen::Index LinearGaussianPosterior::dim() const { return impl_->dim; }

double LinearGaussianPosterior::log_density(const StateVector& x) const {
  const Impl& im = *impl_;
  if (x.size() != im.dim)
    throw Error("linear-gaussian target: x has " + std::to_string(x.size()) +
                " entries, expected " + std::to_string(im.dim));
  if (im.factored) {
    Eigen::VectorXd residual = im.data - im.u * (im.s.asDiagonal() * (im.v.transpose() * x));
    return -0.5 * im.inv_n2 * residual.squaredNorm() - 0.5 * im.inv_p2 * x.squaredNorm();
  }
  const double misfit = im.data_sq - 2.0 * im.ft_data.dot(x) + x.dot(im.gram * x);
  return -0.5 * im.inv_n2 * misfit - 0.5 * im.inv_p2 * x.squaredNorm();
}

StateVector LinearGaussianPosterior::gradient(const StateVector& x) const {
  const Impl& im = *impl_;
  if (x.size() != im.dim)
    throw Error("linear-gaussian target: x has " + std::to_string(x.size()) +
                " entries, expected " + std::to_string(im.dim));
  if (im.factored) {
    Eigen::VectorXd residual = im.data - im.u * (im.s.asDiagonal() * (im.v.transpose() * x));
    return im.inv_n2 * (im.v * (im.s.asDiagonal() * (im.u.transpose() * residual))) -
           im.inv_p2 * x;
  }
  return im.inv_n2 * (im.ft_data - im.gram * x) - im.inv_p2 * x;
}

std::pair<double, StateVector> LinearGaussianPosterior::log_density_and_grad(
    const StateVector& x) const {
  const Impl& im = *impl_;
  if (im.factored) {
    Eigen::VectorXd residual = im.data - im.u * (im.s.asDiagonal() * (im.v.transpose() * x));
    const double value =
        -0.5 * im.inv_n2 * residual.squaredNorm() - 0.5 * im.inv_p2 * x.squaredNorm();
    StateVector grad =
        im.inv_n2 * (im.v * (im.s.asDiagonal() * (im.u.transpose() * residual))) - im.inv_p2 * x;
    return {value, std::move(grad)};
  }
  Eigen::VectorXd gx = im.gram * x;
  const double misfit = im.data_sq - 2.0 * im.ft_data.dot(x) + x.dot(gx);
  const double value = -0.5 * im.inv_n2 * misfit - 0.5 * im.inv_p2 * x.squaredNorm();
  StateVector grad = im.inv_n2 * (im.ft_data - gx) - im.inv_p2 * x;
  return {value, std::move(grad)};
}

DifferentiableTarget LinearGaussianPosterior::as_target() const {
  auto impl = impl_;
  LinearGaussianPosterior self = *this;
  return {impl->dim,
          [self](const StateVector& x) { return self.log_density(x); },
          [self](const StateVector& x) { return self.gradient(x); }};
}

LogDensityFn LinearGaussianPosterior::as_log_density() const {
  LinearGaussianPosterior self = *this;
  return [self](const StateVector& x) { return self.log_density(x); };
}

Eigen::MatrixXd load_linear_operator(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open matrix file: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error("matrix file is empty: " + path.string());
  Eigen::Index rows = 0, cols = 0;
  {
    std::istringstream header(line);
    char comma = 0;
    if (!(header >> rows >> comma >> cols) || comma != ',' || rows < 1 || cols < 1)
      throw Error("matrix file " + path.string() + ": bad header '" + line +
                  "' (expected 'rows,cols')");
  }
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (!std::getline(in, line))
      throw Error("matrix file " + path.string() + ": missing row " + std::to_string(r));
    std::istringstream ls(line);
    std::string cell;
    Eigen::Index c = 0;
    while (std::getline(ls, cell, ',')) {
      if (c >= cols)
        throw Error("matrix file " + path.string() + ": row " + std::to_string(r) +
                    " has more than " + std::to_string(cols) + " entries");
      std::size_t used = 0;
      double value = 0.0;
      try {
        value = std::stod(cell, &used);
      } catch (const std::exception&) {
        throw Error("matrix file " + path.string() + ": row " + std::to_string(r) +
                    " has a non-numeric entry '" + cell + "'");
      }
      m(r, c++) = value;
    }
    if (c != cols)
      throw Error("matrix file " + path.string() + ": row " + std::to_string(r) + " has " +
                  std::to_string(c) + " entries, expected " + std::to_string(cols));
  }
  return m;
}

void save_linear_operator(const Eigen::MatrixXd& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write matrix file: " + path.string());
  out << m.rows() << "," << m.cols() << "\n";
  char buf[40];
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", m(r, c));
      out << buf << (c + 1 == m.cols() ? "" : ",");
    }
    out << "\n";
  }
  if (!out) throw Error("write failed: " + path.string());
}

double max_gradient_fd_error(const DifferentiableTarget& target, int n_points,
                             std::uint64_t seed) {
  CounterRng rng(seed, 0, RngStream::generic);
  double worst = 0.0;
  for (int p = 0; p < n_points; ++p) {
    StateVector x = rng.normal_vector(target.dim);
    StateVector grad = target.gradient(x);
    StateVector fd(target.dim);
    for (Eigen::Index i = 0; i < target.dim; ++i) {
      const double h = 1e-4 * std::max(1.0, std::abs(x[i]));
      StateVector xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      fd[i] = (target.log_density(xp) - target.log_density(xm)) / (2.0 * h);
    }
    const double scale = std::max(1.0, grad.norm());
    worst = std::max(worst, (grad - fd).norm() / scale);
  }
  return worst;
}

}  // namespace mfhmc
