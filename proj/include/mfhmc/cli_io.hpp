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

#ifndef MFHMC_CLI_IO_HPP
#define MFHMC_CLI_IO_HPP

#include <cstdint>
#include <filesystem>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include "mfhmc/diagnostics.hpp"
#include "mfhmc/types.hpp"

namespace mfhmc {

enum class Command { sample, mvn_sweep, heat_table };

/// Run configuration shared by all subcommands. Values resolve as
/// defaults < config file < command-line flags < MFHMC_SEED environment
/// variable (seed only). Unknown keys are rejected.
struct RunConfig {
  Command command = Command::sample;
  std::string algorithm = "mfhmc";  // hmc | mfhmc
  std::string problem = "mvn";      // mvn | heat   (sample command)

  double epsilon = 0.1;
  int n_leapfrog = 10;
  std::int64_t n_steps = 1000;
  double burn_in_frac = 0.25;
  std::uint64_t seed = 1;

  double gamma = 1e-6;
  int modes = 200;
  int dim = 50;
  int dof = 0;  // 0 -> dim
  std::uint64_t budget = 0;  // 0 -> uncapped

  std::vector<std::uint64_t> budgets = {10000, 20000, 30000, 40000, 50000};
  std::vector<double> gammas = {1e-4, 1e-5, 1e-6, 1e-7};
  std::vector<std::pair<double, int>> trajectories = {{0.05, 10}, {0.1, 25}, {0.1, 50}};
  std::vector<int> modes_list = {25, 50, 75, 100, 200};
  int n_seeds = 5;

  int grid_n = 32;
  int n_time_steps = 100;
  double alpha = 0.64;
  double domain_length = 2.0 * std::numbers::pi;
  double final_time = 1.0;
  double sigma_noise = 0.1;
  double sigma_prior = 0.1;
  std::string true_field;  // matrix CSV path; empty -> built-in stand-in field

  std::string output_dir = ".";
  int thin = 1;
  int workers = 0;  // 0 -> hardware concurrency

  std::set<std::string> keys_set;  // keys given explicitly (file, flag, or env)

  KernelConfig kernel() const {
    return {epsilon, n_leapfrog, n_steps, burn_in_frac, seed};
  }
  int effective_dof() const { return dof == 0 ? dim : dof; }
  bool is_set(const std::string& key) const { return keys_set.count(key) > 0; }
  void validate() const;
};

/// Parses "<command> [--config file] [--key value ...]". Flags mirror config
/// file keys in --kebab-case; a config file holds flat key=value lines with
/// '#' comments. Throws Error naming the offending key on any unknown key,
/// type mismatch, or constraint violation.
RunConfig parse_config(const std::vector<std::string>& args);

const char* usage();

/// Writes "iter,stage1,stage2,n_hf_cum,x_0,...,x_{D-1}" rows for iterations
/// 0, thin, 2*thin, ...; floats carry 17 significant digits so a re-read is
/// lossless. Byte output is a pure function of the record.
void write_chain(const ChainRecord& chain, const std::filesystem::path& path, int thin = 1);

/// Reads back a chain CSV written by write_chain (samples and counters).
ChainRecord read_chain(const std::filesystem::path& path);

/// Writes the "metric,value" CSV, one row per DiagnosticsReport field.
void write_report(const DiagnosticsReport& report, const std::filesystem::path& path);

}  // namespace mfhmc

#endif  // MFHMC_CLI_IO_HPP
