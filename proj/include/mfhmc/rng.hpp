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

#ifndef MFHMC_RNG_HPP
#define MFHMC_RNG_HPP

#include <cmath>
#include <cstdint>
#include <numbers>

#include <Eigen/Core>

namespace mfhmc {

/// Purpose tag that keys an independent random substream.
///
/// Every chain iteration owns one substream per purpose, keyed by
/// (seed, iteration, stream). Draws from one substream never shift the
/// values produced by another, so an HMC chain and an MFHMC chain driven
/// by the same seed consume identical momentum and stage-1 values even
/// though only MFHMC touches the stage-2 stream. The per-iteration order
/// of use is: momentum draw, stage-1 uniform, stage-2 uniform.
enum class RngStream : std::uint64_t {
  momentum = 1,
  stage1 = 2,
  stage2 = 3,
  wishart = 4,
  measurement_noise = 5,
  generic = 6,
};

namespace detail {

// splitmix64 finalizer; full-period mixer over 64-bit counters.
inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

}  // namespace detail

/// Counter-based pseudo-random stream.
///
/// Output k of the stream keyed by (seed, iteration, stream) is the pure
/// function mix64(key + k * golden); no hidden global state, freely
/// reconstructible at any point of a run.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t iteration, RngStream stream)
      : counter_(0), has_spare_(false), spare_(0.0) {
    constexpr std::uint64_t golden = 0x9E3779B97F4A7C15ull;
    std::uint64_t k = detail::mix64(seed + golden);
    k = detail::mix64(k ^ (iteration * 0xD6E8FEB86659FD93ull));
    k = detail::mix64(k ^ (static_cast<std::uint64_t>(stream) * 0xCA5A826395121157ull));
    key_ = k;
  }

  std::uint64_t next_u64() {
    constexpr std::uint64_t golden = 0x9E3779B97F4A7C15ull;
    ++counter_;
    return detail::mix64(key_ + counter_ * golden);
  }

  /// Uniform draw in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Standard normal draw via Box-Muller; consumes uniforms in pairs.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform01();  // (0, 1], keeps log finite
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  Eigen::VectorXd normal_vector(Eigen::Index n) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = normal();
    return v;
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_;
  bool has_spare_;
  double spare_;
};

/// Derives a child seed, e.g. one seed per experiment cell.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return detail::mix64(detail::mix64(seed + 0x9E3779B97F4A7C15ull) ^
                       (index * 0xD6E8FEB86659FD93ull));
}

}  // namespace mfhmc

#endif  // MFHMC_RNG_HPP
