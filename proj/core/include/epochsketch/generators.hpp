//  Copyright 2026 The epochsketch Authors
//
//  Licensed under the Apache License, Version 2.0 (the "License");
//  you may not use this file except in compliance with the License.
//  You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
//  Unless required by applicable law or agreed to in writing, software
//  distributed under the License is distributed on an "AS IS" BASIS,
//  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//  See the License for the specific language governing permissions and
//  limitations under the License.

#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "epochsketch/time_pyramid.hpp"

namespace epochsketch {

using Rng = std::mt19937_64;

/// Uniform double in [0, 1) from the top 53 bits, identical on every platform.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }
/// Uniform integer in [0, n) by rejection, identical on every platform.
std::uint64_t uniform_below(Rng& rng, std::uint64_t n);

/// Ranks 0..n-1 with P(r) proportional to (r + 1)^-s, by inverse CDF.
class ZipfSampler {
 public:
  ZipfSampler(std::uint64_t n, double exponent);
  std::uint64_t operator()(Rng& rng) const;
  std::uint64_t size() const { return cdf_.size(); }
  double probability(std::uint64_t rank) const;

 private:
  std::vector<double> cdf_;
};

/// Zipf-distributed keys per epoch. drift swaps that many adjacent ranks
/// (as a fraction of the key count) before each epoch; the per-epoch volume
/// follows tokens_per_epoch * (1 + amplitude * sin(2 pi e / period)).
struct StreamSpec {
  std::uint64_t keys = 10000;
  double exponent = 1.1;
  Epoch epochs = 64;
  std::uint64_t tokens_per_epoch = 2000;
  double drift = 0.0;
  double volume_amplitude = 0.0;
  std::uint64_t volume_period = 24;
  std::uint64_t seed = 1;

  /// Throws kGenerator for the first invalid field.
  void validate() const;
};

std::string key_name(std::uint64_t id);

/// Calls emit(epoch, token) for every token in epoch order.
void generate_stream(const StreamSpec& spec, const std::function<void(Epoch, std::string_view)>& emit);

/// A stream whose counts factorize exactly: key x appears key_weight(x) *
/// epoch_weight(e) times in epoch e, so n(x, e) = n_x * n_e / n.
struct FactorizingSpec {
  std::uint64_t keys = 64;
  Epoch epochs = 64;
  std::uint64_t max_key_weight = 8;
  std::uint64_t max_epoch_weight = 4;
  std::uint64_t seed = 1;

  void validate() const;
};

struct WeightedCount {
  Epoch epoch;
  std::string key;
  std::uint64_t count;
};

std::vector<WeightedCount> generate_factorizing(const FactorizingSpec& spec);

/// First-order Markov chain over `vocabulary` words: each word has
/// `successors` distinct followers with Zipf(exponent) transition weights.
struct MarkovSpec {
  std::uint32_t vocabulary = 1000;
  std::uint32_t successors = 8;
  double exponent = 1.0;
  std::uint64_t tokens = 1'000'000;
  std::uint64_t seed = 1;

  void validate() const;
};

std::vector<std::string> generate_markov(const MarkovSpec& spec);

}  // namespace epochsketch
