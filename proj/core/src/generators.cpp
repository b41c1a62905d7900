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

#include "epochsketch/generators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "epochsketch/error.hpp"

namespace epochsketch {

namespace {

[[noreturn]] void bad_spec(const std::string& what) { throw Error(ErrorCode::kGenerator, what); }

}  // namespace

std::uint64_t uniform_below(Rng& rng, std::uint64_t n) {
  if (n == 0) bad_spec("uniform_below(0)");
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  for (;;) {
    const std::uint64_t v = rng();
    if (v < limit) return v % n;
  }
}

ZipfSampler::ZipfSampler(std::uint64_t n, double exponent) {
  if (n == 0) bad_spec("zipf needs at least one key");
  if (!(exponent >= 0.0) || !std::isfinite(exponent)) bad_spec("zipf exponent must be finite and non-negative");
  cdf_.resize(n);
  double sum = 0.0;
  for (std::uint64_t r = 0; r < n; ++r) {
    sum += std::pow(static_cast<double>(r + 1), -exponent);
    cdf_[r] = sum;
  }
  for (auto& c : cdf_) c /= sum;
  cdf_.back() = 1.0;
}

std::uint64_t ZipfSampler::operator()(Rng& rng) const {
  const double u = uniform01(rng);
  return static_cast<std::uint64_t>(std::upper_bound(cdf_.begin(), cdf_.end(), u) - cdf_.begin());
}

double ZipfSampler::probability(std::uint64_t rank) const {
  return rank == 0 ? cdf_[0] : cdf_.at(rank) - cdf_[rank - 1];
}

void StreamSpec::validate() const {
  if (keys == 0) bad_spec("stream needs at least one key");
  if (epochs == 0) bad_spec("stream needs at least one epoch");
  if (!(exponent >= 0.0) || !std::isfinite(exponent)) bad_spec("zipf exponent must be finite and non-negative");
  if (!(drift >= 0.0 && drift <= 1.0)) bad_spec("drift must lie in [0, 1]");
  if (!(volume_amplitude >= 0.0 && volume_amplitude < 1.0)) bad_spec("volume_amplitude must lie in [0, 1)");
  if (volume_period == 0) bad_spec("volume_period must be positive");
}

std::string key_name(std::uint64_t id) { return "k" + std::to_string(id); }

void generate_stream(const StreamSpec& spec, const std::function<void(Epoch, std::string_view)>& emit) {
  spec.validate();
  Rng rng(spec.seed);
  const ZipfSampler zipf(spec.keys, spec.exponent);
  std::vector<std::uint64_t> rank_to_key(spec.keys);
  for (std::uint64_t i = 0; i < spec.keys; ++i) rank_to_key[i] = i;
  std::vector<std::string> names(spec.keys);
  for (std::uint64_t i = 0; i < spec.keys; ++i) names[i] = key_name(i);

  const auto swaps = static_cast<std::uint64_t>(std::llround(spec.drift * static_cast<double>(spec.keys)));
  for (Epoch e = 1; e <= spec.epochs; ++e) {
    if (e > 1 && spec.keys > 1) {
      for (std::uint64_t s = 0; s < swaps; ++s) {
        const std::uint64_t r = uniform_below(rng, spec.keys - 1);
        std::swap(rank_to_key[r], rank_to_key[r + 1]);
      }
    }
    const double phase = 2.0 * std::numbers::pi * static_cast<double>(e) / static_cast<double>(spec.volume_period);
    const auto volume = static_cast<std::uint64_t>(
        std::llround(static_cast<double>(spec.tokens_per_epoch) * (1.0 + spec.volume_amplitude * std::sin(phase))));
    for (std::uint64_t i = 0; i < volume; ++i) emit(e, names[rank_to_key[zipf(rng)]]);
  }
}

void FactorizingSpec::validate() const {
  if (keys == 0 || epochs == 0) bad_spec("factorizing stream needs keys and epochs");
  if (max_key_weight == 0 || max_epoch_weight == 0) bad_spec("factorizing weights must be positive");
}

std::vector<WeightedCount> generate_factorizing(const FactorizingSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  std::vector<std::uint64_t> key_weight(spec.keys);
  std::vector<std::uint64_t> epoch_weight(spec.epochs);
  for (auto& w : key_weight) w = 1 + uniform_below(rng, spec.max_key_weight);
  for (auto& w : epoch_weight) w = 1 + uniform_below(rng, spec.max_epoch_weight);
  std::vector<WeightedCount> out;
  out.reserve(spec.keys * spec.epochs);
  for (Epoch e = 1; e <= spec.epochs; ++e) {
    for (std::uint64_t x = 0; x < spec.keys; ++x) {
      out.push_back({e, key_name(x), key_weight[x] * epoch_weight[e - 1]});
    }
  }
  return out;
}

void MarkovSpec::validate() const {
  if (vocabulary < 2) bad_spec("markov vocabulary must have at least two words");
  if (successors == 0 || successors > vocabulary) bad_spec("markov successors must lie in [1, vocabulary]");
  if (!(exponent >= 0.0) || !std::isfinite(exponent)) bad_spec("markov exponent must be finite and non-negative");
}

std::vector<std::string> generate_markov(const MarkovSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  std::vector<std::string> words(spec.vocabulary);
  for (std::uint32_t i = 0; i < spec.vocabulary; ++i) words[i] = "w" + std::to_string(i);

  std::vector<std::vector<std::uint32_t>> next(spec.vocabulary);
  std::vector<std::uint32_t> pool(spec.vocabulary);
  for (std::uint32_t i = 0; i < spec.vocabulary; ++i) pool[i] = i;
  for (auto& n : next) {
    // Partial Fisher-Yates: the first `successors` slots become distinct followers.
    for (std::uint32_t k = 0; k < spec.successors; ++k) {
      const auto j = k + static_cast<std::uint32_t>(uniform_below(rng, spec.vocabulary - k));
      std::swap(pool[k], pool[j]);
    }
    n.assign(pool.begin(), pool.begin() + spec.successors);
  }
  const ZipfSampler transition(spec.successors, spec.exponent);

  std::vector<std::string> out;
  out.reserve(spec.tokens);
  auto state = static_cast<std::uint32_t>(uniform_below(rng, spec.vocabulary));
  for (std::uint64_t i = 0; i < spec.tokens; ++i) {
    out.push_back(words[state]);
    state = next[state][transition(rng)];
  }
  return out;
}

}  // namespace epochsketch
