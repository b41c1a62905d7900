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

#include <algorithm>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "epochsketch/epochsketch.hpp"

namespace epochsketch::support {

using Record = std::pair<std::string, std::uint64_t>;
using Records = std::vector<Record>;
using EpochRecords = std::vector<Records>;  // [e - 1] holds epoch e

inline Records zipf_records(Rng& rng, std::size_t n, std::uint64_t keys, double exponent) {
  ZipfSampler zipf(keys, exponent);
  Records out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.emplace_back(key_name(zipf(rng)), 1);
  return out;
}

inline EpochRecords random_epochs(std::uint64_t seed, Epoch epochs, std::uint64_t max_per_epoch,
                                  std::uint64_t keys) {
  Rng rng(seed);
  ZipfSampler zipf(keys, 1.0);
  EpochRecords out(epochs);
  for (auto& records : out) {
    const auto n = uniform_below(rng, max_per_epoch + 1);
    for (std::uint64_t i = 0; i < n; ++i) {
      records.emplace_back(key_name(zipf(rng)), 1 + uniform_below(rng, 3));
    }
  }
  return out;
}

inline CmSketch build(const SketchConfig& config, const Records& records) {
  CmSketch s(config);
  for (const auto& [key, count] : records) s.insert(key, count);
  return s;
}

/// Fresh sketch holding every record of epochs [first, last].
inline CmSketch build_span(const SketchConfig& config, const EpochRecords& epochs, Epoch first, Epoch last) {
  CmSketch s(config);
  for (Epoch e = first; e <= last; ++e) {
    for (const auto& [key, count] : epochs[e - 1]) s.insert(key, count);
  }
  return s;
}

inline std::uint32_t floor_log2(std::uint64_t v) {
  std::uint32_t k = 0;
  while (v >>= 1) ++k;
  return k;
}

/// The most recent block of 2^j epochs ending on a multiple of 2^j, at or
/// before t. `valid` is false when no such block fits after epoch 0.
struct Block {
  Epoch first = 0;
  Epoch last = 0;
  bool valid = false;
};

inline Block aligned_block(Epoch t, std::uint32_t j) {
  const Epoch len = Epoch{1} << j;
  const Epoch last = (t / len) * len;
  if (last < len) return {};
  return {last - len + 1, last, true};
}

inline std::uint32_t expected_item_width(std::uint32_t full, Epoch age) {
  if (age < 2) return full;
  const std::uint32_t drop = floor_log2(age);
  return drop >= full ? 1 : std::max<std::uint32_t>(1, full - drop);
}

inline CmSketch fold_times(CmSketch s, std::uint32_t times) {
  for (std::uint32_t i = 0; i < times && s.log_width() > 1; ++i) s.fold();
  return s;
}

inline SketchConfig small_config(std::uint32_t log_width = 8, std::uint32_t depth = 3, std::uint64_t seed = 17) {
  return SketchConfig{depth, log_width, seed};
}

}  // namespace epochsketch::support
