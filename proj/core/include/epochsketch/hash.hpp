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
#include <span>
#include <string_view>
#include <vector>

namespace epochsketch {

/// Seeded 64-bit hash of a key's bytes. Shared by every row of a family so a
/// key is read once per query no matter how many sketches are consulted.
struct KeyDigest {
  std::uint64_t value = 0;
};

std::uint64_t splitmix64(std::uint64_t& state);
std::uint64_t hash_bytes(std::string_view bytes, std::uint64_t seed);

/// A family of `depth` row hashes h_1..h_d. Each row hash is a full 64-bit
/// value; a sketch of log-width b uses its low b bits, so the hash at width
/// b-1 is the hash at width b reduced mod 2^(b-1).
class HashFamily {
 public:
  HashFamily(std::uint64_t seed, std::uint32_t depth);

  std::uint64_t seed() const { return seed_; }
  std::uint32_t depth() const { return static_cast<std::uint32_t>(mul_.size()); }

  KeyDigest digest(std::string_view key) const { return {hash_bytes(key, seed_)}; }

  std::uint64_t row(std::uint32_t i, KeyDigest d) const {
    __uint128_t product = static_cast<__uint128_t>(d.value ^ salt_[i]) * mul_[i];
    return static_cast<std::uint64_t>(product) ^ static_cast<std::uint64_t>(product >> 64);
  }

  std::uint64_t row(std::uint32_t i, std::string_view key) const {
    return row(i, digest(key));
  }

  bool operator==(const HashFamily& other) const { return seed_ == other.seed_ && depth() == other.depth(); }

 private:
  std::uint64_t seed_;
  std::vector<std::uint64_t> salt_;
  std::vector<std::uint64_t> mul_;
};

inline std::uint64_t low_bits(std::uint64_t h, std::uint32_t log_width) {
  return h & ((std::uint64_t{1} << log_width) - 1);
}

}  // namespace epochsketch
