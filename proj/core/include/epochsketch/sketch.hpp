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

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "epochsketch/byte_io.hpp"
#include "epochsketch/hash.hpp"

namespace epochsketch {

inline constexpr std::uint32_t kMaxLogWidth = 62;

struct SketchConfig {
  std::uint32_t depth = 4;
  std::uint32_t log_width = 23;
  std::uint64_t seed = 0x9e3779b97f4a7c15ULL;

  /// Throws ErrorCode::kConfig when depth is zero or log_width is outside [1, 62].
  void validate() const;

  friend bool operator==(const SketchConfig&, const SketchConfig&) = default;
};

/// Throws kIncompatible naming the first field (depth, log_width, seed) that differs.
void check_compatible(const SketchConfig& a, const SketchConfig& b);

/// Width and depth for an (epsilon, delta) guarantee using the usual
/// Count-Min sizing: width >= e/epsilon (rounded up to a power of two) and
/// depth = ceil(ln(1/delta)).
SketchConfig standard_sizing(double epsilon, double delta, std::uint64_t seed);

/// Sizing that follows the literal n = ceil(epsilon/delta) reading of the
/// width formula. Kept for comparison only; it is not a sound bound.
SketchConfig literal_sizing(double epsilon, double delta, std::uint64_t seed);

/// Count-Min sketch with d rows of 2^b 64-bit counters. Row i addresses a
/// key with the low b bits of its row hash, which is what makes fold() agree
/// with a sketch built directly at half the width.
class CmSketch {
 public:
  explicit CmSketch(const SketchConfig& config);

  /// Rebuilds a sketch from raw row-major counters. Throws kCorrupt when the
  /// counter count or any row sum disagrees with the config and mass.
  static CmSketch from_counters(const SketchConfig& config, std::vector<std::uint64_t> counters,
                                std::uint64_t total_mass);

  const SketchConfig& config() const { return config_; }
  std::uint32_t depth() const { return config_.depth; }
  std::uint32_t log_width() const { return config_.log_width; }
  std::size_t width() const { return std::size_t{1} << config_.log_width; }
  std::uint64_t total_mass() const { return total_mass_; }
  const HashFamily& family() const { return *family_; }

  KeyDigest digest(std::string_view key) const { return family_->digest(key); }

  void insert(std::string_view key, std::uint64_t count = 1) { insert(digest(key), count); }
  void insert(KeyDigest key, std::uint64_t count = 1);

  std::uint64_t query(std::string_view key) const { return query(digest(key)); }
  std::uint64_t query(KeyDigest key) const;

  /// Column addressed by `key` in row i at this sketch's width.
  std::size_t column(std::uint32_t i, KeyDigest key) const {
    return static_cast<std::size_t>(low_bits(family_->row(i, key), config_.log_width));
  }
  std::uint64_t cell(std::uint32_t i, std::size_t column) const { return counters_[i * width() + column]; }
  std::uint64_t cell(std::uint32_t i, KeyDigest key) const { return cell(i, column(i, key)); }

  /// Value row i would hold for `key` after folding down to `log_width`
  /// (a coarser width), computed without materializing the fold.
  std::uint64_t cell_at_width(std::uint32_t i, KeyDigest key, std::uint32_t log_width) const;

  std::span<const std::uint64_t> row(std::uint32_t i) const {
    return {counters_.data() + i * width(), width()};
  }
  std::span<const std::uint64_t> counters() const { return counters_; }

  /// Elementwise sum. Throws kIncompatible naming the first differing field.
  CmSketch& operator+=(const CmSketch& other);
  friend CmSketch merge(const CmSketch& a, const CmSketch& b);

  /// Halves the width in place: cell (i, j) += cell (i, j + width/2).
  /// Throws kCannotFold at log_width 1.
  void fold();
  CmSketch folded() const;

  void clear();
  bool is_zero() const;

  void check_compatible(const CmSketch& other) const;

  void serialize(ByteWriter& out) const;
  Bytes serialize() const;
  static CmSketch deserialize(ByteReader& in);
  static CmSketch deserialize(std::span<const std::uint8_t> bytes);

  friend bool operator==(const CmSketch& a, const CmSketch& b);

 private:
  SketchConfig config_;
  std::shared_ptr<const HashFamily> family_;
  std::vector<std::uint64_t> counters_;
  std::uint64_t total_mass_ = 0;
};

}  // namespace epochsketch
