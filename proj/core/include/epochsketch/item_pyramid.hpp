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
#include <string_view>
#include <vector>

#include "epochsketch/sketch.hpp"
#include "epochsketch/time_pyramid.hpp"

namespace epochsketch {

/// Log-width an epoch sketch has at `age` = t - s: full width for ages 0 and
/// 1, then one bit fewer per doubling of age, never below 1.
std::uint32_t item_log_width(std::uint32_t full_log_width, Epoch age);

/// One sketch per closed epoch, each losing a bit of resolution whenever its
/// age reaches a power of two. Storage per dyadic age band stays constant.
class ItemPyramid {
 public:
  explicit ItemPyramid(const SketchConfig& config);

  const SketchConfig& config() const { return config_; }
  Epoch epoch() const { return static_cast<Epoch>(epochs_.size()); }

  /// Appends `unit` as epoch t+1 and folds every epoch whose age just hit 2^k.
  /// Throws kIncompatible unless unit has exactly the pyramid's config.
  void tick(CmSketch unit);

  /// Throws kRange unless 1 <= s <= t.
  const CmSketch& epoch_sketch(Epoch s) const;
  std::uint32_t epoch_log_width(Epoch s) const { return epoch_sketch(s).log_width(); }
  std::uint64_t epoch_total(Epoch s) const { return epoch_sketch(s).total_mass(); }

  std::uint64_t query_epoch(std::string_view key, Epoch s) const { return epoch_sketch(s).query(key); }
  std::uint64_t query_epoch(KeyDigest key, Epoch s) const { return epoch_sketch(s).query(key); }

  /// Late arrival for closed epoch s, hashed at the epoch's current width.
  void insert_delayed(KeyDigest key, std::uint64_t count, Epoch s);
  void insert_delayed(std::string_view key, std::uint64_t count, Epoch s) {
    insert_delayed(epoch_sketch(s).digest(key), count, s);
  }

  /// Counters across all epoch sketches (all rows).
  std::uint64_t storage_counters() const;

  /// Per-row counter additions performed by the folds of the latest tick.
  std::uint64_t last_tick_fold_additions() const { return last_fold_additions_; }
  std::uint64_t fold_additions() const { return total_fold_additions_; }

  /// Epochwise sum. Throws kIncompatible or kAlignment and leaves *this untouched.
  ItemPyramid& operator+=(const ItemPyramid& other);

  void serialize(ByteWriter& out) const;
  static ItemPyramid deserialize(ByteReader& in);

  friend bool operator==(const ItemPyramid& a, const ItemPyramid& b) {
    return a.config_ == b.config_ && a.epochs_ == b.epochs_;
  }

 private:
  CmSketch& mutable_epoch(Epoch s);

  SketchConfig config_;
  std::vector<CmSketch> epochs_;  // epochs_[s - 1] is A^s
  std::uint64_t last_fold_additions_ = 0;
  std::uint64_t total_fold_additions_ = 0;
};

}  // namespace epochsketch
