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

namespace epochsketch {

using Epoch = std::uint64_t;

inline constexpr std::uint32_t kDefaultMaxLevel = 11;

/// Inclusive epoch span [first, last] a level currently aggregates. Epochs are
/// labelled from 1; an empty span has first > last.
struct IntervalDescriptor {
  std::uint32_t level = 0;
  Epoch first = 1;
  Epoch last = 0;
  Epoch staleness = 0;  // t mod 2^level
  bool stale = false;   // set by covering_level when the span misses the queried epoch

  bool empty() const { return first > last; }
  Epoch length() const { return empty() ? 0 : last - first + 1; }
  bool contains(Epoch e) const { return first <= e && e <= last; }

  friend bool operator==(const IntervalDescriptor&, const IntervalDescriptor&) = default;
};

/// Span held by level j after t completed epochs: (t - d - 2^j, t - d] with
/// d = t mod 2^j, intersected with epochs >= 1.
IntervalDescriptor level_span(Epoch t, std::uint32_t level);

/// floor(log2(age)) for age >= 1, and 0 for age 0.
std::uint32_t age_level(Epoch age);

struct PointEstimate {
  std::uint64_t count = 0;
  IntervalDescriptor interval;
};

/// Dyadic time aggregation. Level j holds the sum of the most recent aligned
/// block of 2^j completed epochs; inserts accumulate in an open-epoch sketch
/// until tick() closes it.
class TimePyramid {
 public:
  explicit TimePyramid(const SketchConfig& config, std::uint32_t max_level = kDefaultMaxLevel);

  const SketchConfig& config() const { return current_.config(); }
  std::uint32_t max_level() const { return static_cast<std::uint32_t>(levels_.size() - 1); }
  Epoch epoch() const { return t_; }

  const CmSketch& current() const { return current_; }
  const CmSketch& level(std::uint32_t j) const { return levels_.at(j); }

  /// Adds to the open epoch. Throws kInvalidArgument for count 0.
  void insert(std::string_view key, std::uint64_t count = 1) { insert(current_.digest(key), count); }
  void insert(KeyDigest key, std::uint64_t count = 1);

  /// Closes the open epoch and cascades it into levels 0..min(tz(t), max_level).
  void tick();

  IntervalDescriptor span(std::uint32_t level) const { return level_span(t_, level); }

  /// Level j* = floor(log2(t - t_query)), capped at max_level, with its span.
  /// Throws kRange unless 1 <= t_query <= t.
  IntervalDescriptor covering_level(Epoch t_query) const;

  /// The most recent level whose span holds t_query: j* when its span is
  /// fresh, otherwise j* + 1. Stale only when t_query predates the top level.
  IntervalDescriptor containing_level(Epoch t_query) const;

  PointEstimate query_point(std::string_view key, Epoch t_query) const {
    return query_point(current_.digest(key), t_query);
  }
  PointEstimate query_point(KeyDigest key, Epoch t_query) const;
  /// Like query_point on containing_level.
  PointEstimate query_containing(KeyDigest key, Epoch t_query) const;

  /// Late arrival for a closed epoch (or the open one, t_past = t + 1): the
  /// count lands in every level whose span contains t_past.
  void insert_delayed(std::string_view key, std::uint64_t count, Epoch t_past) {
    insert_delayed(current_.digest(key), count, t_past);
  }
  void insert_delayed(KeyDigest key, std::uint64_t count, Epoch t_past);

  std::vector<std::uint32_t> levels_containing(Epoch e) const;

  /// Levelwise sum. Throws kIncompatible or kAlignment and leaves *this untouched.
  TimePyramid& operator+=(const TimePyramid& other);

  /// Whole-sketch additions performed by tick() since construction.
  std::uint64_t sketch_additions() const { return sketch_additions_; }

  void serialize(ByteWriter& out) const;
  static TimePyramid deserialize(ByteReader& in);

  friend bool operator==(const TimePyramid& a, const TimePyramid& b) {
    return a.t_ == b.t_ && a.current_ == b.current_ && a.levels_ == b.levels_;
  }

 private:
  CmSketch current_;
  std::vector<CmSketch> levels_;
  Epoch t_ = 0;
  std::uint64_t sketch_additions_ = 0;
};

TimePyramid merge_pyramids(const TimePyramid& a, const TimePyramid& b);

}  // namespace epochsketch
