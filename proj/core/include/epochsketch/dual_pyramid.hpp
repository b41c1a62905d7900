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

#include "epochsketch/item_pyramid.hpp"
#include "epochsketch/sketch.hpp"
#include "epochsketch/time_pyramid.hpp"

namespace epochsketch {

/// Levels that are aggregated in time and in resolution at once: level j
/// covers the same span as time level j and has log-width b - j (at least 1),
/// so it always equals time level j folded j times.
///
/// Updates mirror the time cascade. At odd t the closed unit is folded once
/// and parked; at even t it is folded and added to the parked half, giving
/// the new level 1, and each further level is the fold of the level below
/// plus that level's previous content.
class DualPyramid {
 public:
  explicit DualPyramid(const SketchConfig& config, std::uint32_t max_level = kDefaultMaxLevel);

  const SketchConfig& config() const { return config_; }
  std::uint32_t max_level() const { return static_cast<std::uint32_t>(levels_.size()); }
  Epoch epoch() const { return t_; }

  /// B^j for 1 <= j <= max_level; throws kRange otherwise.
  const CmSketch& level(std::uint32_t j) const;
  IntervalDescriptor span(std::uint32_t j) const { return level_span(t_, j); }

  /// Closes epoch t+1 given the same unit sketch the time pyramid just aggregated.
  void tick(const CmSketch& unit);

  /// Late arrival: adds to every level whose span contains t_past.
  void insert_delayed(KeyDigest key, std::uint64_t count, Epoch t_past);

  DualPyramid& operator+=(const DualPyramid& other);

  void serialize(ByteWriter& out) const;
  static DualPyramid deserialize(ByteReader& in);

  friend bool operator==(const DualPyramid& a, const DualPyramid& b) {
    return a.t_ == b.t_ && a.pending_ == b.pending_ && a.levels_ == b.levels_;
  }

 private:
  SketchConfig config_;
  CmSketch pending_;             // folded unit of the last odd epoch, zero otherwise
  std::vector<CmSketch> levels_;  // levels_[j - 1] is B^j
  Epoch t_ = 0;
};

enum class EstimateMethod { kHeavyHitter, kInterpolated };

std::string_view to_string(EstimateMethod m);

struct EstimateReport {
  double value = 0.0;
  EstimateMethod method = EstimateMethod::kInterpolated;
  std::uint32_t level = 0;
  double threshold = 0.0;
  std::uint64_t item_read = 0;
};

/// Read-only view over the three pyramids of one engine.
struct PyramidSet {
  const TimePyramid& time;
  const ItemPyramid& item;
  const DualPyramid& dual;
};

/// Per-row M^j * A^t / B^j, minimised over rows, where j is the time
/// pyramid's containing_level for t.
/// Rows whose denominator is zero count as 0 when the numerator is zero too
/// and are skipped otherwise. The present epoch returns the item read.
/// Throws kRange for t outside [1, T] and kClockSkew when the pyramids
/// disagree on T.
double interpolate(KeyDigest key, Epoch t_query, const PyramidSet& p);

/// Absolute error scale of the epoch-t item sketch: scale * e / width * N_t.
double heavy_hitter_threshold(const ItemPyramid& item, Epoch t_query, double scale = 1.0);

/// The item read when it clears the heavy-hitter threshold, otherwise the
/// interpolated value.
EstimateReport estimate(KeyDigest key, Epoch t_query, const PyramidSet& p, double threshold_scale = 1.0);

}  // namespace epochsketch
