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

#include "epochsketch/dual_pyramid.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <numbers>
#include <string>
#include <utility>

#include "epochsketch/error.hpp"

namespace epochsketch {

namespace {

constexpr std::string_view kMagic = "HKDP";
constexpr std::uint32_t kVersion = 1;

void fold_if_possible(CmSketch& s) {
  if (s.log_width() > 1) s.fold();
}

SketchConfig at_width(SketchConfig c, std::uint32_t level) {
  c.log_width = level >= c.log_width ? 1 : c.log_width - level;
  return c;
}

}  // namespace

DualPyramid::DualPyramid(const SketchConfig& config, std::uint32_t max_level)
    : config_(config), pending_(at_width(config, 1)) {
  if (max_level > 62) throw Error(ErrorCode::kConfig, "max_level must be at most 62");
  levels_.reserve(max_level);
  for (std::uint32_t j = 1; j <= max_level; ++j) levels_.emplace_back(at_width(config_, j));
}

const CmSketch& DualPyramid::level(std::uint32_t j) const {
  if (j < 1 || j > max_level()) {
    throw Error(ErrorCode::kRange, "dual level " + std::to_string(j) + " outside [1, " +
                                       std::to_string(max_level()) + "]");
  }
  return levels_[j - 1];
}

void DualPyramid::tick(const CmSketch& unit) {
  check_compatible(config_, unit.config());
  ++t_;
  CmSketch half = unit;
  fold_if_possible(half);
  if (t_ % 2 == 1) {
    pending_ = std::move(half);
    return;
  }
  half += pending_;
  pending_.clear();
  const auto top = std::min<std::uint32_t>(static_cast<std::uint32_t>(std::countr_zero(t_)), max_level());
  // Entering step j, `half` is fold^j of the new time level j.
  for (std::uint32_t j = 1; j <= top; ++j) {
    std::swap(half, levels_[j - 1]);
    if (j < top) {
      half += levels_[j - 1];
      fold_if_possible(half);
    }
  }
}

void DualPyramid::insert_delayed(KeyDigest key, std::uint64_t count, Epoch t_past) {
  if (count == 0) throw Error(ErrorCode::kInvalidArgument, "insert count must be at least 1");
  if (t_past < 1 || t_past > t_ + 1) {
    throw Error(ErrorCode::kRange, "delayed epoch " + std::to_string(t_past) + " outside [1, " +
                                       std::to_string(t_ + 1) + "]");
  }
  if (t_past == t_ + 1) return;  // still in the open unit
  if (t_past == t_ && t_ % 2 == 1) pending_.insert(key, count);
  for (std::uint32_t j = 1; j <= max_level(); ++j) {
    if (level_span(t_, j).contains(t_past)) levels_[j - 1].insert(key, count);
  }
}

DualPyramid& DualPyramid::operator+=(const DualPyramid& other) {
  check_compatible(config_, other.config_);
  if (max_level() != other.max_level()) {
    throw Error(ErrorCode::kIncompatible, "incompatible dual pyramids: max_level differs");
  }
  if (t_ != other.t_) {
    throw Error(ErrorCode::kAlignment, "dual pyramids are not aligned: t = " + std::to_string(t_) +
                                           " vs " + std::to_string(other.t_));
  }
  pending_ += other.pending_;
  for (std::size_t j = 0; j < levels_.size(); ++j) levels_[j] += other.levels_[j];
  return *this;
}

void DualPyramid::serialize(ByteWriter& out) const {
  out.magic(kMagic);
  out.u32(kVersion);
  out.u64(t_);
  out.u32(max_level());
  out.u32(config_.depth);
  out.u32(config_.log_width);
  out.u64(config_.seed);
  pending_.serialize(out);
  for (const auto& level : levels_) level.serialize(out);
}

DualPyramid DualPyramid::deserialize(ByteReader& in) {
  in.expect_magic(kMagic, "dual pyramid");
  in.expect_version(kVersion, "dual pyramid");
  const Epoch t = in.u64();
  const std::uint32_t max_level = in.u32();
  SketchConfig config;
  config.depth = in.u32();
  config.log_width = in.u32();
  config.seed = in.u64();
  config.validate();
  if (max_level > 62) throw Error(ErrorCode::kCorrupt, "dual pyramid max_level out of range");
  DualPyramid p(config, 0);
  p.pending_ = CmSketch::deserialize(in);
  if (p.pending_.config() != at_width(config, 1)) {
    throw Error(ErrorCode::kCorrupt, "dual pyramid pending sketch has the wrong shape");
  }
  for (std::uint32_t j = 1; j <= max_level; ++j) {
    CmSketch level = CmSketch::deserialize(in);
    if (level.config() != at_width(config, j)) {
      throw Error(ErrorCode::kCorrupt, "dual level " + std::to_string(j) + " has the wrong shape");
    }
    p.levels_.push_back(std::move(level));
  }
  p.t_ = t;
  return p;
}

std::string_view to_string(EstimateMethod m) {
  return m == EstimateMethod::kHeavyHitter ? "heavy-hitter" : "interpolated";
}

namespace {

void check_clocks(Epoch t_query, const PyramidSet& p) {
  const Epoch t = p.time.epoch();
  if (p.item.epoch() != t || p.dual.epoch() != t) {
    throw Error(ErrorCode::kClockSkew, "pyramid clocks disagree: time " + std::to_string(t) +
                                           ", item " + std::to_string(p.item.epoch()) + ", dual " +
                                           std::to_string(p.dual.epoch()));
  }
  if (t_query < 1 || t_query > t) {
    throw Error(ErrorCode::kRange, "epoch " + std::to_string(t_query) + " outside [1, " +
                                       std::to_string(t) + "]");
  }
}

}  // namespace

double interpolate(KeyDigest key, Epoch t_query, const PyramidSet& p) {
  check_clocks(t_query, p);
  const CmSketch& item = p.item.epoch_sketch(t_query);
  if (t_query == p.time.epoch()) return static_cast<double>(item.query(key));

  const std::uint32_t j = p.time.containing_level(t_query).level;
  const CmSketch& marginal = p.time.level(j);
  const CmSketch& normalizer = j == 0 ? p.time.level(0) : p.dual.level(j);
  const std::uint32_t resolution = std::min(item.log_width(), normalizer.log_width());

  double best = std::numeric_limits<double>::infinity();
  for (std::uint32_t i = 0; i < item.depth(); ++i) {
    const double m = static_cast<double>(marginal.cell(i, key));
    const double a = static_cast<double>(item.cell_at_width(i, key, resolution));
    const double b = static_cast<double>(normalizer.cell_at_width(i, key, resolution));
    const double numerator = m * a;
    if (b == 0.0) {
      if (numerator == 0.0) best = std::min(best, 0.0);
      continue;
    }
    best = std::min(best, numerator / b);
  }
  return best == std::numeric_limits<double>::infinity() ? 0.0 : best;
}

double heavy_hitter_threshold(const ItemPyramid& item, Epoch t_query, double scale) {
  const CmSketch& a = item.epoch_sketch(t_query);
  return scale * std::numbers::e / static_cast<double>(a.width()) * static_cast<double>(a.total_mass());
}

EstimateReport estimate(KeyDigest key, Epoch t_query, const PyramidSet& p, double threshold_scale) {
  check_clocks(t_query, p);
  EstimateReport r;
  r.item_read = p.item.query_epoch(key, t_query);
  r.threshold = heavy_hitter_threshold(p.item, t_query, threshold_scale);
  r.level = p.time.containing_level(t_query).level;
  if (static_cast<double>(r.item_read) > r.threshold) {
    r.method = EstimateMethod::kHeavyHitter;
    r.value = static_cast<double>(r.item_read);
  } else {
    r.method = EstimateMethod::kInterpolated;
    r.value = interpolate(key, t_query, p);
  }
  return r;
}

}  // namespace epochsketch
