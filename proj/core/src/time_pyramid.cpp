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

#include "epochsketch/time_pyramid.hpp"

#include <algorithm>
#include <bit>
#include <string>
#include <utility>

#include "epochsketch/error.hpp"

namespace epochsketch {

namespace {

constexpr std::string_view kMagic = "HKTP";
constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kLevelLimit = 62;

}  // namespace

IntervalDescriptor level_span(Epoch t, std::uint32_t level) {
  IntervalDescriptor d;
  d.level = level;
  const Epoch len = level >= 63 ? ~Epoch{0} : Epoch{1} << level;
  d.staleness = level >= 63 ? t : t % len;
  d.last = t - d.staleness;
  d.first = d.last >= len ? d.last - len + 1 : 1;
  return d;
}

std::uint32_t age_level(Epoch age) {
  return age == 0 ? 0 : static_cast<std::uint32_t>(std::bit_width(age) - 1);
}

TimePyramid::TimePyramid(const SketchConfig& config, std::uint32_t max_level)
    : current_(config) {
  if (max_level > kLevelLimit) {
    throw Error(ErrorCode::kConfig, "max_level must be at most 62");
  }
  levels_.assign(max_level + 1, current_);
}

void TimePyramid::insert(KeyDigest key, std::uint64_t count) {
  if (count == 0) throw Error(ErrorCode::kInvalidArgument, "insert count must be at least 1");
  current_.insert(key, count);
}

void TimePyramid::tick() {
  ++t_;
  const auto top = std::min<std::uint32_t>(static_cast<std::uint32_t>(std::countr_zero(t_)), max_level());
  // After step j, current_ holds the epochs (t - 2^(j+1), t]; the add after
  // the final swap would be discarded by the reset, so it is skipped.
  for (std::uint32_t j = 0; j <= top; ++j) {
    std::swap(current_, levels_[j]);
    if (j < top) {
      current_ += levels_[j];
      ++sketch_additions_;
    }
  }
  current_.clear();
}

IntervalDescriptor TimePyramid::covering_level(Epoch t_query) const {
  if (t_query < 1 || t_query > t_) {
    throw Error(ErrorCode::kRange, "epoch " + std::to_string(t_query) + " outside [1, " +
                                       std::to_string(t_) + "]");
  }
  const std::uint32_t j = std::min(age_level(t_ - t_query), max_level());
  IntervalDescriptor d = level_span(t_, j);
  d.stale = !d.contains(t_query);
  return d;
}

IntervalDescriptor TimePyramid::containing_level(Epoch t_query) const {
  IntervalDescriptor d = covering_level(t_query);
  if (d.stale && d.level < max_level()) {
    d = level_span(t_, d.level + 1);
    d.stale = !d.contains(t_query);
  }
  return d;
}

PointEstimate TimePyramid::query_containing(KeyDigest key, Epoch t_query) const {
  PointEstimate out;
  out.interval = containing_level(t_query);
  out.count = levels_[out.interval.level].query(key);
  return out;
}

PointEstimate TimePyramid::query_point(KeyDigest key, Epoch t_query) const {
  PointEstimate out;
  out.interval = covering_level(t_query);
  out.count = levels_[out.interval.level].query(key);
  return out;
}

std::vector<std::uint32_t> TimePyramid::levels_containing(Epoch e) const {
  std::vector<std::uint32_t> out;
  for (std::uint32_t j = 0; j <= max_level(); ++j) {
    if (level_span(t_, j).contains(e)) out.push_back(j);
  }
  return out;
}

void TimePyramid::insert_delayed(KeyDigest key, std::uint64_t count, Epoch t_past) {
  if (count == 0) throw Error(ErrorCode::kInvalidArgument, "insert count must be at least 1");
  if (t_past < 1 || t_past > t_ + 1) {
    throw Error(ErrorCode::kRange, "delayed epoch " + std::to_string(t_past) + " outside [1, " +
                                       std::to_string(t_ + 1) + "]");
  }
  if (t_past == t_ + 1) {
    current_.insert(key, count);
    return;
  }
  for (std::uint32_t j : levels_containing(t_past)) levels_[j].insert(key, count);
}

TimePyramid& TimePyramid::operator+=(const TimePyramid& other) {
  current_.check_compatible(other.current_);
  if (max_level() != other.max_level()) {
    throw Error(ErrorCode::kIncompatible, "incompatible time pyramids: max_level differs (" +
                                              std::to_string(max_level()) + " vs " +
                                              std::to_string(other.max_level()) + ")");
  }
  if (t_ != other.t_) {
    throw Error(ErrorCode::kAlignment, "time pyramids are not aligned: t = " + std::to_string(t_) +
                                           " vs " + std::to_string(other.t_));
  }
  current_ += other.current_;
  for (std::size_t j = 0; j < levels_.size(); ++j) levels_[j] += other.levels_[j];
  return *this;
}

TimePyramid merge_pyramids(const TimePyramid& a, const TimePyramid& b) {
  TimePyramid out = a;
  out += b;
  return out;
}

void TimePyramid::serialize(ByteWriter& out) const {
  out.magic(kMagic);
  out.u32(kVersion);
  out.u64(t_);
  out.u32(max_level());
  current_.serialize(out);
  for (const auto& level : levels_) level.serialize(out);
}

TimePyramid TimePyramid::deserialize(ByteReader& in) {
  in.expect_magic(kMagic, "time pyramid");
  in.expect_version(kVersion, "time pyramid");
  const Epoch t = in.u64();
  const std::uint32_t max_level = in.u32();
  if (max_level > kLevelLimit) throw Error(ErrorCode::kCorrupt, "time pyramid max_level out of range");
  CmSketch current = CmSketch::deserialize(in);
  TimePyramid p(current.config(), 0);
  p.levels_.clear();
  for (std::uint32_t j = 0; j <= max_level; ++j) {
    CmSketch level = CmSketch::deserialize(in);
    if (level.config() != current.config()) {
      throw Error(ErrorCode::kCorrupt, "time pyramid level " + std::to_string(j) +
                                           " has a different sketch config");
    }
    p.levels_.push_back(std::move(level));
  }
  p.current_ = std::move(current);
  p.t_ = t;
  return p;
}

}  // namespace epochsketch
