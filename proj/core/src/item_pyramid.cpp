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

#include "epochsketch/item_pyramid.hpp"

#include <string>
#include <utility>

#include "epochsketch/error.hpp"

namespace epochsketch {

namespace {

constexpr std::string_view kMagic = "HKIP";
constexpr std::uint32_t kVersion = 1;

}  // namespace

std::uint32_t item_log_width(std::uint32_t full_log_width, Epoch age) {
  const std::uint32_t folds = age < 2 ? 0 : age_level(age);
  return folds >= full_log_width ? 1 : full_log_width - folds;
}

ItemPyramid::ItemPyramid(const SketchConfig& config) : config_(config) { config_.validate(); }

void ItemPyramid::tick(CmSketch unit) {
  check_compatible(config_, unit.config());
  epochs_.push_back(std::move(unit));
  const Epoch t = epoch();
  std::uint64_t additions = 0;
  for (std::uint32_t k = 1; k < 64 && (Epoch{1} << k) < t; ++k) {
    CmSketch& s = epochs_[t - (Epoch{1} << k) - 1];
    if (s.log_width() > 1) {
      s.fold();
      additions += s.width();
    }
  }
  last_fold_additions_ = additions;
  total_fold_additions_ += additions;
}

const CmSketch& ItemPyramid::epoch_sketch(Epoch s) const {
  if (s < 1 || s > epoch()) {
    throw Error(ErrorCode::kRange, "epoch " + std::to_string(s) + " outside [1, " +
                                       std::to_string(epoch()) + "]");
  }
  return epochs_[s - 1];
}

CmSketch& ItemPyramid::mutable_epoch(Epoch s) {
  return const_cast<CmSketch&>(std::as_const(*this).epoch_sketch(s));
}

void ItemPyramid::insert_delayed(KeyDigest key, std::uint64_t count, Epoch s) {
  if (count == 0) throw Error(ErrorCode::kInvalidArgument, "insert count must be at least 1");
  mutable_epoch(s).insert(key, count);
}

std::uint64_t ItemPyramid::storage_counters() const {
  std::uint64_t n = 0;
  for (const auto& s : epochs_) n += s.counters().size();
  return n;
}

ItemPyramid& ItemPyramid::operator+=(const ItemPyramid& other) {
  check_compatible(config_, other.config_);
  if (epoch() != other.epoch()) {
    throw Error(ErrorCode::kAlignment, "item pyramids are not aligned: t = " +
                                           std::to_string(epoch()) + " vs " +
                                           std::to_string(other.epoch()));
  }
  for (std::size_t i = 0; i < epochs_.size(); ++i) epochs_[i] += other.epochs_[i];
  return *this;
}

void ItemPyramid::serialize(ByteWriter& out) const {
  out.magic(kMagic);
  out.u32(kVersion);
  out.u64(epoch());
  out.u32(config_.depth);
  out.u32(config_.log_width);
  out.u64(config_.seed);
  for (Epoch s = 1; s <= epoch(); ++s) {
    const CmSketch& a = epochs_[s - 1];
    out.u64(s);
    out.u32(a.log_width());
    out.u64(a.total_mass());
    out.u64_array(a.counters());
  }
}

ItemPyramid ItemPyramid::deserialize(ByteReader& in) {
  in.expect_magic(kMagic, "item pyramid");
  in.expect_version(kVersion, "item pyramid");
  const Epoch t = in.u64();
  SketchConfig config;
  config.depth = in.u32();
  config.log_width = in.u32();
  config.seed = in.u64();
  config.validate();
  ItemPyramid p(config);
  // Each record carries at least 20 header bytes, which bounds t by the payload.
  if (t > in.remaining() / 20) throw Error(ErrorCode::kTruncated, "item pyramid records truncated");
  p.epochs_.reserve(t);
  for (Epoch s = 1; s <= t; ++s) {
    if (in.u64() != s) throw Error(ErrorCode::kCorrupt, "item pyramid records out of order");
    const std::uint32_t log_width = in.u32();
    const std::uint64_t mass = in.u64();
    if (log_width != item_log_width(config.log_width, t - s)) {
      throw Error(ErrorCode::kCorrupt, "epoch " + std::to_string(s) +
                                           " width does not match the fold schedule");
    }
    const std::uint64_t n = std::uint64_t{config.depth} << log_width;
    if (n > in.remaining() / 8) throw Error(ErrorCode::kTruncated, "item pyramid counters truncated");
    std::vector<std::uint64_t> counters(n);
    in.u64_array(counters);
    p.epochs_.push_back(CmSketch::from_counters(SketchConfig{config.depth, log_width, config.seed},
                                                std::move(counters), mass));
  }
  return p;
}

}  // namespace epochsketch
