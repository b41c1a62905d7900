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

#include "epochsketch/sketch.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>
#include <utility>

#include "epochsketch/error.hpp"

namespace epochsketch {

namespace {

constexpr std::string_view kMagic = "HKSK";
constexpr std::uint32_t kVersion = 1;

std::uint32_t ceil_log2(double x) {
  std::uint32_t b = 1;
  while (b < kMaxLogWidth && static_cast<double>(std::uint64_t{1} << b) < x) ++b;
  return b;
}

}  // namespace

void SketchConfig::validate() const {
  if (depth == 0) throw Error(ErrorCode::kConfig, "sketch depth must be at least 1");
  if (log_width < 1 || log_width > kMaxLogWidth) {
    throw Error(ErrorCode::kConfig,
                "sketch log_width must be in [1, 62], got " + std::to_string(log_width));
  }
}

SketchConfig standard_sizing(double epsilon, double delta, std::uint64_t seed) {
  if (!(epsilon > 0.0) || !(delta > 0.0) || !(delta < 1.0)) {
    throw Error(ErrorCode::kConfig, "sizing needs epsilon > 0 and 0 < delta < 1");
  }
  SketchConfig c;
  c.log_width = ceil_log2(std::ceil(std::numbers::e / epsilon));
  c.depth = static_cast<std::uint32_t>(std::max(1.0, std::ceil(std::log(1.0 / delta))));
  c.seed = seed;
  return c;
}

SketchConfig literal_sizing(double epsilon, double delta, std::uint64_t seed) {
  if (!(epsilon > 0.0) || !(delta > 0.0) || !(delta < 1.0)) {
    throw Error(ErrorCode::kConfig, "sizing needs epsilon > 0 and 0 < delta < 1");
  }
  SketchConfig c;
  c.log_width = ceil_log2(std::ceil(epsilon / delta));
  c.depth = static_cast<std::uint32_t>(std::max(1.0, std::ceil(std::log(1.0 / delta))));
  c.seed = seed;
  return c;
}

CmSketch::CmSketch(const SketchConfig& config) : config_(config) {
  config_.validate();
  if (config_.log_width >= 40) {
    throw Error(ErrorCode::kConfig, "sketch of log_width " + std::to_string(config_.log_width) +
                                        " exceeds addressable memory");
  }
  family_ = std::make_shared<const HashFamily>(config_.seed, config_.depth);
  counters_.assign(std::size_t{config_.depth} * width(), 0);
}

CmSketch CmSketch::from_counters(const SketchConfig& config, std::vector<std::uint64_t> counters,
                                 std::uint64_t total_mass) {
  CmSketch s(config);
  if (counters.size() != s.counters_.size()) {
    throw Error(ErrorCode::kCorrupt, "counter count does not match sketch dimensions");
  }
  s.counters_ = std::move(counters);
  s.total_mass_ = total_mass;
  for (std::uint32_t i = 0; i < config.depth; ++i) {
    auto r = s.row(i);
    if (std::accumulate(r.begin(), r.end(), std::uint64_t{0}) != total_mass) {
      throw Error(ErrorCode::kCorrupt, "sketch row " + std::to_string(i) +
                                           " does not sum to total_mass");
    }
  }
  return s;
}

void CmSketch::insert(KeyDigest key, std::uint64_t count) {
  assert(count >= 1);
  const std::size_t w = width();
  std::uint64_t* base = counters_.data();
  for (std::uint32_t i = 0; i < config_.depth; ++i, base += w) {
    assert(base[column(i, key)] <= std::numeric_limits<std::uint64_t>::max() - count);
    base[column(i, key)] += count;
  }
  total_mass_ += count;
}

std::uint64_t CmSketch::query(KeyDigest key) const {
  const std::size_t w = width();
  const std::uint64_t* base = counters_.data();
  std::uint64_t best = std::numeric_limits<std::uint64_t>::max();
  for (std::uint32_t i = 0; i < config_.depth; ++i, base += w) {
    best = std::min(best, base[column(i, key)]);
  }
  return best;
}

std::uint64_t CmSketch::cell_at_width(std::uint32_t i, KeyDigest key, std::uint32_t log_width) const {
  if (log_width < 1 || log_width > config_.log_width) {
    throw Error(ErrorCode::kCannotFold, "cannot read a width-2^" + std::to_string(config_.log_width) +
                                            " sketch at width 2^" + std::to_string(log_width));
  }
  const std::size_t target = static_cast<std::size_t>(low_bits(family_->row(i, key), log_width));
  const std::size_t stride = std::size_t{1} << log_width;
  const std::uint64_t* r = counters_.data() + i * width();
  std::uint64_t sum = 0;
  for (std::size_t j = target; j < width(); j += stride) sum += r[j];
  return sum;
}

void check_compatible(const SketchConfig& a, const SketchConfig& b) {
  auto fail = [](const char* field, std::uint64_t x, std::uint64_t y) {
    throw Error(ErrorCode::kIncompatible, std::string("incompatible sketches: ") + field +
                                              " differs (" + std::to_string(x) + " vs " +
                                              std::to_string(y) + ")");
  };
  if (a.depth != b.depth) fail("depth", a.depth, b.depth);
  if (a.log_width != b.log_width) fail("log_width", a.log_width, b.log_width);
  if (a.seed != b.seed) fail("seed", a.seed, b.seed);
}

void CmSketch::check_compatible(const CmSketch& other) const {
  epochsketch::check_compatible(config_, other.config_);
}

CmSketch& CmSketch::operator+=(const CmSketch& other) {
  check_compatible(other);
  std::uint64_t* dst = counters_.data();
  const std::uint64_t* src = other.counters_.data();
  const std::size_t n = counters_.size();
  for (std::size_t k = 0; k < n; ++k) dst[k] += src[k];
  total_mass_ += other.total_mass_;
  return *this;
}

CmSketch merge(const CmSketch& a, const CmSketch& b) {
  CmSketch out = a;
  out += b;
  return out;
}

void CmSketch::fold() {
  if (config_.log_width <= 1) {
    throw Error(ErrorCode::kCannotFold, "cannot fold a sketch of width 2");
  }
  const std::size_t w = width();
  const std::size_t half = w / 2;
  // Row i of the result lands at [i*half, (i+1)*half), never ahead of its source.
  for (std::uint32_t i = 0; i < config_.depth; ++i) {
    const std::uint64_t* src = counters_.data() + i * w;
    std::uint64_t* dst = counters_.data() + i * half;
    for (std::size_t j = 0; j < half; ++j) dst[j] = src[j] + src[j + half];
  }
  config_.log_width -= 1;
  counters_.resize(std::size_t{config_.depth} * half);
  counters_.shrink_to_fit();
}

CmSketch CmSketch::folded() const {
  CmSketch out = *this;
  out.fold();
  return out;
}

void CmSketch::clear() {
  std::fill(counters_.begin(), counters_.end(), 0);
  total_mass_ = 0;
}

bool CmSketch::is_zero() const {
  return total_mass_ == 0 &&
         std::all_of(counters_.begin(), counters_.end(), [](std::uint64_t v) { return v == 0; });
}

void CmSketch::serialize(ByteWriter& out) const {
  out.magic(kMagic);
  out.u32(kVersion);
  out.u32(config_.depth);
  out.u32(config_.log_width);
  out.u64(config_.seed);
  out.u64(total_mass_);
  out.u64_array(counters_);
}

Bytes CmSketch::serialize() const {
  Bytes bytes;
  bytes.reserve(32 + counters_.size() * 8);
  ByteWriter w(bytes);
  serialize(w);
  return bytes;
}

CmSketch CmSketch::deserialize(ByteReader& in) {
  in.expect_magic(kMagic, "sketch");
  in.expect_version(kVersion, "sketch");
  SketchConfig config;
  config.depth = in.u32();
  config.log_width = in.u32();
  config.seed = in.u64();
  const std::uint64_t mass = in.u64();
  config.validate();
  // Refuse to allocate for a payload that cannot be present.
  if (config.log_width >= 40 ||
      (in.remaining() / 8) / config.depth < (std::uint64_t{1} << config.log_width)) {
    throw Error(ErrorCode::kTruncated, "sketch counter payload truncated");
  }
  std::vector<std::uint64_t> counters(std::size_t{config.depth} << config.log_width);
  in.u64_array(counters);
  return from_counters(config, std::move(counters), mass);
}

CmSketch CmSketch::deserialize(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes);
  CmSketch s = deserialize(in);
  if (!in.at_end()) throw Error(ErrorCode::kCorrupt, "trailing bytes after sketch snapshot");
  return s;
}

bool operator==(const CmSketch& a, const CmSketch& b) {
  return a.config_ == b.config_ && a.total_mass_ == b.total_mass_ && a.counters_ == b.counters_;
}

}  // namespace epochsketch
