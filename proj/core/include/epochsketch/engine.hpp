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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "epochsketch/byte_io.hpp"
#include "epochsketch/config.hpp"
#include "epochsketch/dual_pyramid.hpp"
#include "epochsketch/item_pyramid.hpp"
#include "epochsketch/ngram.hpp"
#include "epochsketch/time_pyramid.hpp"

namespace epochsketch {

enum class Routing { kOpen, kDelayed, kDropped };

/// The time, item and dual pyramids (and an optional n-gram store) driven by
/// one epoch clock. Epoch t + 1 is open for inserts; epochs 1..t are queryable.
class Engine {
 public:
  explicit Engine(EngineConfig config);

  const EngineConfig& config() const { return config_; }
  Epoch epoch() const { return time_.epoch(); }
  Epoch open_epoch() const { return time_.epoch() + 1; }
  std::uint64_t total_mass() const { return mass_; }
  std::uint64_t open_mass() const { return time_.current().total_mass(); }

  /// Wall-clock interval index (Unix time / epoch_seconds) of epoch 1 in live mode.
  std::uint64_t origin() const { return origin_; }
  void set_origin(std::uint64_t origin) { origin_ = origin; }

  /// Adds to the open epoch and feeds the n-gram stream.
  void insert(std::string_view token, std::uint64_t count = 1);

  /// Adds to `epoch`: the open epoch directly, recent closed epochs through
  /// the delayed path, anything more than max_delay epochs old is dropped.
  /// Throws kRange for epoch 0 or an epoch after the open one.
  Routing insert_at(std::string_view token, Epoch epoch, std::uint64_t count = 1);

  /// Closes the open epoch in every pyramid.
  void tick();

  /// Closed epochs use the interpolating estimator; the open epoch t + 1 is
  /// read from the unit sketch at full width.
  EstimateReport estimate(std::string_view token, Epoch epoch) const;
  /// Sum of per-epoch estimates over [from, to]. Throws kRange outside [1, t + 1].
  double estimate_range(std::string_view token, Epoch from, Epoch to) const;
  /// Time-aggregation estimate: the containing level's count spread evenly
  /// over its span.
  double time_estimate(std::string_view token, Epoch epoch) const;
  /// Item-aggregation estimate: the possibly folded per-epoch sketch read.
  std::uint64_t item_estimate(std::string_view token, Epoch epoch) const;
  /// Throws kConfig when the engine has no n-gram store.
  double ngram_estimate(std::span<const std::string_view> tokens) const;

  const TimePyramid& time_pyramid() const { return time_; }
  const ItemPyramid& item_pyramid() const { return item_; }
  const DualPyramid& dual_pyramid() const { return dual_; }
  const NgramStore* ngram() const { return ngram_ ? &*ngram_ : nullptr; }
  PyramidSet pyramids() const { return {time_, item_, dual_}; }

  /// Merges an engine with identical sketch settings and clock.
  Engine& operator+=(const Engine& other);

  Bytes snapshot() const;
  /// Throws kBadMagic, kVersionMismatch, kTruncated or kCorrupt; never
  /// returns a partially restored engine.
  static Engine restore(std::span<const std::uint8_t> bytes);
  void save(const std::string& path) const;
  static Engine load(const std::string& path);

  friend bool operator==(const Engine& a, const Engine& b);

 private:
  Engine(EngineConfig config, TimePyramid time, ItemPyramid item, DualPyramid dual,
         std::optional<NgramStore> ngram);

  KeyDigest digest(std::string_view token) const { return time_.current().digest(token); }
  void check_closed(Epoch epoch) const;
  void check_queryable(Epoch epoch) const;

  EngineConfig config_;
  TimePyramid time_;
  ItemPyramid item_;
  DualPyramid dual_;
  std::optional<NgramStore> ngram_;
  std::uint64_t mass_ = 0;
  std::uint64_t origin_ = 0;
};

}  // namespace epochsketch
