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

#include "epochsketch/engine.hpp"

#include <algorithm>
#include <numbers>
#include <utility>

#include "epochsketch/error.hpp"

namespace epochsketch {

namespace {

constexpr std::string_view kMagic = "HKEN";
constexpr std::uint32_t kVersion = 1;

std::optional<NgramStore> make_ngram(const EngineConfig& c) {
  FactorTemplate tmpl;
  if (!c.resolve_template(tmpl)) return std::nullopt;
  return NgramStore(std::move(tmpl), c.ngram_sketch(), c.smoothing);
}

const EngineConfig& validated(const EngineConfig& c) {
  c.validate();
  return c;
}

}  // namespace

Engine::Engine(EngineConfig config)
    : config_(validated(config)),
      time_(config_.sketch, config_.max_level),
      item_(config_.sketch),
      dual_(config_.sketch, config_.max_level),
      ngram_(make_ngram(config_)) {}

Engine::Engine(EngineConfig config, TimePyramid time, ItemPyramid item, DualPyramid dual,
               std::optional<NgramStore> ngram)
    : config_(std::move(config)),
      time_(std::move(time)),
      item_(std::move(item)),
      dual_(std::move(dual)),
      ngram_(std::move(ngram)) {}

void Engine::insert(std::string_view token, std::uint64_t count) {
  time_.insert(digest(token), count);
  mass_ += count;
  if (ngram_) ngram_->push_token(token);
}

Routing Engine::insert_at(std::string_view token, Epoch epoch, std::uint64_t count) {
  const Epoch t = time_.epoch();
  if (epoch == 0 || epoch > t + 1) {
    throw Error(ErrorCode::kRange,
                "epoch " + std::to_string(epoch) + " outside [1, " + std::to_string(t + 1) + "]");
  }
  if (count == 0) throw Error(ErrorCode::kInvalidArgument, "insert count must be at least 1");
  if (epoch == t + 1) {
    insert(token, count);
    return Routing::kOpen;
  }
  if (t - epoch >= config_.max_delay) return Routing::kDropped;
  const KeyDigest key = digest(token);
  time_.insert_delayed(key, count, epoch);
  item_.insert_delayed(key, count, epoch);
  dual_.insert_delayed(key, count, epoch);
  mass_ += count;
  return Routing::kDelayed;
}

void Engine::tick() {
  CmSketch unit = time_.current();
  time_.tick();
  dual_.tick(unit);
  item_.tick(std::move(unit));
}

void Engine::check_closed(Epoch epoch) const {
  if (epoch == 0 || epoch > time_.epoch()) {
    throw Error(ErrorCode::kRange, "epoch " + std::to_string(epoch) + " is not closed; closed epochs are [1, " +
                                       std::to_string(time_.epoch()) + "]");
  }
}

void Engine::check_queryable(Epoch epoch) const {
  if (epoch == 0 || epoch > open_epoch()) {
    throw Error(ErrorCode::kRange, "epoch " + std::to_string(epoch) + " outside queryable epochs [1, " +
                                       std::to_string(open_epoch()) + "]");
  }
}

EstimateReport Engine::estimate(std::string_view token, Epoch epoch) const {
  check_queryable(epoch);
  if (epoch != open_epoch()) {
    return epochsketch::estimate(digest(token), epoch, pyramids(), config_.threshold_scale);
  }
  const CmSketch& unit = time_.current();
  EstimateReport r;
  r.item_read = unit.query(digest(token));
  r.value = static_cast<double>(r.item_read);
  r.threshold = config_.threshold_scale * std::numbers::e / static_cast<double>(unit.width()) *
                static_cast<double>(unit.total_mass());
  r.method = static_cast<double>(r.item_read) > r.threshold ? EstimateMethod::kHeavyHitter
                                                            : EstimateMethod::kInterpolated;
  return r;
}

double Engine::estimate_range(std::string_view token, Epoch from, Epoch to) const {
  if (from > to) {
    throw Error(ErrorCode::kRange, "range start " + std::to_string(from) + " is after its end " + std::to_string(to));
  }
  check_queryable(from);
  check_queryable(to);
  const KeyDigest key = digest(token);
  double sum = 0.0;
  for (Epoch e = from; e <= std::min(to, epoch()); ++e) {
    sum += epochsketch::estimate(key, e, pyramids(), config_.threshold_scale).value;
  }
  if (to == open_epoch()) sum += static_cast<double>(time_.current().query(key));
  return sum;
}

double Engine::time_estimate(std::string_view token, Epoch epoch) const {
  check_closed(epoch);
  const PointEstimate p = time_.query_containing(digest(token), epoch);
  const Epoch len = p.interval.length();
  return len == 0 ? 0.0 : static_cast<double>(p.count) / static_cast<double>(len);
}

std::uint64_t Engine::item_estimate(std::string_view token, Epoch epoch) const {
  check_closed(epoch);
  return item_.query_epoch(digest(token), epoch);
}

double Engine::ngram_estimate(std::span<const std::string_view> tokens) const {
  if (!ngram_) throw Error(ErrorCode::kConfig, "n-gram store is disabled (ngram_template = none)");
  return ngram_->estimate_tuple(tokens);
}

Engine& Engine::operator+=(const Engine& other) {
  check_compatible(config_.sketch, other.config_.sketch);
  if (config_.max_level != other.config_.max_level) {
    throw Error(ErrorCode::kIncompatible, "incompatible engines: max_level differs");
  }
  if (time_.epoch() != other.time_.epoch()) {
    throw Error(ErrorCode::kAlignment, "engines are not aligned: t = " + std::to_string(time_.epoch()) + " vs " +
                                           std::to_string(other.time_.epoch()));
  }
  if (ngram_.has_value() != other.ngram_.has_value()) {
    throw Error(ErrorCode::kIncompatible, "incompatible engines: only one has an n-gram store");
  }
  if (ngram_) {
    NgramStore merged = *ngram_;
    merged += *other.ngram_;
    time_ += other.time_;
    item_ += other.item_;
    dual_ += other.dual_;
    ngram_ = std::move(merged);
  } else {
    time_ += other.time_;
    item_ += other.item_;
    dual_ += other.dual_;
  }
  mass_ += other.mass_;
  return *this;
}

Bytes Engine::snapshot() const {
  Bytes out;
  ByteWriter w(out);
  w.magic(kMagic);
  w.u32(kVersion);
  w.string(config_.to_text());
  w.u64(mass_);
  w.u64(origin_);
  time_.serialize(w);
  item_.serialize(w);
  dual_.serialize(w);
  w.u32(ngram_ ? 1 : 0);
  if (ngram_) ngram_->serialize(w);
  return out;
}

Engine Engine::restore(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes);
  in.expect_magic(kMagic, "engine snapshot");
  in.expect_version(kVersion, "engine snapshot");
  EngineConfig config;
  try {
    config = EngineConfig::parse(in.string());
  } catch (const Error& e) {
    throw Error(ErrorCode::kCorrupt, std::string("engine snapshot config: ") + e.what());
  }
  const std::uint64_t mass = in.u64();
  const std::uint64_t origin = in.u64();
  TimePyramid time = TimePyramid::deserialize(in);
  ItemPyramid item = ItemPyramid::deserialize(in);
  DualPyramid dual = DualPyramid::deserialize(in);
  std::optional<NgramStore> ngram;
  const std::uint32_t has_ngram = in.u32();
  if (has_ngram > 1) throw Error(ErrorCode::kCorrupt, "engine snapshot n-gram flag is not 0 or 1");
  if (has_ngram == 1) ngram = NgramStore::deserialize(in);
  if (!in.at_end()) throw Error(ErrorCode::kCorrupt, "engine snapshot has trailing bytes");

  if (time.config() != config.sketch || item.config() != config.sketch || dual.config() != config.sketch ||
      time.max_level() != config.max_level || dual.max_level() != config.max_level) {
    throw Error(ErrorCode::kCorrupt, "engine snapshot pyramids disagree with its config");
  }
  if (item.epoch() != time.epoch() || dual.epoch() != time.epoch()) {
    throw Error(ErrorCode::kCorrupt, "engine snapshot pyramid clocks disagree");
  }
  if (ngram.has_value() != (config.ngram_template != "none")) {
    throw Error(ErrorCode::kCorrupt, "engine snapshot n-gram store disagrees with its config");
  }
  Engine e(std::move(config), std::move(time), std::move(item), std::move(dual), std::move(ngram));
  e.mass_ = mass;
  e.origin_ = origin;
  return e;
}

void Engine::save(const std::string& path) const { write_file(path, snapshot()); }

Engine Engine::load(const std::string& path) { return restore(read_file(path)); }

bool operator==(const Engine& a, const Engine& b) {
  return a.config_ == b.config_ && a.mass_ == b.mass_ && a.origin_ == b.origin_ && a.time_ == b.time_ &&
         a.item_ == b.item_ && a.dual_ == b.dual_ && a.ngram_ == b.ngram_;
}

}  // namespace epochsketch
