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
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "epochsketch/ngram.hpp"
#include "epochsketch/sketch.hpp"

namespace epochsketch {

enum class ClockMode { kReplay, kLive };

/// Every knob of a running engine. The text form is `key = value` lines
/// with `#` comments; see `EngineConfig::keys()` for the accepted names.
struct EngineConfig {
  ClockMode mode = ClockMode::kReplay;
  double epoch_seconds = 300.0;  // live mode only
  SketchConfig sketch{};
  std::uint32_t max_level = 11;
  double threshold_scale = 1.0;
  /// Records older than this many epochs behind the open one are dropped.
  std::uint64_t max_delay = 2048;

  /// none, unigram-chain, bigram-chain, direct, or file:<path>.
  std::string ngram_template = "none";
  std::uint32_t ngram_arity = 3;
  std::uint32_t ngram_log_width = 0;  // 0 uses sketch.log_width
  SmoothingConfig smoothing{};

  std::string snapshot_path;
  std::string listen = "127.0.0.1:7070";

  /// Throws kConfig for the first invalid field.
  void validate() const;

  /// d=4, b=16, m_max=8: small enough for tests and laptops.
  static EngineConfig desk_profile();

  /// Applies `key = value` lines on top of `base`. Unknown keys and bad
  /// values throw kConfig naming the line.
  static EngineConfig parse(std::string_view text, EngineConfig base);
  static EngineConfig parse(std::string_view text);
  static EngineConfig load(const std::string& path, EngineConfig base);
  static EngineConfig load(const std::string& path);

  /// Overrides any key from the environment as EPOCHSKETCH_<KEY>, e.g.
  /// EPOCHSKETCH_LOG_WIDTH=16. `getenv` is injectable for tests.
  void apply_env(const std::function<const char*(const char*)>& getenv = {});

  /// Sets one key from its text value.
  void set(std::string_view key, std::string_view value);

  /// Canonical text form; parse(to_text()) reproduces the config.
  std::string to_text() const;

  static const std::vector<std::string_view>& keys();

  /// Builds the template named by ngram_template (reads the file form).
  /// Returns false for "none".
  bool resolve_template(FactorTemplate& out) const;
  SketchConfig ngram_sketch() const;

  friend bool operator==(const EngineConfig&, const EngineConfig&) = default;
};

inline constexpr std::string_view kEnvPrefix = "EPOCHSKETCH_";

}  // namespace epochsketch
