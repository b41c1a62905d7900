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

#include "epochsketch/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "epochsketch/byte_io.hpp"
#include "epochsketch/error.hpp"

namespace epochsketch {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view expected) {
  throw Error(ErrorCode::kConfig,
              "config key '" + std::string(key) + "': '" + std::string(value) + "' is not " + std::string(expected));
}

template <typename T>
T parse_unsigned(std::string_view key, std::string_view value) {
  T v{};
  int base = 10;
  std::string_view digits = value;
  if (digits.size() > 2 && digits[0] == '0' && (digits[1] == 'x' || digits[1] == 'X')) {
    base = 16;
    digits.remove_prefix(2);
  }
  auto [end, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v, base);
  if (ec != std::errc{} || end != digits.data() + digits.size() || digits.empty()) {
    bad_value(key, value, "an unsigned integer");
  }
  return v;
}

double parse_double(std::string_view key, std::string_view value) {
  std::string s(value);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v)) bad_value(key, value, "a finite number");
  return v;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  bad_value(key, value, "a boolean");
}

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

std::string hex(std::uint64_t v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, 16);
  return "0x" + std::string(buf, end);
}

}  // namespace

const std::vector<std::string_view>& EngineConfig::keys() {
  static const std::vector<std::string_view> k{
      "mode",           "epoch_seconds",   "depth",          "log_width",
      "seed",           "max_level",       "threshold_scale", "max_delay",
      "ngram_template", "ngram_arity",     "ngram_log_width", "smoothing",
      "smoothing_n0",   "smoothing_n1",    "smoothing_vocabulary", "snapshot_path",
      "listen"};
  return k;
}

void EngineConfig::set(std::string_view key, std::string_view value) {
  value = trim(value);
  if (key == "mode") {
    if (value == "replay") {
      mode = ClockMode::kReplay;
    } else if (value == "live") {
      mode = ClockMode::kLive;
    } else {
      bad_value(key, value, "'replay' or 'live'");
    }
  } else if (key == "epoch_seconds") {
    epoch_seconds = parse_double(key, value);
  } else if (key == "depth") {
    sketch.depth = parse_unsigned<std::uint32_t>(key, value);
  } else if (key == "log_width") {
    sketch.log_width = parse_unsigned<std::uint32_t>(key, value);
  } else if (key == "seed") {
    sketch.seed = parse_unsigned<std::uint64_t>(key, value);
  } else if (key == "max_level") {
    max_level = parse_unsigned<std::uint32_t>(key, value);
  } else if (key == "threshold_scale") {
    threshold_scale = parse_double(key, value);
  } else if (key == "max_delay") {
    max_delay = parse_unsigned<std::uint64_t>(key, value);
  } else if (key == "ngram_template") {
    ngram_template = std::string(value);
  } else if (key == "ngram_arity") {
    ngram_arity = parse_unsigned<std::uint32_t>(key, value);
  } else if (key == "ngram_log_width") {
    ngram_log_width = parse_unsigned<std::uint32_t>(key, value);
  } else if (key == "smoothing") {
    smoothing.enabled = parse_bool(key, value);
  } else if (key == "smoothing_n0") {
    smoothing.n0 = parse_double(key, value);
  } else if (key == "smoothing_n1") {
    smoothing.n1 = parse_double(key, value);
  } else if (key == "smoothing_vocabulary") {
    smoothing.vocabulary = parse_unsigned<std::uint64_t>(key, value);
  } else if (key == "snapshot_path") {
    snapshot_path = std::string(value);
  } else if (key == "listen") {
    listen = std::string(value);
  } else {
    throw Error(ErrorCode::kConfig, "unknown config key '" + std::string(key) + "'");
  }
}

void EngineConfig::validate() const {
  sketch.validate();
  if (sketch.log_width >= 40) throw Error(ErrorCode::kConfig, "log_width must be below 40");
  if (max_level > 62) throw Error(ErrorCode::kConfig, "max_level must be at most 62");
  if (mode == ClockMode::kLive && !(epoch_seconds > 0.0)) {
    throw Error(ErrorCode::kConfig, "epoch_seconds must be positive in live mode");
  }
  if (!(threshold_scale >= 0.0)) throw Error(ErrorCode::kConfig, "threshold_scale must be non-negative");
  if (ngram_template != "none") {
    if (ngram_arity == 0) throw Error(ErrorCode::kConfig, "ngram_arity must be positive");
    ngram_sketch().validate();
  }
  if (smoothing.enabled) {
    if (!(smoothing.n0 > 0.0) || !(smoothing.n1 >= 0.0) || smoothing.vocabulary == 0) {
      throw Error(ErrorCode::kConfig, "smoothing needs n0 > 0, n1 >= 0 and a positive vocabulary");
    }
  }
  const auto colon = listen.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == listen.size()) {
    throw Error(ErrorCode::kConfig, "listen must be host:port, got '" + listen + "'");
  }
  parse_unsigned<std::uint16_t>("listen", std::string_view(listen).substr(colon + 1));
}

EngineConfig EngineConfig::desk_profile() {
  EngineConfig c;
  c.sketch.log_width = 16;
  c.max_level = 8;
  c.max_delay = 256;
  return c;
}

EngineConfig EngineConfig::parse(std::string_view text, EngineConfig base) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::kConfig, "config line " + std::to_string(line_no) + ": expected key = value");
    }
    base.set(trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  base.validate();
  return base;
}

EngineConfig EngineConfig::load(const std::string& path, EngineConfig base) {
  const Bytes bytes = read_file(path);
  return parse(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()), std::move(base));
}

EngineConfig EngineConfig::parse(std::string_view text) { return parse(text, EngineConfig{}); }

EngineConfig EngineConfig::load(const std::string& path) { return load(path, EngineConfig{}); }

void EngineConfig::apply_env(const std::function<const char*(const char*)>& getenv) {
  for (std::string_view key : keys()) {
    std::string name(kEnvPrefix);
    for (char c : key) name += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    const char* v = getenv ? getenv(name.c_str()) : std::getenv(name.c_str());
    if (v != nullptr) set(key, v);
  }
}

std::string EngineConfig::to_text() const {
  std::ostringstream out;
  out << "mode = " << (mode == ClockMode::kLive ? "live" : "replay") << '\n'
      << "epoch_seconds = " << format_double(epoch_seconds) << '\n'
      << "depth = " << sketch.depth << '\n'
      << "log_width = " << sketch.log_width << '\n'
      << "seed = " << hex(sketch.seed) << '\n'
      << "max_level = " << max_level << '\n'
      << "threshold_scale = " << format_double(threshold_scale) << '\n'
      << "max_delay = " << max_delay << '\n'
      << "ngram_template = " << ngram_template << '\n'
      << "ngram_arity = " << ngram_arity << '\n'
      << "ngram_log_width = " << ngram_log_width << '\n'
      << "smoothing = " << (smoothing.enabled ? "true" : "false") << '\n'
      << "smoothing_n0 = " << format_double(smoothing.n0) << '\n'
      << "smoothing_n1 = " << format_double(smoothing.n1) << '\n'
      << "smoothing_vocabulary = " << smoothing.vocabulary << '\n'
      << "snapshot_path = " << snapshot_path << '\n'
      << "listen = " << listen << '\n';
  return out.str();
}

SketchConfig EngineConfig::ngram_sketch() const {
  SketchConfig c = sketch;
  if (ngram_log_width != 0) c.log_width = ngram_log_width;
  return c;
}

bool EngineConfig::resolve_template(FactorTemplate& out) const {
  if (ngram_template == "none") return false;
  if (ngram_template == "unigram-chain") {
    out = FactorTemplate::unigram_chain(ngram_arity);
  } else if (ngram_template == "bigram-chain") {
    out = FactorTemplate::bigram_chain(ngram_arity);
  } else if (ngram_template == "direct") {
    out = FactorTemplate::direct(ngram_arity);
  } else if (ngram_template.rfind("file:", 0) == 0) {
    const Bytes bytes = read_file(ngram_template.substr(5));
    out = FactorTemplate::parse(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
  } else {
    throw Error(ErrorCode::kConfig, "unknown ngram_template '" + ngram_template + "'");
  }
  out.validate();
  return true;
}

}  // namespace epochsketch
