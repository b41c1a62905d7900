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

#include "epochsketch/ngram.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

#include "epochsketch/error.hpp"

namespace epochsketch {

namespace {

constexpr std::string_view kMagic = "HKNG";
constexpr std::uint32_t kVersion = 1;

[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorCode::kInvalidTemplate, msg); }

std::string describe(const IndexSet& s) {
  std::string out = "{";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(s[i] + 1);
  }
  return out + "}";
}

IndexSet parse_indices(std::string_view list, std::uint32_t line_no) {
  IndexSet out;
  std::string item;
  std::stringstream ss{std::string(list)};
  while (std::getline(ss, item, ',')) {
    item.erase(std::remove_if(item.begin(), item.end(), ::isspace), item.end());
    if (item.empty()) continue;
    std::size_t used = 0;
    long v = 0;
    try {
      v = std::stol(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size() || v < 1) {
      invalid("line " + std::to_string(line_no) + ": bad position '" + item + "'");
    }
    out.push_back(static_cast<std::uint32_t>(v - 1));
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string_view> project(const IndexSet& positions, std::span<const std::string_view> symbols) {
  std::vector<std::string_view> out;
  out.reserve(positions.size());
  for (auto p : positions) out.push_back(symbols[p]);
  return out;
}

}  // namespace

void FactorTemplate::validate() const {
  if (arity == 0) invalid("template arity must be at least 1");
  if (cliques.empty()) invalid("template needs at least one clique");
  auto check_set = [&](const IndexSet& s, const char* what) {
    if (s.empty()) invalid(std::string("empty ") + what);
    if (!std::is_sorted(s.begin(), s.end()) || std::adjacent_find(s.begin(), s.end()) != s.end()) {
      invalid(std::string(what) + " " + describe(s) + " has repeated or unsorted positions");
    }
    if (s.back() >= arity) invalid(std::string(what) + " " + describe(s) + " exceeds arity");
  };
  std::vector<bool> covered(arity, false);
  for (const auto& c : cliques) {
    check_set(c, "clique");
    for (auto p : c) covered[p] = true;
  }
  for (std::uint32_t p = 0; p < arity; ++p) {
    if (!covered[p]) invalid("position " + std::to_string(p + 1) + " is not covered by any clique");
  }
  for (const auto& s : separators) check_set(s, "separator");
  if (separators.size() + 1 > cliques.size()) {
    invalid("a junction tree over " + std::to_string(cliques.size()) + " cliques has at most " +
            std::to_string(cliques.size() - 1) + " separators");
  }

  // Running intersection: each clique meets the union of its predecessors
  // inside a single earlier clique, and that intersection is its separator.
  std::vector<IndexSet> expected;
  IndexSet seen;
  for (std::size_t k = 0; k < cliques.size(); ++k) {
    if (k > 0) {
      IndexSet inter;
      std::set_intersection(cliques[k].begin(), cliques[k].end(), seen.begin(), seen.end(),
                            std::back_inserter(inter));
      if (!inter.empty()) {
        const bool contained = std::any_of(cliques.begin(), cliques.begin() + k, [&](const IndexSet& c) {
          return std::includes(c.begin(), c.end(), inter.begin(), inter.end());
        });
        if (!contained) {
          invalid("clique " + describe(cliques[k]) + " violates the running-intersection property");
        }
        expected.push_back(inter);
      }
    }
    IndexSet merged;
    std::set_union(seen.begin(), seen.end(), cliques[k].begin(), cliques[k].end(), std::back_inserter(merged));
    seen = std::move(merged);
  }
  auto given = separators;
  std::sort(given.begin(), given.end());
  std::sort(expected.begin(), expected.end());
  if (given != expected) {
    std::string want;
    for (const auto& e : expected) want += describe(e) + " ";
    invalid("separators do not match the clique intersections; expected " +
            (want.empty() ? std::string("none") : want));
  }
}

FactorTemplate FactorTemplate::unigram_chain(std::uint32_t k) {
  FactorTemplate t;
  t.name = "unigram-chain";
  t.arity = k;
  for (std::uint32_t i = 0; i < k; ++i) t.cliques.push_back({i});
  return t;
}

FactorTemplate FactorTemplate::bigram_chain(std::uint32_t k) {
  FactorTemplate t;
  t.name = "bigram-chain";
  t.arity = k;
  if (k == 1) {
    t.cliques.push_back({0});
    return t;
  }
  for (std::uint32_t i = 0; i + 1 < k; ++i) t.cliques.push_back({i, i + 1});
  for (std::uint32_t i = 1; i + 1 < k; ++i) t.separators.push_back({i});
  return t;
}

FactorTemplate FactorTemplate::direct(std::uint32_t k) {
  FactorTemplate t;
  t.name = "direct";
  t.arity = k;
  IndexSet all;
  for (std::uint32_t i = 0; i < k; ++i) all.push_back(i);
  t.cliques.push_back(std::move(all));
  return t;
}

FactorTemplate FactorTemplate::parse(std::string_view text) {
  FactorTemplate t;
  t.name = "custom";
  bool have_arity = false;
  std::stringstream in{std::string(text)};
  std::string line;
  std::uint32_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::stringstream ls(line);
    std::string keyword;
    if (!(ls >> keyword)) continue;
    std::string rest;
    std::getline(ls, rest);
    if (keyword == "arity") {
      const IndexSet v = parse_indices(rest, line_no);
      if (v.size() != 1) invalid("line " + std::to_string(line_no) + ": arity takes one value");
      t.arity = v[0] + 1;
      have_arity = true;
    } else if (keyword == "clique") {
      t.cliques.push_back(parse_indices(rest, line_no));
    } else if (keyword == "sep") {
      t.separators.push_back(parse_indices(rest, line_no));
    } else if (keyword == "name") {
      std::stringstream ns(rest);
      ns >> t.name;
    } else {
      invalid("line " + std::to_string(line_no) + ": unknown keyword '" + keyword + "'");
    }
  }
  if (!have_arity) invalid("template is missing an 'arity' line");
  t.validate();
  return t;
}

std::string FactorTemplate::to_text() const {
  auto list = [](const IndexSet& s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (i) out += ',';
      out += std::to_string(s[i] + 1);
    }
    return out;
  };
  std::string out = "name " + name + "\narity " + std::to_string(arity) + "\n";
  for (const auto& c : cliques) out += "clique " + list(c) + "\n";
  for (const auto& s : separators) out += "sep " + list(s) + "\n";
  return out;
}

Shape shape_of(const IndexSet& positions) {
  Shape s;
  s.reserve(positions.size());
  for (auto p : positions) s.push_back(p - positions.front());
  return s;
}

std::string encode_tuple(std::span<const std::string_view> symbols) {
  std::string key;
  for (auto sym : symbols) {
    const auto n = static_cast<std::uint32_t>(sym.size());
    for (int i = 0; i < 4; ++i) key.push_back(static_cast<char>((n >> (8 * i)) & 0xff));
    key.append(sym);
  }
  return key;
}

NgramStore::NgramStore(FactorTemplate tmpl, const SketchConfig& config, SmoothingConfig smoothing)
    : template_(std::move(tmpl)), config_(config), smoothing_(smoothing) {
  template_.validate();
  config_.validate();
  if (smoothing_.vocabulary == 0 || smoothing_.n0 < 0 || smoothing_.n1 < 0) {
    throw Error(ErrorCode::kConfig, "smoothing needs n0, n1 >= 0 and a positive vocabulary size");
  }
  for (const auto& c : template_.cliques) sketches_.try_emplace(shape_of(c), config_);
  for (const auto& s : template_.separators) sketches_.try_emplace(shape_of(s), config_);
  if (smoothing_.enabled && sketches_.count(Shape{0, 1}) && !sketches_.count(Shape{0})) {
    throw Error(ErrorCode::kConfig,
                "bigram smoothing needs a single-position clique or separator in the template");
  }
}

void NgramStore::insert_tuple(std::span<const std::string_view> symbols) {
  if (symbols.size() != template_.arity) {
    throw Error(ErrorCode::kArity, "tuple of length " + std::to_string(symbols.size()) +
                                       " for a template of arity " + std::to_string(template_.arity));
  }
  auto add = [&](const IndexSet& positions) {
    const auto proj = project(positions, symbols);
    sketches_.at(shape_of(positions)).insert(encode_tuple(proj));
  };
  for (const auto& c : template_.cliques) add(c);
  for (const auto& s : template_.separators) add(s);
  ++windows_;
}

void NgramStore::insert_tuple(const std::vector<std::string>& symbols) {
  std::vector<std::string_view> views(symbols.begin(), symbols.end());
  insert_tuple(views);
}

void NgramStore::push_token(std::string_view token) {
  std::vector<std::string_view> window(history_.begin(), history_.end());
  window.push_back(token);
  std::vector<std::string_view> proj;
  for (auto& [shape, sketch] : sketches_) {
    const std::size_t span = shape.back() + 1;
    if (window.size() < span) continue;
    const std::size_t start = window.size() - span;
    proj.clear();
    for (auto off : shape) proj.push_back(window[start + off]);
    sketch.insert(encode_tuple(proj));
  }
  ++seen_;
  if (seen_ >= template_.arity) ++windows_;
  if (template_.arity > 1) {
    history_.emplace_back(token);
    if (history_.size() > template_.arity - 1) history_.pop_front();
  }
}

void NgramStore::insert_sequence(std::span<const std::string> tokens) {
  for (const auto& tok : tokens) push_token(tok);
}

const CmSketch& NgramStore::sketch_for(const Shape& shape) const {
  auto it = sketches_.find(shape);
  if (it == sketches_.end()) {
    std::string s;
    for (auto o : shape) s += std::to_string(o) + " ";
    throw Error(ErrorCode::kMissingShape, "template has no sketch for shape { " + s + "}");
  }
  return it->second;
}

std::uint64_t NgramStore::shape_count(const Shape& shape, std::span<const std::string_view> symbols) const {
  return sketch_for(shape).query(encode_tuple(symbols));
}

double NgramStore::raw_probability(const IndexSet& positions, std::span<const std::string_view> symbols) const {
  const auto proj = project(positions, symbols);
  return static_cast<double>(shape_count(shape_of(positions), proj));
}

double NgramStore::smoothed_probability(const IndexSet& positions,
                                        std::span<const std::string_view> symbols) const {
  if (positions.size() == 1) return smoothed_unigram(symbols[positions[0]]);
  if (positions.size() == 2 && positions[1] == positions[0] + 1) {
    return smoothed_bigram(symbols[positions[0]], symbols[positions[1]]);
  }
  const double n = static_cast<double>(windows_);
  return n == 0 ? 0.0 : raw_probability(positions, symbols) / n;
}

double NgramStore::estimate_tuple(std::span<const std::string_view> symbols) const {
  if (symbols.size() != template_.arity) {
    throw Error(ErrorCode::kArity, "tuple of length " + std::to_string(symbols.size()) +
                                       " for a template of arity " + std::to_string(template_.arity));
  }
  const double n = static_cast<double>(windows_);
  if (smoothing_.enabled) {
    double p = 1.0;
    for (const auto& c : template_.cliques) p *= smoothed_probability(c, symbols);
    for (const auto& s : template_.separators) p /= smoothed_probability(s, symbols);
    return n * p;
  }
  double numerator = 1.0;
  for (const auto& c : template_.cliques) numerator *= raw_probability(c, symbols);
  double denominator = 1.0;
  for (const auto& s : template_.separators) denominator *= raw_probability(s, symbols);
  if (denominator == 0.0) {
    if (numerator == 0.0) return 0.0;
    throw Error(ErrorCode::kInconsistentCounts, "separator count is zero while clique counts are not");
  }
  const int exponent = 1 + static_cast<int>(template_.separators.size()) -
                       static_cast<int>(template_.cliques.size());
  if (n == 0.0) return 0.0;
  return std::pow(n, exponent) * numerator / denominator;
}

double NgramStore::estimate_tuple(const std::vector<std::string>& symbols) const {
  std::vector<std::string_view> views(symbols.begin(), symbols.end());
  return estimate_tuple(views);
}

double NgramStore::smoothed_unigram(std::string_view a) const {
  const std::string_view sym[] = {a};
  const double na = static_cast<double>(shape_count(Shape{0}, sym));
  const double n = static_cast<double>(windows_);
  const double L = static_cast<double>(smoothing_.vocabulary);
  const double denom = n + L * smoothing_.n0;
  return denom == 0.0 ? 0.0 : (na + smoothing_.n0) / denom;
}

double NgramStore::smoothed_bigram(std::string_view a, std::string_view b) const {
  const std::string_view sym[] = {a, b};
  const double nab = static_cast<double>(shape_count(Shape{0, 1}, sym));
  const double n = static_cast<double>(windows_);
  const double denom = n + smoothing_.n1;
  if (denom == 0.0) return 0.0;
  return (nab + smoothing_.n1 * smoothed_unigram(a) * smoothed_unigram(b)) / denom;
}

NgramStore& NgramStore::operator+=(const NgramStore& other) {
  if (template_.to_text() != other.template_.to_text()) {
    throw Error(ErrorCode::kIncompatible, "n-gram stores use different templates");
  }
  check_compatible(config_, other.config_);
  for (auto& [shape, sketch] : sketches_) sketch += other.sketches_.at(shape);
  windows_ += other.windows_;
  return *this;
}

void NgramStore::serialize(ByteWriter& out) const {
  out.magic(kMagic);
  out.u32(kVersion);
  out.string(template_.to_text());
  out.u32(config_.depth);
  out.u32(config_.log_width);
  out.u64(config_.seed);
  out.u32(smoothing_.enabled ? 1 : 0);
  out.f64(smoothing_.n0);
  out.f64(smoothing_.n1);
  out.u64(smoothing_.vocabulary);
  out.u64(windows_);
  out.u64(seen_);
  out.u32(static_cast<std::uint32_t>(history_.size()));
  for (const auto& h : history_) out.string(h);
  out.u32(static_cast<std::uint32_t>(sketches_.size()));
  for (const auto& [shape, sketch] : sketches_) {
    out.u32(static_cast<std::uint32_t>(shape.size()));
    for (auto o : shape) out.u32(o);
    sketch.serialize(out);
  }
}

NgramStore NgramStore::deserialize(ByteReader& in) {
  in.expect_magic(kMagic, "n-gram store");
  in.expect_version(kVersion, "n-gram store");
  FactorTemplate tmpl = FactorTemplate::parse(in.string());
  SketchConfig config;
  config.depth = in.u32();
  config.log_width = in.u32();
  config.seed = in.u64();
  SmoothingConfig smoothing;
  smoothing.enabled = in.u32() != 0;
  smoothing.n0 = in.f64();
  smoothing.n1 = in.f64();
  smoothing.vocabulary = in.u64();
  const std::uint64_t windows = in.u64();
  const std::uint64_t seen = in.u64();
  const std::uint32_t history = in.u32();
  if (history >= std::max<std::uint32_t>(tmpl.arity, 1)) {
    throw Error(ErrorCode::kCorrupt, "n-gram history longer than the template allows");
  }
  NgramStore store(std::move(tmpl), config, smoothing);
  for (std::uint32_t i = 0; i < history; ++i) store.history_.push_back(in.string());
  const std::uint32_t shapes = in.u32();
  if (shapes != store.sketches_.size()) {
    throw Error(ErrorCode::kCorrupt, "n-gram shape directory does not match the template");
  }
  for (std::uint32_t i = 0; i < shapes; ++i) {
    const std::uint32_t len = in.u32();
    if (len > in.remaining() / 4) throw Error(ErrorCode::kTruncated, "n-gram shape truncated");
    Shape shape(len);
    for (auto& o : shape) o = in.u32();
    auto it = store.sketches_.find(shape);
    if (it == store.sketches_.end()) throw Error(ErrorCode::kCorrupt, "unexpected n-gram shape");
    CmSketch sketch = CmSketch::deserialize(in);
    if (sketch.config() != config) throw Error(ErrorCode::kCorrupt, "n-gram sketch config mismatch");
    it->second = std::move(sketch);
  }
  store.windows_ = windows;
  store.seen_ = seen;
  return store;
}

bool operator==(const NgramStore& a, const NgramStore& b) {
  return a.template_.to_text() == b.template_.to_text() && a.config_ == b.config_ &&
         a.smoothing_ == b.smoothing_ && a.sketches_ == b.sketches_ && a.history_ == b.history_ &&
         a.seen_ == b.seen_ && a.windows_ == b.windows_;
}

}  // namespace epochsketch
