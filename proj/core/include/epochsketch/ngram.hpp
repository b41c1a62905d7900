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
#include <deque>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "epochsketch/sketch.hpp"

namespace epochsketch {

using IndexSet = std::vector<std::uint32_t>;  // sorted, 0-based positions

/// Clique/separator decomposition of a k-tuple. Cliques must be listed in an
/// order with the running-intersection property; the separators are then
/// exactly the non-empty intersections of each clique with its predecessors.
struct FactorTemplate {
  std::string name;
  std::uint32_t arity = 0;
  std::vector<IndexSet> cliques;
  std::vector<IndexSet> separators;

  /// Throws kInvalidTemplate describing the first structural violation.
  void validate() const;

  /// {1},{2},...,{k}: fully independent symbols.
  static FactorTemplate unigram_chain(std::uint32_t k);
  /// {1,2},{2,3},... with separators {2},{3},...: first-order Markov chain.
  static FactorTemplate bigram_chain(std::uint32_t k);
  /// A single clique over all k positions, i.e. the tuple sketched directly.
  static FactorTemplate direct(std::uint32_t k);

  /// Text form: `arity k`, `clique i,j,...`, `sep i,...` and optional
  /// `name <word>` lines, 1-based, `#` starts a comment.
  static FactorTemplate parse(std::string_view text);
  std::string to_text() const;
};

struct SmoothingConfig {
  bool enabled = false;
  double n0 = 1.0;               // unigram pseudo-count
  double n1 = 1.0;               // bigram backoff weight
  std::uint64_t vocabulary = 1u << 20;

  friend bool operator==(const SmoothingConfig&, const SmoothingConfig&) = default;
};

/// Relative offsets of an index set, e.g. {1,2} and {2,3} are both {0,1}.
/// Projections with equal shape share one sketch.
using Shape = std::vector<std::uint32_t>;
Shape shape_of(const IndexSet& positions);

/// Injective key for a symbol tuple: each symbol as u32 length + bytes.
std::string encode_tuple(std::span<const std::string_view> symbols);

/// Frequencies of symbol tuples from sketched marginals. Each tuple factorizes
/// as n^(|S|-|C|+1) * prod n_C / prod n_S over the template's cliques C and
/// separators S, where n is the number of tuple windows seen.
class NgramStore {
 public:
  NgramStore(FactorTemplate tmpl, const SketchConfig& config, SmoothingConfig smoothing = {});

  const FactorTemplate& factor_template() const { return template_; }
  const SmoothingConfig& smoothing() const { return smoothing_; }
  const SketchConfig& config() const { return config_; }
  std::uint64_t windows() const { return windows_; }
  const std::map<Shape, CmSketch>& sketches() const { return sketches_; }

  /// One isolated tuple: every clique and separator projection is inserted.
  /// Throws kArity when the tuple length differs from the template arity.
  void insert_tuple(std::span<const std::string_view> symbols);
  void insert_tuple(const std::vector<std::string>& symbols);

  /// Streaming input: each shape counts its projection once per token
  /// position, and every completed k-token window adds one to windows().
  void push_token(std::string_view token);
  void insert_sequence(std::span<const std::string> tokens);
  /// Starts a new sequence so no window spans the boundary.
  void break_sequence() { history_.clear(); seen_ = 0; }

  /// Sketched count of `symbols` under `shape`; throws kMissingShape if the
  /// template has no clique or separator of that shape.
  std::uint64_t shape_count(const Shape& shape, std::span<const std::string_view> symbols) const;

  /// Estimated number of windows equal to `symbols`. Unsmoothed, a zero
  /// separator count alongside non-zero clique counts throws kInconsistentCounts.
  double estimate_tuple(std::span<const std::string_view> symbols) const;
  double estimate_tuple(const std::vector<std::string>& symbols) const;

  /// (n_a + n0) / (n + L n0)
  double smoothed_unigram(std::string_view a) const;
  /// (n_ab + n1 p(a) p(b)) / (n + n1)
  double smoothed_bigram(std::string_view a, std::string_view b) const;

  NgramStore& operator+=(const NgramStore& other);

  void serialize(ByteWriter& out) const;
  static NgramStore deserialize(ByteReader& in);

  friend bool operator==(const NgramStore& a, const NgramStore& b);

 private:
  double raw_probability(const IndexSet& positions, std::span<const std::string_view> symbols) const;
  double smoothed_probability(const IndexSet& positions, std::span<const std::string_view> symbols) const;
  const CmSketch& sketch_for(const Shape& shape) const;

  FactorTemplate template_;
  SketchConfig config_;
  SmoothingConfig smoothing_;
  std::map<Shape, CmSketch> sketches_;
  std::deque<std::string> history_;  // last arity-1 tokens of the stream
  std::uint64_t seen_ = 0;           // tokens since the last sequence break
  std::uint64_t windows_ = 0;
};

}  // namespace epochsketch
