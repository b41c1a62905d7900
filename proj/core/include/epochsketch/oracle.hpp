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
#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "epochsketch/time_pyramid.hpp"

namespace epochsketch {

struct StringHash {
  using is_transparent = void;
  std::size_t operator()(std::string_view s) const noexcept { return std::hash<std::string_view>{}(s); }
};

using CountMap = std::unordered_map<std::string, std::uint64_t, StringHash, std::equal_to<>>;

/// Exact (key, epoch) counts: the gold standard every estimate is scored
/// against. Sized for desk-scale runs; larger inputs should sample keys.
class ExactCounts {
 public:
  /// Throws kSealed after seal(), kRange for epoch 0.
  void record(std::string_view key, Epoch epoch, std::uint64_t count = 1);
  void seal() { sealed_ = true; }
  bool sealed() const { return sealed_; }

  std::uint64_t exact(std::string_view key, Epoch epoch) const;
  /// Sum over the inclusive epoch range. Throws kRange when from is 0 or from > to.
  std::uint64_t exact_range(std::string_view key, Epoch from, Epoch to) const;

  std::uint64_t key_total(std::string_view key) const;
  std::uint64_t epoch_total(Epoch epoch) const;
  std::uint64_t total() const { return total_; }
  Epoch last_epoch() const { return static_cast<Epoch>(by_epoch_.size()); }
  std::size_t distinct_keys() const { return key_totals_.size(); }

  /// Keys in lexicographic order.
  std::vector<std::string> keys() const;
  const CountMap& epoch_counts(Epoch epoch) const;
  const CountMap& key_totals() const { return key_totals_; }

 private:
  std::vector<CountMap> by_epoch_;  // by_epoch_[e - 1]
  std::vector<std::uint64_t> epoch_totals_;
  CountMap key_totals_;
  std::uint64_t total_ = 0;
  bool sealed_ = false;
};

struct Probe {
  std::string key;
  Epoch epoch = 0;
};

using Estimator = std::function<double(std::string_view key, Epoch epoch)>;

/// Dyadic age bands: 0 -> age 0, k -> ages [2^(k-1), 2^k).
std::uint32_t age_band(Epoch age);
std::string age_band_label(std::uint32_t band);

/// Index of the band [edges[i], edges[i+1]) holding `count`; edges ascend from 1.
std::uint32_t frequency_band(std::uint64_t count, const std::vector<std::uint64_t>& edges);
/// Decade edges 1, 10, 100, ... up to the first edge above max_count.
std::vector<std::uint64_t> decade_edges(std::uint64_t max_count);

struct Stratification {
  bool by_age = false;
  Epoch now = 0;  // reference epoch for ages
  std::uint32_t age_bands = 0;  // 0 derives the count from `now`
  bool by_frequency = false;
  std::vector<std::uint64_t> frequency_edges;
};

struct DeviationCell {
  std::uint32_t age_band = 0;
  std::uint32_t frequency_band = 0;
  std::uint64_t pairs = 0;
  double absolute = 0.0;
  double relative = 0.0;
};

/// absolute = sum |est - exact|; relative = sum |est - exact| / est. A zero
/// estimate contributes |exact| to the relative sum.
struct DeviationReport {
  std::uint64_t pairs = 0;
  double absolute = 0.0;
  double relative = 0.0;
  double estimate_mass = 0.0;    // sum of estimates
  double exact_mass = 0.0;       // sum of exact counts
  double min_signed = 0.0;       // smallest est - exact seen
  std::uint32_t age_bands = 1;
  std::uint32_t frequency_bands = 1;
  std::vector<DeviationCell> cells;  // age-major, every (age, frequency) pair present

  const DeviationCell& cell(std::uint32_t age, std::uint32_t freq) const {
    return cells.at(age * frequency_bands + freq);
  }
};

double relative_term(double estimate, double exact);

/// Scores `estimator` on every probe. Throws kEmptyReport for no probes.
DeviationReport deviation(const ExactCounts& oracle, const Estimator& estimator,
                          const std::vector<Probe>& probes, const Stratification& strata = {});

struct EstimateRow {
  std::string key;
  Epoch epoch = 0;
  std::uint64_t exact = 0;
  double estimate = 0.0;
  std::string method;
};

/// CSV with header `key,epoch,exact,estimate,method`.
void write_estimates_csv(std::ostream& out, const std::vector<EstimateRow>& rows);
std::string csv_field(std::string_view s);
std::string format_number(double v);

}  // namespace epochsketch
