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
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "epochsketch/config.hpp"
#include "epochsketch/generators.hpp"
#include "epochsketch/ingest.hpp"
#include "epochsketch/oracle.hpp"

namespace epochsketch {

struct EvalSpec {
  StreamSpec stream{};
  /// Replay file (`epoch<TAB>token`); when set it replaces the generator.
  std::string input_path;
  /// Scored (key, epoch) pairs are all pairs with a non-zero exact count,
  /// subsampled to at most this many.
  std::uint64_t max_probes = 50000;
  std::uint64_t probe_seed = 7;
  bool keep_estimates = false;
};

inline const std::vector<std::string>& eval_estimators() {
  static const std::vector<std::string> names{"time", "item", "interpolation"};
  return names;
}

struct EvalRow {
  std::string estimator;
  std::uint32_t age_band = 0;
  std::uint32_t frequency_band = 0;
  std::uint64_t frequency_lo = 0;
  std::uint64_t frequency_hi = 0;  // 0 means unbounded
  std::uint64_t pairs = 0;
  double absolute = 0.0;
  double relative = 0.0;
};

/// Relative-deviation sums over one group of probes.
struct StratumScore {
  std::uint64_t pairs = 0;
  double time = 0.0;
  double item = 0.0;
  double interpolation = 0.0;       // the switching estimator
  double pure_interpolation = 0.0;  // the interpolation formula alone
};

struct EvalResult {
  Epoch epochs = 0;
  std::uint64_t probes = 0;
  std::vector<std::uint64_t> frequency_edges;
  std::uint32_t age_bands = 0;
  std::map<std::string, DeviationReport> reports;
  std::vector<EvalRow> rows;  // estimator-major, then age, then frequency band
  StratumScore below_threshold;  // probes the switch routes to interpolation
  StratumScore heavy;            // probes the switch answers from the item sketch
  StratumScore top_band;         // probes of keys in the highest frequency band
  std::vector<EstimateRow> estimates;
  IngestSummary ingest;

  /// Mean absolute deviation per pair in an age band, across frequency bands;
  /// NaN when the band has no pairs.
  double mean_absolute(const std::string& estimator, std::uint32_t age_band) const;
};

/// Throws kGenerator for an invalid stream spec, kEmptyReport if nothing
/// was scored.
EvalResult eval_run(const EngineConfig& config, const EvalSpec& spec);

/// Header: estimator,age_band,ages,frequency_band,frequencies,pairs,absolute,relative
void write_eval_csv(std::ostream& out, const EvalResult& result);

}  // namespace epochsketch
