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

#include "epochsketch/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "epochsketch/engine.hpp"
#include "epochsketch/error.hpp"

namespace epochsketch {

namespace {

std::vector<Probe> collect_probes(const ExactCounts& oracle, const EvalSpec& spec) {
  std::vector<Probe> probes;
  for (Epoch e = 1; e <= oracle.last_epoch(); ++e) {
    std::vector<std::string> keys;
    for (const auto& [k, _] : oracle.epoch_counts(e)) keys.push_back(k);
    std::sort(keys.begin(), keys.end());
    for (auto& k : keys) probes.push_back({std::move(k), e});
  }
  if (probes.size() > spec.max_probes) {
    Rng rng(spec.probe_seed);
    for (std::size_t i = 0; i < spec.max_probes; ++i) {
      std::swap(probes[i], probes[i + uniform_below(rng, probes.size() - i)]);
    }
    probes.resize(spec.max_probes);
    std::sort(probes.begin(), probes.end(),
              [](const Probe& a, const Probe& b) { return std::tie(a.epoch, a.key) < std::tie(b.epoch, b.key); });
  }
  return probes;
}

void add(StratumScore& s, double exact, double time, double item, double interp, double pure) {
  s.pairs += 1;
  s.time += relative_term(time, exact);
  s.item += relative_term(item, exact);
  s.interpolation += relative_term(interp, exact);
  s.pure_interpolation += relative_term(pure, exact);
}

}  // namespace

double EvalResult::mean_absolute(const std::string& estimator, std::uint32_t age_band) const {
  const DeviationReport& r = reports.at(estimator);
  std::uint64_t pairs = 0;
  double absolute = 0.0;
  for (std::uint32_t f = 0; f < r.frequency_bands; ++f) {
    pairs += r.cell(age_band, f).pairs;
    absolute += r.cell(age_band, f).absolute;
  }
  return pairs == 0 ? std::numeric_limits<double>::quiet_NaN() : absolute / static_cast<double>(pairs);
}

EvalResult eval_run(const EngineConfig& config, const EvalSpec& spec) {
  EvalResult result;
  Engine engine(config);
  ExactCounts oracle;
  if (!spec.input_path.empty()) {
    result.ingest = ingest_file(engine, spec.input_path, IngestFormat::kReplay, &oracle);
  } else {
    spec.stream.validate();
    generate_stream(spec.stream, [&](Epoch e, std::string_view token) {
      while (engine.open_epoch() < e) engine.tick();
      engine.insert(token);
      oracle.record(token, e);
      ++result.ingest.inserted;
    });
    while (engine.epoch() < spec.stream.epochs) {
      engine.tick();
      ++result.ingest.ticks;
    }
  }
  oracle.seal();
  result.epochs = engine.epoch();

  const std::vector<Probe> probes = collect_probes(oracle, spec);
  if (probes.empty()) throw Error(ErrorCode::kEmptyReport, "evaluation produced no (key, epoch) pairs to score");
  result.probes = probes.size();

  std::uint64_t max_total = 0;
  for (const auto& [_, n] : oracle.key_totals()) max_total = std::max(max_total, n);
  Stratification strata;
  strata.by_age = true;
  strata.now = result.epochs;
  strata.age_bands = age_band(result.epochs - 1) + 1;
  strata.by_frequency = true;
  strata.frequency_edges = decade_edges(max_total);
  result.frequency_edges = strata.frequency_edges;
  result.age_bands = strata.age_bands;

  const PyramidSet pyramids = engine.pyramids();
  auto time_est = [&](std::string_view k, Epoch e) { return engine.time_estimate(k, e); };
  auto item_est = [&](std::string_view k, Epoch e) { return static_cast<double>(engine.item_estimate(k, e)); };
  auto interp_est = [&](std::string_view k, Epoch e) { return engine.estimate(k, e).value; };
  result.reports["time"] = deviation(oracle, time_est, probes, strata);
  result.reports["item"] = deviation(oracle, item_est, probes, strata);
  result.reports["interpolation"] = deviation(oracle, interp_est, probes, strata);

  for (const auto& p : probes) {
    const EstimateReport r = engine.estimate(p.key, p.epoch);
    const auto exact = static_cast<double>(oracle.exact(p.key, p.epoch));
    const double pure = interpolate(engine.time_pyramid().current().digest(p.key), p.epoch, pyramids);
    const double time = time_est(p.key, p.epoch);
    const double item = item_est(p.key, p.epoch);
    add(r.method == EstimateMethod::kHeavyHitter ? result.heavy : result.below_threshold, exact, time, item, r.value,
        pure);
    if (frequency_band(oracle.key_total(p.key), strata.frequency_edges) + 1 == strata.frequency_edges.size()) {
      add(result.top_band, exact, time, item, r.value, pure);
    }
    if (spec.keep_estimates) {
      result.estimates.push_back({p.key, p.epoch, oracle.exact(p.key, p.epoch), r.value, std::string(to_string(r.method))});
    }
  }

  for (const auto& name : eval_estimators()) {
    const DeviationReport& rep = result.reports.at(name);
    for (const auto& cell : rep.cells) {
      EvalRow row;
      row.estimator = name;
      row.age_band = cell.age_band;
      row.frequency_band = cell.frequency_band;
      row.frequency_lo = strata.frequency_edges[cell.frequency_band];
      row.frequency_hi =
          cell.frequency_band + 1 < strata.frequency_edges.size() ? strata.frequency_edges[cell.frequency_band + 1] : 0;
      row.pairs = cell.pairs;
      row.absolute = cell.absolute;
      row.relative = cell.relative;
      result.rows.push_back(std::move(row));
    }
  }
  return result;
}

void write_eval_csv(std::ostream& out, const EvalResult& result) {
  out << "estimator,age_band,ages,frequency_band,frequencies,pairs,absolute,relative\n";
  for (const auto& r : result.rows) {
    const std::string freq = r.frequency_hi == 0 ? std::to_string(r.frequency_lo) + "+"
                                                 : std::to_string(r.frequency_lo) + "-" + std::to_string(r.frequency_hi - 1);
    out << r.estimator << ',' << r.age_band << ',' << age_band_label(r.age_band) << ',' << r.frequency_band << ','
        << freq << ',' << r.pairs << ',' << format_number(r.absolute) << ',' << format_number(r.relative) << '\n';
  }
}

}  // namespace epochsketch
