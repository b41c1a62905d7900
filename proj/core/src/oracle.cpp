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

#include "epochsketch/oracle.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <ostream>

#include "epochsketch/error.hpp"

namespace epochsketch {

namespace {

const CountMap kEmpty;

}  // namespace

void ExactCounts::record(std::string_view key, Epoch epoch, std::uint64_t count) {
  if (sealed_) throw Error(ErrorCode::kSealed, "oracle is sealed");
  if (epoch == 0) throw Error(ErrorCode::kRange, "epochs are numbered from 1");
  if (epoch > by_epoch_.size()) {
    by_epoch_.resize(epoch);
    epoch_totals_.resize(epoch, 0);
  }
  auto& m = by_epoch_[epoch - 1];
  if (auto it = m.find(key); it != m.end()) {
    it->second += count;
  } else {
    m.emplace(std::string(key), count);
  }
  if (auto it = key_totals_.find(key); it != key_totals_.end()) {
    it->second += count;
  } else {
    key_totals_.emplace(std::string(key), count);
  }
  epoch_totals_[epoch - 1] += count;
  total_ += count;
}

std::uint64_t ExactCounts::exact(std::string_view key, Epoch epoch) const {
  if (epoch == 0) throw Error(ErrorCode::kRange, "epochs are numbered from 1");
  if (epoch > by_epoch_.size()) return 0;
  const auto& m = by_epoch_[epoch - 1];
  auto it = m.find(key);
  return it == m.end() ? 0 : it->second;
}

std::uint64_t ExactCounts::exact_range(std::string_view key, Epoch from, Epoch to) const {
  if (from == 0 || from > to) {
    throw Error(ErrorCode::kRange, "bad epoch range [" + std::to_string(from) + ", " +
                                       std::to_string(to) + "]");
  }
  std::uint64_t sum = 0;
  for (Epoch e = from; e <= std::min<Epoch>(to, last_epoch()); ++e) sum += exact(key, e);
  return sum;
}

std::uint64_t ExactCounts::key_total(std::string_view key) const {
  auto it = key_totals_.find(key);
  return it == key_totals_.end() ? 0 : it->second;
}

std::uint64_t ExactCounts::epoch_total(Epoch epoch) const {
  if (epoch == 0) throw Error(ErrorCode::kRange, "epochs are numbered from 1");
  return epoch > epoch_totals_.size() ? 0 : epoch_totals_[epoch - 1];
}

std::vector<std::string> ExactCounts::keys() const {
  std::vector<std::string> out;
  out.reserve(key_totals_.size());
  for (const auto& [k, _] : key_totals_) out.push_back(k);
  std::sort(out.begin(), out.end());
  return out;
}

const CountMap& ExactCounts::epoch_counts(Epoch epoch) const {
  if (epoch == 0) throw Error(ErrorCode::kRange, "epochs are numbered from 1");
  return epoch > by_epoch_.size() ? kEmpty : by_epoch_[epoch - 1];
}

std::uint32_t age_band(Epoch age) { return static_cast<std::uint32_t>(std::bit_width(age)); }

std::string age_band_label(std::uint32_t band) {
  if (band == 0) return "0";
  const Epoch lo = Epoch{1} << (band - 1);
  const Epoch hi = (Epoch{1} << band) - 1;
  return lo == hi ? std::to_string(lo) : std::to_string(lo) + "-" + std::to_string(hi);
}

std::uint32_t frequency_band(std::uint64_t count, const std::vector<std::uint64_t>& edges) {
  auto it = std::upper_bound(edges.begin(), edges.end(), count);
  const auto idx = static_cast<std::uint32_t>(it - edges.begin());
  return idx == 0 ? 0 : idx - 1;
}

std::vector<std::uint64_t> decade_edges(std::uint64_t max_count) {
  std::vector<std::uint64_t> edges{1};
  while (edges.back() <= max_count / 10) edges.push_back(edges.back() * 10);
  return edges;
}

double relative_term(double estimate, double exact) {
  const double diff = std::abs(estimate - exact);
  return estimate == 0.0 ? diff : diff / estimate;
}

DeviationReport deviation(const ExactCounts& oracle, const Estimator& estimator,
                          const std::vector<Probe>& probes, const Stratification& strata) {
  if (probes.empty()) throw Error(ErrorCode::kEmptyReport, "no probes to score");
  DeviationReport r;
  if (strata.by_age) {
    r.age_bands = strata.age_bands != 0 ? strata.age_bands : age_band(strata.now) + 1;
  }
  if (strata.by_frequency) {
    if (strata.frequency_edges.empty()) throw Error(ErrorCode::kInvalidArgument, "no frequency edges");
    r.frequency_bands = static_cast<std::uint32_t>(strata.frequency_edges.size());
  }
  r.cells.resize(std::size_t{r.age_bands} * r.frequency_bands);
  for (std::uint32_t a = 0; a < r.age_bands; ++a) {
    for (std::uint32_t f = 0; f < r.frequency_bands; ++f) {
      auto& c = r.cells[a * r.frequency_bands + f];
      c.age_band = a;
      c.frequency_band = f;
    }
  }
  bool first = true;
  for (const auto& p : probes) {
    const double est = estimator(p.key, p.epoch);
    const double exact = static_cast<double>(oracle.exact(p.key, p.epoch));
    const double abs_term = std::abs(est - exact);
    const double rel_term = relative_term(est, exact);
    r.pairs += 1;
    r.absolute += abs_term;
    r.relative += rel_term;
    r.estimate_mass += est;
    r.exact_mass += exact;
    r.min_signed = first ? est - exact : std::min(r.min_signed, est - exact);
    first = false;

    std::uint32_t a = 0;
    std::uint32_t f = 0;
    if (strata.by_age) {
      const Epoch age = strata.now >= p.epoch ? strata.now - p.epoch : 0;
      a = std::min(age_band(age), r.age_bands - 1);
    }
    if (strata.by_frequency) f = frequency_band(oracle.key_total(p.key), strata.frequency_edges);
    auto& c = r.cells[a * r.frequency_bands + f];
    c.pairs += 1;
    c.absolute += abs_term;
    c.relative += rel_term;
  }
  return r;
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string format_number(double v) {
  if (v == std::floor(v) && std::abs(v) < 9.007199254740992e15) {
    return std::to_string(static_cast<long long>(v));
  }
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc{} ? std::string(buf, end) : std::string("nan");
}

void write_estimates_csv(std::ostream& out, const std::vector<EstimateRow>& rows) {
  out << "key,epoch,exact,estimate,method\n";
  for (const auto& r : rows) {
    out << csv_field(r.key) << ',' << r.epoch << ',' << r.exact << ',' << format_number(r.estimate) << ','
        << r.method << '\n';
  }
}

}  // namespace epochsketch
