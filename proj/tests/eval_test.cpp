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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <unistd.h>

#include "support.hpp"

namespace epochsketch {
namespace {

EngineConfig eval_config(std::uint32_t log_width) {
  EngineConfig c = EngineConfig::desk_profile();
  c.sketch.log_width = log_width;
  return c;
}

TEST(Eval, SingleEpochEstimatorsAgree) {
  EvalSpec spec;
  spec.stream.keys = 500;
  spec.stream.epochs = 1;
  spec.stream.tokens_per_epoch = 5000;
  spec.keep_estimates = true;
  const auto cfg = eval_config(8);
  const auto r = eval_run(cfg, spec);
  ASSERT_EQ(r.epochs, 1u);

  // Rebuild the one full-width sketch the three estimators should all read.
  CmSketch direct(cfg.sketch);
  generate_stream(spec.stream, [&](Epoch, std::string_view tok) { direct.insert(tok); });
  for (const auto& row : r.estimates) {
    EXPECT_DOUBLE_EQ(row.estimate, static_cast<double>(direct.query(row.key))) << row.key;
  }
  const auto& time = r.reports.at("time");
  const auto& item = r.reports.at("item");
  const auto& interp = r.reports.at("interpolation");
  EXPECT_DOUBLE_EQ(time.absolute, item.absolute);
  EXPECT_DOUBLE_EQ(interp.absolute, item.absolute);
  EXPECT_DOUBLE_EQ(time.relative, item.relative);
  EXPECT_DOUBLE_EQ(interp.relative, item.relative);
  EXPECT_GT(item.absolute, 0.0);  // narrow sketch, so collisions are real
}

TEST(Eval, RowShape) {
  EvalSpec spec;
  spec.stream.keys = 300;
  spec.stream.epochs = 20;
  spec.stream.tokens_per_epoch = 1000;
  spec.stream.drift = 0.02;
  const auto r = eval_run(eval_config(9), spec);
  EXPECT_EQ(r.age_bands, 6u);  // ages 0..19: 0, 1, 2-3, 4-7, 8-15, 16-19
  EXPECT_EQ(r.rows.size(), std::size_t{r.age_bands} * r.frequency_edges.size() * eval_estimators().size());
  std::uint64_t pairs = 0;
  for (const auto& row : r.rows) {
    if (row.estimator == "item") pairs += row.pairs;
  }
  EXPECT_EQ(pairs, r.probes);
  EXPECT_EQ(r.below_threshold.pairs + r.heavy.pairs, r.probes);

  std::ostringstream csv;
  write_eval_csv(csv, r);
  std::istringstream lines(csv.str());
  std::string header;
  std::getline(lines, header);
  EXPECT_EQ(header, "estimator,age_band,ages,frequency_band,frequencies,pairs,absolute,relative");
  std::size_t count = 0;
  for (std::string line; std::getline(lines, line);) ++count;
  EXPECT_EQ(count, r.rows.size());
}

TEST(Eval, ProbesAreSubsampled) {
  EvalSpec spec;
  spec.stream.keys = 1000;
  spec.stream.epochs = 8;
  spec.stream.tokens_per_epoch = 2000;
  spec.max_probes = 700;
  const auto a = eval_run(eval_config(9), spec);
  const auto b = eval_run(eval_config(9), spec);
  EXPECT_EQ(a.probes, 700u);
  EXPECT_EQ(a.reports.at("interpolation").absolute, b.reports.at("interpolation").absolute);
}

TEST(Eval, InterpolationWinsOnLowFrequencyKeys) {
  EvalSpec spec;
  spec.stream.keys = 2000;
  spec.stream.epochs = 64;
  spec.stream.tokens_per_epoch = 50000;
  spec.stream.exponent = 1.1;
  spec.stream.drift = 0.0;
  const auto r = eval_run(eval_config(12), spec);
  ASSERT_GT(r.below_threshold.pairs, 0u);
  EXPECT_LE(r.below_threshold.interpolation, r.below_threshold.item);
}

TEST(Eval, ReplayInput) {
  const auto path = std::filesystem::temp_directory_path() /
                    ("epochsketch_eval_" + std::to_string(::getpid()) + ".tsv");
  {
    std::ofstream out(path);
    for (int e = 1; e <= 6; ++e) {
      for (int i = 0; i < 30; ++i) out << e << '\t' << key_name(i % (3 + e)) << '\n';
    }
    out << "2\tlate\n";
  }
  EvalSpec spec;
  spec.input_path = path.string();
  const auto r = eval_run(eval_config(10), spec);
  EXPECT_EQ(r.epochs, 6u);
  EXPECT_EQ(r.ingest.delayed, 1u);
  EXPECT_EQ(r.ingest.inserted, 180u);
  std::filesystem::remove(path);
}

TEST(Eval, InvalidSpec) {
  EvalSpec spec;
  spec.stream.keys = 0;
  try {
    eval_run(eval_config(8), spec);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kGenerator);
  }
  spec.stream.keys = 10;
  spec.stream.exponent = -1;
  EXPECT_THROW(eval_run(eval_config(8), spec), Error);
}

TEST(Generators, StreamsAreReproducible) {
  StreamSpec spec;
  spec.keys = 100;
  spec.epochs = 5;
  spec.tokens_per_epoch = 200;
  spec.drift = 0.1;
  spec.volume_amplitude = 0.5;
  std::vector<std::pair<Epoch, std::string>> a, b;
  generate_stream(spec, [&](Epoch e, std::string_view t) { a.emplace_back(e, t); });
  generate_stream(spec, [&](Epoch e, std::string_view t) { b.emplace_back(e, t); });
  EXPECT_EQ(a, b);
  EXPECT_TRUE(std::is_sorted(a.begin(), a.end(), [](auto& x, auto& y) { return x.first < y.first; }));
}

TEST(Generators, ZipfFollowsItsLaw) {
  ZipfSampler z(50, 1.2);
  Rng rng(8);
  std::vector<double> hits(50, 0);
  constexpr int kDraws = 200000;
  for (int i = 0; i < kDraws; ++i) hits[z(rng)] += 1;
  double norm = 0;
  for (int r = 0; r < 50; ++r) norm += std::pow(r + 1, -1.2);
  for (int r : {0, 1, 5, 20}) {
    const double p = std::pow(r + 1, -1.2) / norm;
    EXPECT_NEAR(z.probability(r), p, 1e-12);
    EXPECT_NEAR(hits[r] / kDraws, p, 5 * std::sqrt(p / kDraws));
  }
}

TEST(Generators, FactorizingCountsFactorize) {
  FactorizingSpec spec;
  spec.keys = 12;
  spec.epochs = 9;
  ExactCounts o;
  for (const auto& c : generate_factorizing(spec)) o.record(c.key, c.epoch, c.count);
  const double n = static_cast<double>(o.total());
  for (const auto& k : o.keys()) {
    for (Epoch e = 1; e <= spec.epochs; ++e) {
      EXPECT_DOUBLE_EQ(double(o.exact(k, e)), double(o.key_total(k)) * double(o.epoch_total(e)) / n);
    }
  }
}

TEST(Generators, MarkovSuccessorsAreBounded) {
  MarkovSpec spec;
  spec.vocabulary = 40;
  spec.successors = 3;
  spec.tokens = 20000;
  const auto tokens = generate_markov(spec);
  ASSERT_EQ(tokens.size(), spec.tokens);
  std::map<std::string, std::set<std::string>> next;
  for (std::size_t i = 0; i + 1 < tokens.size(); ++i) next[tokens[i]].insert(tokens[i + 1]);
  for (const auto& [_, s] : next) EXPECT_LE(s.size(), 3u);
}

}  // namespace
}  // namespace epochsketch
