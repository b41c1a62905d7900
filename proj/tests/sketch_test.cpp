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
#include <map>
#include <set>

#include "support.hpp"

namespace epochsketch {
namespace {

using support::build;
using support::Records;
using support::small_config;

TEST(Hash, RowHashesDependOnSeedAndRow) {
  HashFamily a(1, 4);
  HashFamily b(2, 4);
  std::set<std::uint64_t> seen;
  for (std::uint32_t i = 0; i < 4; ++i) {
    seen.insert(a.row(i, "key"));
    seen.insert(b.row(i, "key"));
  }
  EXPECT_EQ(seen.size(), 8u);
  EXPECT_EQ(a.row(2, "key"), HashFamily(1, 4).row(2, "key"));
}

TEST(Hash, CollisionRateNearUniform) {
  constexpr std::uint32_t kBits = 8;
  HashFamily h(99, 2);
  constexpr int kPairs = 200000;
  int collisions = 0;
  for (int i = 0; i < kPairs; ++i) {
    const auto x = "x" + std::to_string(i);
    const auto y = "y" + std::to_string(i);
    if (low_bits(h.row(0, x), kBits) == low_bits(h.row(0, y), kBits)) ++collisions;
  }
  const double expected = kPairs / double(1u << kBits);
  EXPECT_GT(collisions, expected / 2);
  EXPECT_LT(collisions, expected * 2);
}

TEST(Hash, ColumnsSpreadEvenly) {
  HashFamily h(5, 1);
  std::vector<int> buckets(64, 0);
  for (int i = 0; i < 64000; ++i) ++buckets[low_bits(h.row(0, std::to_string(i)), 6)];
  for (int b : buckets) {
    EXPECT_GT(b, 700);
    EXPECT_LT(b, 1300);
  }
}

TEST(Sketch, ValidatesConfig) {
  EXPECT_THROW(CmSketch(SketchConfig{0, 8, 1}), Error);
  EXPECT_THROW(CmSketch(SketchConfig{2, 0, 1}), Error);
  EXPECT_THROW(CmSketch(SketchConfig{2, 63, 1}), Error);
  try {
    SketchConfig{0, 8, 1}.validate();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfig);
  }
}

TEST(Sketch, NeverUnderestimates) {
  Rng rng(3);
  const auto records = support::zipf_records(rng, 20000, 3000, 1.1);
  const auto s = build(small_config(9, 4), records);
  std::map<std::string, std::uint64_t> exact;
  for (const auto& [k, c] : records) exact[k] += c;
  for (const auto& [k, c] : exact) EXPECT_GE(s.query(k), c) << k;
  EXPECT_EQ(s.total_mass(), records.size());
}

TEST(Sketch, ExactWithoutCollisions) {
  CmSketch s(small_config(16, 4));
  s.insert("a", 3);
  s.insert("b");
  s.insert("a");
  EXPECT_EQ(s.query("a"), 4u);
  EXPECT_EQ(s.query("b"), 1u);
  EXPECT_EQ(s.query("c"), 0u);
}

TEST(Sketch, MergeEqualsWholeStream) {
  Rng rng(11);
  const auto records = support::zipf_records(rng, 5000, 500, 1.0);
  const auto cfg = small_config(7, 3);
  Records left, right;
  for (const auto& r : records) (uniform_below(rng, 2) ? left : right).push_back(r);
  EXPECT_EQ(merge(build(cfg, left), build(cfg, right)), build(cfg, records));
}

TEST(Sketch, MergeRejectsMismatchedConfig) {
  CmSketch a(small_config(8, 3, 1));
  for (const auto& other : {small_config(8, 2, 1), small_config(7, 3, 1), small_config(8, 3, 2)}) {
    try {
      a += CmSketch(other);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kIncompatible);
    }
  }
}

TEST(Sketch, FoldEqualsHalfWidthSketch) {
  Rng rng(4);
  const auto records = support::zipf_records(rng, 4000, 800, 1.0);
  for (std::uint32_t b = 2; b <= 10; ++b) {
    const auto wide = build(small_config(b, 3), records);
    EXPECT_EQ(wide.folded(), build(small_config(b - 1, 3), records)) << "b=" << b;
  }
}

TEST(Sketch, FoldAddsUpperHalf) {
  CmSketch s(small_config(2, 1));
  s.insert("x", 5);
  const auto before = std::vector<std::uint64_t>(s.counters().begin(), s.counters().end());
  s.fold();
  ASSERT_EQ(s.width(), 2u);
  EXPECT_EQ(s.cell(0, 0), before[0] + before[2]);
  EXPECT_EQ(s.cell(0, 1), before[1] + before[3]);
  EXPECT_EQ(s.total_mass(), 5u);
}

TEST(Sketch, CannotFoldBelowTwoColumns) {
  CmSketch s(small_config(1, 1));
  try {
    s.fold();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kCannotFold);
  }
}

TEST(Sketch, CellAtWidthMatchesMaterializedFold) {
  Rng rng(8);
  const auto records = support::zipf_records(rng, 3000, 400, 1.0);
  const auto s = build(small_config(10, 3), records);
  for (std::uint32_t target = 1; target <= 10; ++target) {
    const auto folded = support::fold_times(s, 10 - target);
    for (int k = 0; k < 50; ++k) {
      const auto d = s.digest(key_name(k));
      for (std::uint32_t i = 0; i < 3; ++i) {
        EXPECT_EQ(s.cell_at_width(i, d, target), folded.cell(i, d));
      }
    }
  }
  EXPECT_THROW(s.cell_at_width(0, s.digest("a"), 11), Error);
  EXPECT_THROW(s.cell_at_width(0, s.digest("a"), 0), Error);
}

TEST(Sketch, SerializeRoundTrip) {
  Rng rng(2);
  const auto s = build(small_config(6, 2), support::zipf_records(rng, 1000, 100, 1.0));
  const Bytes bytes = s.serialize();
  const auto back = CmSketch::deserialize(bytes);
  EXPECT_EQ(back, s);
  EXPECT_EQ(back.serialize(), bytes);
}

TEST(Sketch, DeserializeRejectsDamage) {
  CmSketch s(small_config(4, 2));
  s.insert("a", 7);
  Bytes bytes = s.serialize();

  Bytes bad_magic = bytes;
  bad_magic[0] ^= 0xff;
  try {
    CmSketch::deserialize(bad_magic);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBadMagic);
  }

  Bytes truncated(bytes.begin(), bytes.end() - 3);
  try {
    CmSketch::deserialize(truncated);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTruncated);
  }

  Bytes flipped = bytes;
  flipped[bytes.size() - 1] ^= 0x01;
  EXPECT_THROW(CmSketch::deserialize(flipped), Error);
}

TEST(Sketch, FromCountersChecksRowSums) {
  const SketchConfig cfg = small_config(1, 2);
  EXPECT_NO_THROW(CmSketch::from_counters(cfg, {1, 2, 3, 0}, 3));
  EXPECT_THROW(CmSketch::from_counters(cfg, {1, 2, 3, 1}, 3), Error);
  EXPECT_THROW(CmSketch::from_counters(cfg, {1, 2, 3}, 3), Error);
}

TEST(Sketch, StandardSizing) {
  const auto c = standard_sizing(0.005, 0.01, 1);
  EXPECT_EQ(c.log_width, 10u);  // ceil(e / 0.005) = 544 -> 1024
  EXPECT_EQ(c.depth, 5u);       // ceil(ln 100)
  const auto lit = literal_sizing(0.005, 0.01, 1);
  EXPECT_LT(lit.log_width, c.log_width);
}

}  // namespace
}  // namespace epochsketch
