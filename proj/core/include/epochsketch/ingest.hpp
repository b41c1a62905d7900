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
#include <string>
#include <vector>

#include "epochsketch/engine.hpp"
#include "epochsketch/oracle.hpp"

namespace epochsketch {

/// kReplay lines are `epoch<TAB>token`; kTokens lines are a bare token
/// inserted into the open epoch.
enum class IngestFormat { kReplay, kTokens };

IngestFormat parse_ingest_format(std::string_view name);

struct IngestSummary {
  std::uint64_t lines = 0;
  std::uint64_t inserted = 0;  // into the open epoch
  std::uint64_t delayed = 0;
  std::uint64_t dropped = 0;
  std::uint64_t malformed = 0;
  std::uint64_t ticks = 0;
  std::vector<std::string> errors;  // first few malformed lines, with line numbers

  std::string to_text() const;
};

/// Replay: a record for a later epoch closes epochs until it is open; an
/// earlier epoch goes through the delayed path. At end of input the open
/// epoch is closed if this input put any record into it. Every accepted
/// record is also counted in `oracle` when given.
IngestSummary ingest_stream(Engine& engine, std::istream& in, IngestFormat format,
                            ExactCounts* oracle = nullptr);
IngestSummary ingest_file(Engine& engine, const std::string& path, IngestFormat format,
                          ExactCounts* oracle = nullptr);

}  // namespace epochsketch
