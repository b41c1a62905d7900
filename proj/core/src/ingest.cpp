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

#include "epochsketch/ingest.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>

#include "epochsketch/error.hpp"

namespace epochsketch {

namespace {

constexpr std::size_t kMaxReportedErrors = 10;

void malformed(IngestSummary& s, std::string reason) {
  ++s.malformed;
  if (s.errors.size() < kMaxReportedErrors) s.errors.push_back("line " + std::to_string(s.lines) + ": " + reason);
}

}  // namespace

IngestFormat parse_ingest_format(std::string_view name) {
  if (name == "replay") return IngestFormat::kReplay;
  if (name == "tokens") return IngestFormat::kTokens;
  throw Error(ErrorCode::kConfig, "unknown ingest format '" + std::string(name) + "' (expected replay or tokens)");
}

std::string IngestSummary::to_text() const {
  std::ostringstream out;
  out << "lines=" << lines << " inserted=" << inserted << " delayed=" << delayed << " dropped=" << dropped
      << " malformed=" << malformed << " ticks=" << ticks;
  return out.str();
}

IngestSummary ingest_stream(Engine& engine, std::istream& in, IngestFormat format, ExactCounts* oracle) {
  IngestSummary s;
  bool open_touched = false;
  std::string line;
  while (std::getline(in, line)) {
    ++s.lines;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      malformed(s, "empty line");
      continue;
    }
    if (format == IngestFormat::kTokens) {
      engine.insert(line);
      if (oracle != nullptr) oracle->record(line, engine.open_epoch());
      ++s.inserted;
      open_touched = true;
      continue;
    }

    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      malformed(s, "expected epoch<TAB>token");
      continue;
    }
    Epoch epoch = 0;
    const char* first = line.data();
    const char* last = line.data() + tab;
    auto [end, ec] = std::from_chars(first, last, epoch);
    if (ec != std::errc{} || end != last || epoch == 0) {
      malformed(s, "epoch must be a positive integer");
      continue;
    }
    const std::string_view token = std::string_view(line).substr(tab + 1);
    if (token.empty()) {
      malformed(s, "empty token");
      continue;
    }
    while (engine.open_epoch() < epoch) {
      engine.tick();
      ++s.ticks;
      open_touched = false;
    }
    switch (engine.insert_at(token, epoch)) {
      case Routing::kOpen:
        ++s.inserted;
        open_touched = true;
        break;
      case Routing::kDelayed:
        ++s.delayed;
        break;
      case Routing::kDropped:
        ++s.dropped;
        continue;
    }
    if (oracle != nullptr) oracle->record(token, epoch);
  }
  if (open_touched) {
    engine.tick();
    ++s.ticks;
  }
  return s;
}

IngestSummary ingest_file(Engine& engine, const std::string& path, IngestFormat format, ExactCounts* oracle) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path + "'");
  return ingest_stream(engine, in, format, oracle);
}

}  // namespace epochsketch
