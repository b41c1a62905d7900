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

#include "epochsketch/protocol.hpp"

#include <charconv>

#include "epochsketch/error.hpp"
#include "epochsketch/oracle.hpp"

namespace epochsketch {

namespace {

std::vector<std::string_view> split_words(std::string_view line) {
  std::vector<std::string_view> words;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) words.push_back(line.substr(start, i - start));
  }
  return words;
}

[[noreturn]] void malformed(const std::string& reason) { throw Error(ErrorCode::kInvalidArgument, reason); }

Epoch parse_epoch(std::string_view word) {
  Epoch e = 0;
  auto [end, ec] = std::from_chars(word.data(), word.data() + word.size(), e);
  if (ec != std::errc{} || end != word.data() + word.size()) {
    malformed("bad epoch '" + std::string(word) + "'");
  }
  return e;
}

void expect_words(const std::vector<std::string_view>& w, std::size_t n, const char* usage) {
  if (w.size() != n) malformed(std::string("usage: ") + usage);
}

}  // namespace

Command parse_command(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  const auto w = split_words(line);
  if (w.empty()) malformed("empty command");
  Command c;
  const std::string_view verb = w[0];
  if (verb == "I") {
    expect_words(w, 2, "I <token>");
    c.kind = CommandKind::kInsert;
    c.tokens.emplace_back(w[1]);
  } else if (verb == "ID") {
    expect_words(w, 3, "ID <epoch> <token>");
    c.kind = CommandKind::kDelayedInsert;
    c.epoch = parse_epoch(w[1]);
    c.tokens.emplace_back(w[2]);
  } else if (verb == "TICK") {
    expect_words(w, 1, "TICK");
    c.kind = CommandKind::kTick;
  } else if (verb == "Q") {
    expect_words(w, 3, "Q <token> <epoch>");
    c.kind = CommandKind::kQuery;
    c.tokens.emplace_back(w[1]);
    c.epoch = parse_epoch(w[2]);
  } else if (verb == "QR") {
    expect_words(w, 4, "QR <token> <from> <to>");
    c.kind = CommandKind::kQueryRange;
    c.tokens.emplace_back(w[1]);
    c.epoch = parse_epoch(w[2]);
    c.to = parse_epoch(w[3]);
  } else if (verb == "QN") {
    if (w.size() < 2) malformed("usage: QN <tok1> <tok2> ...");
    c.kind = CommandKind::kQueryNgram;
    for (std::size_t i = 1; i < w.size(); ++i) c.tokens.emplace_back(w[i]);
  } else if (verb == "STATS") {
    expect_words(w, 1, "STATS");
    c.kind = CommandKind::kStats;
  } else {
    malformed("unknown command '" + std::string(verb) + "'");
  }
  return c;
}

std::string format_count(double v) { return format_number(v); }

void check_delayed(const Engine& engine, const Command& command) {
  if (command.epoch == 0 || command.epoch > engine.open_epoch()) {
    throw Error(ErrorCode::kRange, "epoch " + std::to_string(command.epoch) + " outside [1, " +
                                       std::to_string(engine.open_epoch()) + "]");
  }
}

std::string answer(const Engine& engine, const Command& command) {
  switch (command.kind) {
    case CommandKind::kQuery: {
      const EstimateReport r = engine.estimate(command.tokens[0], command.epoch);
      return format_count(r.value) + " " + std::string(to_string(r.method));
    }
    case CommandKind::kQueryRange:
      return format_count(engine.estimate_range(command.tokens[0], command.epoch, command.to));
    case CommandKind::kQueryNgram: {
      std::vector<std::string_view> views(command.tokens.begin(), command.tokens.end());
      return format_count(engine.ngram_estimate(views));
    }
    case CommandKind::kStats:
      return "t=" + std::to_string(engine.epoch()) + " mass=" + std::to_string(engine.total_mass());
    default:
      throw Error(ErrorCode::kInvalidArgument, "not a query");
  }
}

std::optional<std::string> execute(Engine& engine, const Command& command, bool live) {
  switch (command.kind) {
    case CommandKind::kInsert:
      engine.insert(command.tokens[0]);
      return std::nullopt;
    case CommandKind::kDelayedInsert:
      check_delayed(engine, command);
      engine.insert_at(command.tokens[0], command.epoch);
      return std::nullopt;
    case CommandKind::kTick:
      if (live) throw Error(ErrorCode::kInvalidArgument, "TICK is not accepted in live mode");
      engine.tick();
      return std::nullopt;
    default:
      return answer(engine, command);
  }
}

std::string error_reply(std::string_view reason) {
  std::string out = "ERR ";
  for (char c : reason) out += (c == '\n' || c == '\r') ? ' ' : c;
  return out;
}

std::optional<std::string> Session::handle(std::string_view line) {
  try {
    return execute(engine_, parse_command(line), live_);
  } catch (const std::exception& e) {
    return error_reply(e.what());
  }
}

}  // namespace epochsketch
