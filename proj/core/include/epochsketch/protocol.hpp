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

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "epochsketch/engine.hpp"

namespace epochsketch {

enum class CommandKind { kInsert, kDelayedInsert, kTick, kQuery, kQueryRange, kQueryNgram, kStats };

/// One protocol line:
///   I <token>                  insert into the open epoch, no reply
///   ID <epoch> <token>         insert into a given epoch, no reply
///   TICK                       close the open epoch (replay mode), no reply
///   Q <token> <epoch>          -> "<count> <method>"
///   QR <token> <from> <to>     -> "<count>"
///   QN <tok1> <tok2> ...       -> "<estimate>"
///   STATS                      -> "t=<t> mass=<n>"
struct Command {
  CommandKind kind = CommandKind::kStats;
  std::vector<std::string> tokens;
  Epoch epoch = 0;  // ID, Q, and QR's start
  Epoch to = 0;     // QR's end

  bool mutates() const {
    return kind == CommandKind::kInsert || kind == CommandKind::kDelayedInsert || kind == CommandKind::kTick;
  }
};

/// Throws kInvalidArgument with a short reason for malformed lines.
Command parse_command(std::string_view line);

/// Runs a command. Returns the reply line (without newline), or nothing for
/// mutations. Throws on engine errors such as out-of-range epochs.
std::optional<std::string> execute(Engine& engine, const Command& command, bool live = false);
/// The read-only subset of execute(); `command` must not mutate.
std::string answer(const Engine& engine, const Command& command);

/// Checks an ID command's epoch against the engine without applying it.
void check_delayed(const Engine& engine, const Command& command);

/// Formats counts as integers when exact, otherwise shortest round-trip.
std::string format_count(double v);

/// Synchronous protocol state machine over one engine: every line yields
/// nothing (accepted mutation), one reply, or one "ERR <reason>".
class Session {
 public:
  explicit Session(Engine& engine, bool live = false) : engine_(engine), live_(live) {}

  std::optional<std::string> handle(std::string_view line);

 private:
  Engine& engine_;
  bool live_;
};

std::string error_reply(std::string_view reason);

}  // namespace epochsketch
