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

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace epochsketch {

using Bytes = std::vector<std::uint8_t>;

// Little-endian writer for the snapshot formats.
class ByteWriter {
 public:
  explicit ByteWriter(Bytes& out) : out_(out) {}

  void magic(std::string_view tag);
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f64(double v);
  void u64_array(std::span<const std::uint64_t> values);
  void string(std::string_view s);  // u32 length prefix
  void raw(std::span<const std::uint8_t> bytes);

 private:
  Bytes& out_;
};

// Bounds-checked reader; every short read throws ErrorCode::kTruncated.
class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> in) : in_(in) {}

  // Throws kBadMagic when the next four bytes differ from `tag`.
  void expect_magic(std::string_view tag, std::string_view what);
  // Throws kVersionMismatch unless the next u32 equals `version`.
  void expect_version(std::uint32_t version, std::string_view what);

  std::uint32_t u32();
  std::uint64_t u64();
  double f64();
  void u64_array(std::span<std::uint64_t> out);
  std::string string();

  std::size_t remaining() const { return in_.size() - pos_; }
  std::size_t position() const { return pos_; }
  bool at_end() const { return pos_ == in_.size(); }

 private:
  void need(std::size_t n) const;

  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

Bytes read_file(const std::string& path);
void write_file(const std::string& path, std::span<const std::uint8_t> bytes);

}  // namespace epochsketch
