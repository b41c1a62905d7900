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

#include "epochsketch/byte_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "epochsketch/error.hpp"

namespace epochsketch {

void ByteWriter::magic(std::string_view tag) {
  out_.insert(out_.end(), tag.begin(), tag.end());
}

void ByteWriter::u32(std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void ByteWriter::u64(std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void ByteWriter::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

void ByteWriter::u64_array(std::span<const std::uint64_t> values) {
  const std::size_t start = out_.size();
  out_.resize(start + values.size() * 8);
  if constexpr (std::endian::native == std::endian::little) {
    if (!values.empty()) std::memcpy(out_.data() + start, values.data(), values.size() * 8);
  } else {
    std::uint8_t* p = out_.data() + start;
    for (std::uint64_t v : values) {
      for (int i = 0; i < 8; ++i) *p++ = static_cast<std::uint8_t>(v >> (8 * i));
    }
  }
}

void ByteWriter::string(std::string_view s) {
  u32(static_cast<std::uint32_t>(s.size()));
  out_.insert(out_.end(), s.begin(), s.end());
}

void ByteWriter::raw(std::span<const std::uint8_t> bytes) {
  out_.insert(out_.end(), bytes.begin(), bytes.end());
}

void ByteReader::need(std::size_t n) const {
  if (remaining() < n) {
    throw Error(ErrorCode::kTruncated, "snapshot truncated at byte " + std::to_string(pos_) +
                                           " (need " + std::to_string(n) + ", have " +
                                           std::to_string(remaining()) + ")");
  }
}

void ByteReader::expect_magic(std::string_view tag, std::string_view what) {
  need(tag.size());
  if (std::memcmp(in_.data() + pos_, tag.data(), tag.size()) != 0) {
    throw Error(ErrorCode::kBadMagic, "bad magic for " + std::string(what) + ", expected \"" +
                                          std::string(tag) + "\"");
  }
  pos_ += tag.size();
}

void ByteReader::expect_version(std::uint32_t version, std::string_view what) {
  const std::uint32_t got = u32();
  if (got != version) {
    throw Error(ErrorCode::kVersionMismatch, std::string(what) + " format version " +
                                                 std::to_string(got) + ", expected " +
                                                 std::to_string(version));
  }
}

std::uint32_t ByteReader::u32() {
  need(4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t{in_[pos_ + i]} << (8 * i);
  pos_ += 4;
  return v;
}

std::uint64_t ByteReader::u64() {
  need(8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t{in_[pos_ + i]} << (8 * i);
  pos_ += 8;
  return v;
}

double ByteReader::f64() { return std::bit_cast<double>(u64()); }

void ByteReader::u64_array(std::span<std::uint64_t> out) {
  if (out.size() > remaining() / 8) need(out.size() * 8);
  const std::uint8_t* p = in_.data() + pos_;
  if constexpr (std::endian::native == std::endian::little) {
    if (!out.empty()) std::memcpy(out.data(), p, out.size() * 8);
  } else {
    for (auto& v : out) {
      v = 0;
      for (int i = 0; i < 8; ++i) v |= std::uint64_t{*p++} << (8 * i);
    }
  }
  pos_ += out.size() * 8;
}

std::string ByteReader::string() {
  const std::uint32_t n = u32();
  need(n);
  std::string s(reinterpret_cast<const char*>(in_.data() + pos_), n);
  pos_ += n;
  return s;
}

Bytes read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "short write to " + path);
}

}  // namespace epochsketch
