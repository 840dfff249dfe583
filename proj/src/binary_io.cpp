// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 The cellfree Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cellfree/binary_io.hpp"

#include <bit>

namespace cellfree::io {
namespace {

constexpr std::uint64_t kMaxStringBytes = std::uint64_t{1} << 24;

}  // namespace

void Writer::magic(std::string_view tag) { out_.write(tag.data(), static_cast<std::streamsize>(tag.size())); }

void Writer::u8(std::uint8_t v) { out_.put(static_cast<char>(v)); }

void Writer::u32(std::uint32_t v) {
  std::array<char, 4> b{};
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFFu);
  out_.write(b.data(), 4);
}

void Writer::u64(std::uint64_t v) {
  std::array<char, 8> b{};
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFFu);
  out_.write(b.data(), 8);
}

void Writer::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

void Writer::string(std::string_view s) {
  u64(s.size());
  out_.write(s.data(), static_cast<std::streamsize>(s.size()));
}

void Writer::matrix(const Matrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) f64(m(r, c));
  }
}

void Reader::read_bytes(char* dst, std::size_t n) {
  in_.read(dst, static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in_.gcount()) != n) throw DataError("unexpected end of binary file");
}

void Reader::expect_magic(std::string_view tag) {
  std::string got(tag.size(), '\0');
  read_bytes(got.data(), got.size());
  if (got != tag) throw DataError("bad file magic: expected '" + std::string(tag) + "'");
}

std::uint8_t Reader::u8() {
  char c = 0;
  read_bytes(&c, 1);
  return static_cast<std::uint8_t>(c);
}

std::uint32_t Reader::u32() {
  std::array<char, 4> b{};
  read_bytes(b.data(), 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(b[i])) << (8 * i);
  return v;
}

std::uint64_t Reader::u64() {
  std::array<char, 8> b{};
  read_bytes(b.data(), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(b[i])) << (8 * i);
  return v;
}

double Reader::f64() { return std::bit_cast<double>(u64()); }

std::string Reader::string() {
  const std::uint64_t n = u64();
  if (n > kMaxStringBytes) throw DataError("string field too large");
  std::string s(n, '\0');
  read_bytes(s.data(), n);
  return s;
}

Matrix Reader::matrix(Eigen::Index rows, Eigen::Index cols) {
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = f64();
  }
  return m;
}

bool Reader::at_end() { return in_.peek() == std::char_traits<char>::eof(); }

}  // namespace cellfree::io
