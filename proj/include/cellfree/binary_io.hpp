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

#pragma once

#include <array>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>

#include "cellfree/common.hpp"

namespace cellfree::io {

/// Little-endian primitive writer, independent of host byte order.
class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  void magic(std::string_view tag);
  void u8(std::uint8_t v);
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f64(double v);
  void string(std::string_view s);
  void matrix(const Matrix& m);  // row-major payload, no dims

 private:
  std::ostream& out_;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  void expect_magic(std::string_view tag);
  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  double f64();
  std::string string();
  Matrix matrix(Eigen::Index rows, Eigen::Index cols);
  bool at_end();

 private:
  void read_bytes(char* dst, std::size_t n);
  std::istream& in_;
};

}  // namespace cellfree::io
