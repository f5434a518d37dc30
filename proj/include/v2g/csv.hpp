/*
 * Copyright 2026 The v2gsim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <istream>
#include <string>
#include <vector>

#include "v2g/domain.hpp"

namespace v2g {

/// Minimal reader for the unquoted comma-separated files this project emits.
class CsvReader {
 public:
  /// Reads the header and checks it names exactly `columns`, in order.
  CsvReader(std::istream& in, std::vector<std::string> columns) : in_(in), columns_(std::move(columns)) {
    std::string header;
    if (!std::getline(in_, header)) throw ConfigError("empty file: missing header");
    ++line_;
    strip_cr(header);
    const auto got = split(header);
    for (std::size_t i = 0; i < columns_.size(); ++i) {
      if (i >= got.size() || got[i] != columns_[i]) {
        throw ConfigError("missing column '" + columns_[i] + "' in header");
      }
    }
    if (got.size() != columns_.size()) throw ConfigError("unexpected extra columns in header");
  }

  /// Returns false at end of input; blank lines are skipped.
  bool next(std::vector<std::string>& row) {
    std::string text;
    while (std::getline(in_, text)) {
      ++line_;
      strip_cr(text);
      if (text.empty()) continue;
      row = split(text);
      if (row.size() != columns_.size()) {
        throw ConfigError("row " + std::to_string(line_) + ": expected " + std::to_string(columns_.size()) +
                          " fields, got " + std::to_string(row.size()));
      }
      return true;
    }
    return false;
  }

  /// 1-based line number of the row last returned (header is line 1).
  [[nodiscard]] std::size_t line() const { return line_; }

  static std::vector<std::string> split(const std::string& text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
      const auto comma = text.find(',', start);
      out.push_back(text.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    return out;
  }

 private:
  static void strip_cr(std::string& s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
  }

  std::istream& in_;
  std::vector<std::string> columns_;
  std::size_t line_ = 0;
};

}  // namespace v2g
