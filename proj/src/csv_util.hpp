#pragma once

// Minimal comma-separated reader shared by the file-format loaders. Fields
// are plain numbers or identifiers; quoting is not supported.

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "poleloc/error.hpp"

namespace poleloc {

class CsvRow {
 public:
  CsvRow(std::vector<std::string> fields, std::string where)
      : fields_(std::move(fields)), where_(std::move(where)) {}

  std::size_t size() const { return fields_.size(); }
  const std::string& str(std::size_t i) const { return fields_.at(i); }

  double as_double(std::size_t i) const {
    const std::string& f = fields_.at(i);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
    if (ec != std::errc() || ptr != f.data() + f.size()) {
      throw ConfigError(where_ + ": not a number: '" + f + "'");
    }
    return v;
  }

  std::int64_t as_int(std::size_t i) const {
    const std::string& f = fields_.at(i);
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
    if (ec != std::errc() || ptr != f.data() + f.size()) {
      throw ConfigError(where_ + ": not an integer: '" + f + "'");
    }
    return v;
  }

 private:
  std::vector<std::string> fields_;
  std::string where_;
};

class CsvReader {
 public:
  CsvReader(const std::filesystem::path& path, const std::vector<std::string>& header)
      : in_(path), name_(path.string()) {
    if (!in_) {
      throw IoError("cannot open " + name_);
    }
    std::string line;
    if (!next_line(line)) {
      throw ConfigError(name_ + ": missing header");
    }
    if (split(line) != header) {
      std::string expected;
      for (std::size_t i = 0; i < header.size(); ++i) {
        expected += (i ? "," : "") + header[i];
      }
      throw ConfigError(name_ + ": expected header '" + expected + "'");
    }
    width_ = header.size();
  }

  std::optional<CsvRow> next() {
    std::string line;
    while (next_line(line)) {
      if (line.empty()) {
        continue;
      }
      auto fields = split(line);
      std::string where = name_ + ":" + std::to_string(line_no_);
      if (fields.size() != width_) {
        throw ConfigError(where + ": expected " + std::to_string(width_) + " fields");
      }
      return CsvRow(std::move(fields), std::move(where));
    }
    return std::nullopt;
  }

 private:
  bool next_line(std::string& line) {
    if (!std::getline(in_, line)) {
      return false;
    }
    ++line_no_;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    return true;
  }

  static std::vector<std::string> split(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      std::string_view f = line.substr(start, comma == std::string_view::npos
                                                  ? std::string_view::npos
                                                  : comma - start);
      while (!f.empty() && f.front() == ' ') f.remove_prefix(1);
      while (!f.empty() && f.back() == ' ') f.remove_suffix(1);
      out.emplace_back(f);
      if (comma == std::string_view::npos) {
        break;
      }
      start = comma + 1;
    }
    return out;
  }

  std::ifstream in_;
  std::string name_;
  std::size_t width_ = 0;
  std::size_t line_no_ = 0;
};

}  // namespace poleloc
