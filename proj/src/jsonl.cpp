// Copyright 2026 The finegrain Authors
// SPDX-License-Identifier: Apache-2.0

#include "fg/jsonl.hpp"

#include <fstream>
#include <sstream>

#include "fg/error.hpp"
#include "fg/text.hpp"

namespace fg {

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + path.string());
}

std::vector<JsonlRecord> read_jsonl(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  std::vector<JsonlRecord> records;
  std::size_t line_no = 0;
  for (auto line : split_lines(text)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::string where = path.filename().string() + ":" + std::to_string(line_no);
    Json value;
    try {
      value = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw Error(ErrorCode::kSchemaError, where + ": malformed JSON (" + e.what() + ")");
    }
    if (!value.is_object()) {
      throw Error(ErrorCode::kSchemaError, where + ": expected a JSON object");
    }
    const auto v = value.find("schema_version");
    if (v == value.end() || !v->is_number_integer() || v->get<int>() != kSchemaVersion) {
      throw Error(ErrorCode::kSchemaError,
                  where + ": schema_version must be " + std::to_string(kSchemaVersion));
    }
    records.push_back({line_no, std::move(value)});
  }
  return records;
}

std::string require_string(const Json& j, std::string_view key, std::string_view where) {
  const auto it = j.find(std::string(key));
  if (it == j.end() || !it->is_string()) {
    throw Error(ErrorCode::kSchemaError,
                std::string(where) + ": field '" + std::string(key) + "' must be a string");
  }
  return it->get<std::string>();
}

double require_number(const Json& j, std::string_view key, std::string_view where) {
  const auto it = j.find(std::string(key));
  if (it == j.end() || !it->is_number()) {
    throw Error(ErrorCode::kSchemaError,
                std::string(where) + ": field '" + std::string(key) + "' must be a number");
  }
  return it->get<double>();
}

std::string dump_line(const Json& j) {
  return j.dump(-1, ' ', false, Json::error_handler_t::strict);
}

}  // namespace fg
