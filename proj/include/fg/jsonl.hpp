// Copyright 2026 The finegrain Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef FG_JSONL_HPP_
#define FG_JSONL_HPP_

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace fg {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

struct JsonlRecord {
  std::size_t line = 0;
  Json value;
};

// Blank lines are skipped. Throws IoError if the file cannot be read and
// SchemaError (with file:line) for malformed JSON or a schema_version other
// than kSchemaVersion.
std::vector<JsonlRecord> read_jsonl(const std::filesystem::path& path);

std::string read_text(const std::filesystem::path& path);

// Writes atomically enough for our purposes: truncate then write.
void write_text(const std::filesystem::path& path, std::string_view text);

// Throws SchemaError naming `where` when the field is missing or mistyped.
std::string require_string(const Json& j, std::string_view key, std::string_view where);
double require_number(const Json& j, std::string_view key, std::string_view where);

// Deterministic serialisation used for every file we emit.
std::string dump_line(const Json& j);

}  // namespace fg

#endif  // FG_JSONL_HPP_
