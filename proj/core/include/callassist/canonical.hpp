#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace callassist {

using Json = nlohmann::json;

/// Byte-stable serialization: keys sorted, no whitespace, integers bare,
/// floats with exactly six decimals.
std::string canonical_dump(const Json& value);

/// Parses one document; throws Error(parse) on malformed input.
Json parse_json(std::string_view text);

Json load_json_file(const std::filesystem::path& path);

/// Reads newline-delimited documents, skipping blank lines.
std::vector<Json> load_ndjson_file(const std::filesystem::path& path);

void write_text_file(const std::filesystem::path& path, std::string_view text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace callassist
