#include "callassist/canonical.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "callassist/errors.hpp"

namespace callassist {

namespace {

void dump_into(const Json& value, std::string& out) {
  switch (value.type()) {
    case Json::value_t::null:
      out += "null";
      return;
    case Json::value_t::boolean:
      out += value.get<bool>() ? "true" : "false";
      return;
    case Json::value_t::number_integer:
      out += std::to_string(value.get<std::int64_t>());
      return;
    case Json::value_t::number_unsigned:
      out += std::to_string(value.get<std::uint64_t>());
      return;
    case Json::value_t::number_float: {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.6f", value.get<double>());
      std::string text(buf);
      if (text == "-0.000000") text = "0.000000";
      out += text;
      return;
    }
    case Json::value_t::string:
      out += value.dump();
      return;
    case Json::value_t::array: {
      out += '[';
      bool first = true;
      for (const auto& item : value) {
        if (!first) out += ',';
        first = false;
        dump_into(item, out);
      }
      out += ']';
      return;
    }
    case Json::value_t::object: {
      // nlohmann::json keeps object keys in a std::map, so iteration is sorted.
      out += '{';
      bool first = true;
      for (auto it = value.begin(); it != value.end(); ++it) {
        if (!first) out += ',';
        first = false;
        out += Json(it.key()).dump();
        out += ':';
        dump_into(it.value(), out);
      }
      out += '}';
      return;
    }
    case Json::value_t::binary:
    case Json::value_t::discarded:
      break;
  }
  throw Error(ErrorCode::invariant, "value cannot be serialized canonically");
}

}  // namespace

std::string canonical_dump(const Json& value) {
  std::string out;
  dump_into(value, out);
  return out;
}

Json parse_json(std::string_view text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::parse, std::string("malformed document: ") + e.what());
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

Json load_json_file(const std::filesystem::path& path) {
  try {
    return parse_json(read_text_file(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::parse) {
      throw Error(ErrorCode::parse, path.string() + ": " + e.what());
    }
    throw;
  }
}

std::vector<Json> load_ndjson_file(const std::filesystem::path& path) {
  std::istringstream in(read_text_file(path));
  std::vector<Json> docs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      docs.push_back(parse_json(line));
    } catch (const Error& e) {
      throw Error(ErrorCode::parse,
                  path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return docs;
}

}  // namespace callassist
