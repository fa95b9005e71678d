// Copyright 2026 The AEAKA Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "aeaka/snapshot.hpp"

#include <fstream>
#include <sstream>

#include "aeaka/error.hpp"

namespace aeaka::snapshot {

std::string write_records(const std::vector<Record>& records) {
  std::string out;
  for (const auto& r : records) {
    out += r.dump();
    out += '\n';
  }
  return out;
}

std::vector<Record> read_records(std::string_view text) {
  std::vector<Record> out;
  std::size_t start = 0;
  std::size_t line_no = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    Record rec = Record::parse(line, nullptr, false);
    if (rec.is_discarded() || !rec.is_object() || !rec.contains("record") ||
        !rec["record"].is_string()) {
      throw ProtocolError(ErrorCode::kInvalidSnapshot,
                          "bad record on line " + std::to_string(line_no));
    }
    out.push_back(std::move(rec));
  }
  return out;
}

namespace {

const Record& member(const Record& rec, const char* key) {
  auto it = rec.find(key);
  if (it == rec.end()) {
    throw ProtocolError(ErrorCode::kInvalidSnapshot, std::string("missing field ") + key);
  }
  return *it;
}

Digest parse_digest(const Record& v, const char* key) {
  if (!v.is_string()) {
    throw ProtocolError(ErrorCode::kInvalidSnapshot, std::string("field is not hex: ") + key);
  }
  try {
    return Digest::from_hex(v.get<std::string>());
  } catch (const std::invalid_argument&) {
    throw ProtocolError(ErrorCode::kInvalidSnapshot, std::string("bad digest in ") + key);
  }
}

}  // namespace

Digest get_digest(const Record& rec, const char* key) {
  return parse_digest(member(rec, key), key);
}

std::vector<Digest> get_digests(const Record& rec, const char* key) {
  const Record& v = member(rec, key);
  if (!v.is_array()) {
    throw ProtocolError(ErrorCode::kInvalidSnapshot, std::string("field is not a list: ") + key);
  }
  std::vector<Digest> out;
  out.reserve(v.size());
  for (const auto& item : v) out.push_back(parse_digest(item, key));
  return out;
}

std::string get_string(const Record& rec, const char* key) {
  const Record& v = member(rec, key);
  if (!v.is_string()) {
    throw ProtocolError(ErrorCode::kInvalidSnapshot, std::string("field is not a string: ") + key);
  }
  return v.get<std::string>();
}

std::uint64_t get_u64(const Record& rec, const char* key) {
  const Record& v = member(rec, key);
  if (!v.is_number_unsigned()) {
    throw ProtocolError(ErrorCode::kInvalidSnapshot, std::string("field is not a count: ") + key);
  }
  return v.get<std::uint64_t>();
}

Record::array_t hex_list(const std::vector<Digest>& digests) {
  Record::array_t out;
  out.reserve(digests.size());
  for (const auto& d : digests) out.emplace_back(d.hex());
  return out;
}

void atomic_write(const std::filesystem::path& path, std::string_view contents) {
  std::error_code ec;
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw ProtocolError(ErrorCode::kIoError, "cannot create " + path.parent_path().string());
  }
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) throw ProtocolError(ErrorCode::kIoError, "cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw ProtocolError(ErrorCode::kIoError, "cannot replace " + path.string());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ProtocolError(ErrorCode::kIoError, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace aeaka::snapshot
