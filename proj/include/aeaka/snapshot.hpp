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

// Line-delimited snapshot records: one JSON object per line, every digest
// hex-encoded, every record tagged by "record". See docs/snapshot-format.md.

#ifndef AEAKA_SNAPSHOT_HPP_
#define AEAKA_SNAPSHOT_HPP_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "aeaka/crypto.hpp"

namespace aeaka::snapshot {

using Record = nlohmann::ordered_json;

std::string write_records(const std::vector<Record>& records);

// Throws ProtocolError(kInvalidSnapshot) on unparsable lines or lines
// without a "record" tag.
std::vector<Record> read_records(std::string_view text);

Digest get_digest(const Record& rec, const char* key);
std::vector<Digest> get_digests(const Record& rec, const char* key);
std::string get_string(const Record& rec, const char* key);
std::uint64_t get_u64(const Record& rec, const char* key);

Record::array_t hex_list(const std::vector<Digest>& digests);

// Writes through a sibling temp file and a rename, so readers see either the
// old or the new contents. Throws ProtocolError(kIoError).
void atomic_write(const std::filesystem::path& path, std::string_view contents);
std::string read_file(const std::filesystem::path& path);

}  // namespace aeaka::snapshot

#endif  // AEAKA_SNAPSHOT_HPP_
