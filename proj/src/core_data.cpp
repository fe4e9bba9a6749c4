// Copyright 2026 The Shiftscope Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "shiftscope/core_data.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>
#include <utility>

#include "json.hpp"
#include "shiftscope/error.hpp"

namespace shiftscope {
namespace {

using nlohmann::json;

constexpr std::array<char, 4> kMagic = {'D', 'S', 'E', 'M'};
constexpr std::uint32_t kVersion = 1;
constexpr std::size_t kHeaderSize = 4 + 4 + 8 + 4;

template <typename T>
void put_le(std::string& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>((value >> (8 * i)) & 0xFF));
  }
}

template <typename T>
T get_le(const unsigned char* p) {
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    value |= static_cast<T>(p[i]) << (8 * i);
  }
  return value;
}

InstanceRecord record_from_json(const json& item, std::size_t position) {
  if (!item.is_object()) {
    fail(ErrorCode::kParseError,
         "manifest entry " + std::to_string(position) + " is not an object");
  }
  InstanceRecord record;
  const auto id = item.find("id");
  const auto split = item.find("split");
  const auto image = item.find("image");
  if (id == item.end() || !id->is_string() || split == item.end() ||
      !split->is_string() || image == item.end() || !image->is_string()) {
    fail(ErrorCode::kParseError, "manifest entry " + std::to_string(position) +
                                     " needs string id, split and image");
  }
  record.id = id->get<std::string>();
  if (record.id.empty()) {
    fail(ErrorCode::kParseError, "empty id at entry " + std::to_string(position));
  }
  record.split = parse_split(split->get<std::string>());
  record.image_path = image->get<std::string>();
  if (const auto attrs = item.find("attributes"); attrs != item.end()) {
    if (!attrs->is_object()) {
      fail(ErrorCode::kParseError, "attributes of '" + record.id +
                                       "' must be an object");
    }
    for (const auto& [key, value] : attrs->items()) {
      if (!value.is_number_integer() ||
          (value.get<int>() != 0 && value.get<int>() != 1)) {
        fail(ErrorCode::kParseError, "attribute '" + key + "' of '" +
                                         record.id + "' must be 0 or 1");
      }
      record.attributes.emplace(key, value.get<int>());
    }
  }
  return record;
}

}  // namespace

std::string_view split_name(Split split) {
  return split == Split::kTrain ? "train" : "test";
}

Split parse_split(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "test") return Split::kTest;
  fail(ErrorCode::kParseError, "unknown split '" + std::string(name) + "'");
}

LatentSpace::LatentSpace(std::string name, std::size_t dim,
                         std::vector<float> values)
    : name_(std::move(name)), dim_(dim), values_(std::move(values)) {
  if (dim_ == 0) fail(ErrorCode::kInvalidArgument, "space dim must be positive");
  if (values_.size() % dim_ != 0) {
    fail(ErrorCode::kInvalidArgument, "value count not a multiple of dim");
  }
}

std::vector<InstanceRecord> parse_manifest(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::kParseError, std::string("manifest: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("instances") ||
      !doc["instances"].is_array()) {
    fail(ErrorCode::kParseError, "manifest needs an \"instances\" array");
  }
  std::vector<InstanceRecord> records;
  records.reserve(doc["instances"].size());
  std::set<std::string, std::less<>> seen;
  for (const auto& item : doc["instances"]) {
    InstanceRecord record = record_from_json(item, records.size());
    if (!seen.insert(record.id).second) {
      fail(ErrorCode::kDuplicateId, "duplicate id '" + record.id + "'");
    }
    if (!records.empty()) {
      const auto& first = records.front().attributes;
      const bool same_keys = std::ranges::equal(
          first, record.attributes,
          [](const auto& a, const auto& b) { return a.first == b.first; });
      if (!same_keys) {
        fail(ErrorCode::kAttributeSchemaMismatch,
             "attribute keys of '" + record.id + "' differ from '" +
                 records.front().id + "'");
      }
    }
    records.push_back(std::move(record));
  }
  return records;
}

std::vector<InstanceRecord> load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIoError, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_manifest(buffer.str());
}

void save_manifest(const std::filesystem::path& path,
                   std::span<const InstanceRecord> records) {
  json items = json::array();
  for (const auto& r : records) {
    json item = {{"id", r.id},
                 {"split", std::string(split_name(r.split))},
                 {"image", r.image_path}};
    if (!r.attributes.empty()) item["attributes"] = r.attributes;
    items.push_back(std::move(item));
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIoError, "cannot write " + path.string());
  out << json{{"instances", std::move(items)}}.dump(1) << '\n';
}

LatentSpace load_embeddings(const std::filesystem::path& path,
                            std::uint64_t expected_count,
                            std::optional<std::uint32_t> expected_dim,
                            std::string name) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIoError, "cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  if (bytes.size() < kHeaderSize ||
      !std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
    fail(ErrorCode::kBadMagic, path.string() + " is not a DSEM file");
  }
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const auto version = get_le<std::uint32_t>(p + 4);
  const auto count = get_le<std::uint64_t>(p + 8);
  const auto dim = get_le<std::uint32_t>(p + 16);
  if (version != kVersion) {
    fail(ErrorCode::kBadMagic, "unsupported DSEM version " +
                                   std::to_string(version));
  }
  if (count != expected_count) {
    fail(ErrorCode::kCountMismatch,
         "embedding count " + std::to_string(count) + " but expected " +
             std::to_string(expected_count));
  }
  if (dim == 0) fail(ErrorCode::kParseError, "DSEM dim is zero");
  if (expected_dim && *expected_dim != dim) {
    fail(ErrorCode::kDimensionMismatch,
         "embedding dim " + std::to_string(dim) + " but expected " +
             std::to_string(*expected_dim));
  }
  const std::uint64_t n_values = count * dim;
  if (bytes.size() != kHeaderSize + n_values * 4) {
    fail(ErrorCode::kParseError, "DSEM payload size does not match header");
  }
  std::vector<float> values(n_values);
  for (std::uint64_t i = 0; i < n_values; ++i) {
    const float v =
        std::bit_cast<float>(get_le<std::uint32_t>(p + kHeaderSize + 4 * i));
    if (!std::isfinite(v)) {
      fail(ErrorCode::kNonFiniteValue,
           "non-finite value in row " + std::to_string(i / dim));
    }
    values[i] = v;
  }
  if (name.empty()) name = path.stem().string();
  return LatentSpace(std::move(name), dim, std::move(values));
}

void write_embeddings(const std::filesystem::path& path,
                      const LatentSpace& space) {
  std::string bytes(kMagic.begin(), kMagic.end());
  bytes.reserve(kHeaderSize + space.values().size() * 4);
  put_le<std::uint32_t>(bytes, kVersion);
  put_le<std::uint64_t>(bytes, space.count());
  put_le<std::uint32_t>(bytes, static_cast<std::uint32_t>(space.dim()));
  for (const float v : space.values()) {
    put_le<std::uint32_t>(bytes, std::bit_cast<std::uint32_t>(v));
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIoError, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

AnalysisStore::AnalysisStore(std::vector<InstanceRecord> records,
                             std::vector<LatentSpace> spaces)
    : records_(std::move(records)) {
  for (std::size_t i = 0; i < records_.size(); ++i) {
    if (!by_id_.emplace(records_[i].id, i).second) {
      fail(ErrorCode::kDuplicateId, "duplicate id '" + records_[i].id + "'");
    }
    (records_[i].split == Split::kTrain ? train_ : test_).push_back(i);
  }
  for (auto& space : spaces) {
    if (space.count() != records_.size()) {
      fail(ErrorCode::kRowCountMismatch,
           "space '" + space.name() + "' has " +
               std::to_string(space.count()) + " rows for " +
               std::to_string(records_.size()) + " instances");
    }
    std::string key = space.name();
    spaces_.insert_or_assign(std::move(key), std::move(space));
  }
}

bool AnalysisStore::has_space(std::string_view name) const {
  return spaces_.find(name) != spaces_.end();
}

const LatentSpace& AnalysisStore::space(std::string_view name) const {
  const auto it = spaces_.find(name);
  if (it == spaces_.end()) {
    fail(ErrorCode::kUnknownSpace, "unknown space '" + std::string(name) + "'");
  }
  return it->second;
}

std::vector<std::string> AnalysisStore::space_names() const {
  std::vector<std::string> names;
  for (const auto& [name, space] : spaces_) names.push_back(name);
  return names;
}

std::optional<std::size_t> AnalysisStore::find(std::string_view id) const {
  const auto it = by_id_.find(std::string(id));
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

std::size_t AnalysisStore::index_of(std::string_view id) const {
  const auto found = find(id);
  if (!found) {
    fail(ErrorCode::kUnknownInstance, "unknown instance '" + std::string(id) + "'");
  }
  return *found;
}

void AnalysisStore::require_both_splits() const {
  if (train_.empty() || test_.empty()) {
    fail(ErrorCode::kSplitEmpty, train_.empty() ? "train split is empty"
                                                : "test split is empty");
  }
}

AnalysisStore build_store(std::vector<InstanceRecord> records,
                          std::vector<LatentSpace> spaces) {
  return AnalysisStore(std::move(records), std::move(spaces));
}

LatentSpace gather_rows(const LatentSpace& space,
                        std::span<const std::size_t> indices) {
  std::vector<float> values;
  values.reserve(indices.size() * space.dim());
  for (const std::size_t i : indices) {
    const auto row = space.row(i);
    values.insert(values.end(), row.begin(), row.end());
  }
  return LatentSpace(space.name(), space.dim(), std::move(values));
}

}  // namespace shiftscope
