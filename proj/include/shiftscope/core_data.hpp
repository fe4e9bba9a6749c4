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

#ifndef SHIFTSCOPE_CORE_DATA_HPP_
#define SHIFTSCOPE_CORE_DATA_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace shiftscope {

enum class Split { kTrain, kTest };

std::string_view split_name(Split split);
Split parse_split(std::string_view name);

struct InstanceRecord {
  std::string id;
  Split split = Split::kTrain;
  std::string image_path;
  // Binary attribute labels keyed by attribute name; empty when unlabeled.
  std::map<std::string, int> attributes;
};

// Dense row-major embedding matrix, one row per manifest instance.
class LatentSpace {
 public:
  LatentSpace() = default;
  LatentSpace(std::string name, std::size_t dim, std::vector<float> values);

  const std::string& name() const { return name_; }
  std::size_t dim() const { return dim_; }
  std::size_t count() const { return dim_ == 0 ? 0 : values_.size() / dim_; }

  std::span<const float> row(std::size_t i) const {
    return {values_.data() + i * dim_, dim_};
  }
  std::span<const float> values() const { return values_; }

 private:
  std::string name_;
  std::size_t dim_ = 0;
  std::vector<float> values_;
};

// Parses the JSON manifest; records keep file order.
std::vector<InstanceRecord> load_manifest(const std::filesystem::path& path);
std::vector<InstanceRecord> parse_manifest(std::string_view text);
void save_manifest(const std::filesystem::path& path,
                   std::span<const InstanceRecord> records);

// Reads a .dsem embedding file. `expected_dim` is checked when set.
LatentSpace load_embeddings(const std::filesystem::path& path,
                            std::uint64_t expected_count,
                            std::optional<std::uint32_t> expected_dim = {},
                            std::string name = {});
void write_embeddings(const std::filesystem::path& path,
                      const LatentSpace& space);

// Immutable after construction. Every artifact indexes instances by manifest
// position.
class AnalysisStore {
 public:
  AnalysisStore(std::vector<InstanceRecord> records,
                std::vector<LatentSpace> spaces);

  std::size_t size() const { return records_.size(); }
  const InstanceRecord& record(std::size_t i) const { return records_.at(i); }
  std::span<const InstanceRecord> records() const { return records_; }

  const std::vector<std::size_t>& train_indices() const { return train_; }
  const std::vector<std::size_t>& test_indices() const { return test_; }
  const std::vector<std::size_t>& indices_of(Split split) const {
    return split == Split::kTrain ? train_ : test_;
  }

  bool has_space(std::string_view name) const;
  // Throws UnknownSpace.
  const LatentSpace& space(std::string_view name) const;
  std::vector<std::string> space_names() const;

  std::optional<std::size_t> find(std::string_view id) const;
  // Throws UnknownInstance.
  std::size_t index_of(std::string_view id) const;

  bool has_attributes() const {
    return !records_.empty() && !records_.front().attributes.empty();
  }

  // Throws SplitEmpty unless both splits have members.
  void require_both_splits() const;

 private:
  std::vector<InstanceRecord> records_;
  std::map<std::string, LatentSpace, std::less<>> spaces_;
  std::unordered_map<std::string, std::size_t> by_id_;
  std::vector<std::size_t> train_;
  std::vector<std::size_t> test_;
};

AnalysisStore build_store(std::vector<InstanceRecord> records,
                          std::vector<LatentSpace> spaces);

// Gathers the rows at `indices` into a new space, in that order.
LatentSpace gather_rows(const LatentSpace& space,
                        std::span<const std::size_t> indices);

}  // namespace shiftscope

#endif  // SHIFTSCOPE_CORE_DATA_HPP_
