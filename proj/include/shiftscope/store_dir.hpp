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

#ifndef SHIFTSCOPE_STORE_DIR_HPP_
#define SHIFTSCOPE_STORE_DIR_HPP_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "shiftscope/bench.hpp"
#include "shiftscope/clustering.hpp"
#include "shiftscope/core_data.hpp"
#include "shiftscope/kliep.hpp"
#include "shiftscope/projection.hpp"
#include "shiftscope/scoring.hpp"

namespace shiftscope {

// On-disk layout of a store directory:
//   manifest.json, meta.json, spaces/NAME.dsem, model.json, scores.csv,
//   clusters.csv, projection.csv, findings.jsonl
namespace store_files {
inline constexpr const char* kManifest = "manifest.json";
inline constexpr const char* kMeta = "meta.json";
inline constexpr const char* kSpaces = "spaces";
inline constexpr const char* kModel = "model.json";
inline constexpr const char* kScores = "scores.csv";
inline constexpr const char* kClusters = "clusters.csv";
inline constexpr const char* kProjection = "projection.csv";
inline constexpr const char* kFindings = "findings.jsonl";
inline constexpr const char* kLock = ".lock";
}  // namespace store_files

// Provenance of derived artifacts, kept in meta.json.
struct StoreMeta {
  std::string image_root;
  std::optional<std::string> cluster_space;
  std::size_t cluster_top = 10;
  std::optional<std::string> projection_method;
  std::optional<std::string> projection_space;
};

// Exclusive advisory lock on a store directory for the lifetime of the
// object. Throws StoreLocked when another writer holds it.
class StoreLock {
 public:
  explicit StoreLock(const std::filesystem::path& dir);
  ~StoreLock();
  StoreLock(const StoreLock&) = delete;
  StoreLock& operator=(const StoreLock&) = delete;

 private:
  int fd_ = -1;
};

// Everything a store directory currently holds, loaded read-only.
struct LoadedStore {
  std::filesystem::path dir;
  AnalysisStore store;
  StoreMeta meta;
  std::optional<TrainedRatioModel> model;
  std::optional<ScoreTable> scores;
  std::optional<ClusterAssignment> clusters;
  std::optional<ProjectionTable> projection;
};

LoadedStore open_store(const std::filesystem::path& dir);

// Pipeline steps. Each takes the store directory, locks it, and writes its
// artifacts there.
void ingest(const std::filesystem::path& manifest,
            const std::filesystem::path& embeddings, const std::string& space,
            const std::filesystem::path& out_dir);
TrainedRatioModel train_step(const std::filesystem::path& dir,
                             const std::string& space,
                             const TrainConfig& config);
ScoreTable score_step(const std::filesystem::path& dir, ScoreMethod method,
                      const std::string& space,
                      const IsolationForestParams& forest = {});
std::vector<ClusterSummary> cluster_step(const std::filesystem::path& dir,
                                         const std::string& space,
                                         std::size_t k, std::size_t top);
void project_pca_step(const std::filesystem::path& dir,
                      const std::string& space);
void project_import_step(const std::filesystem::path& dir,
                         const std::filesystem::path& csv);
BenchReport bench_step(const std::filesystem::path& dir,
                       const std::vector<ScoreMethod>& methods,
                       const std::vector<std::string>& spaces,
                       const BenchOptions& options,
                       const std::filesystem::path& out_csv);

}  // namespace shiftscope

#endif  // SHIFTSCOPE_STORE_DIR_HPP_
