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

#include "shiftscope/store_dir.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "shiftscope/error.hpp"

namespace shiftscope {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

void check_space_name(const std::string& name) {
  const bool ok = !name.empty() && std::ranges::all_of(name, [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  });
  if (!ok) {
    fail(ErrorCode::kInvalidArgument,
         "space name '" + name + "' must be non-empty [A-Za-z0-9_-]");
  }
}

StoreMeta read_meta(const fs::path& dir) {
  StoreMeta meta;
  std::ifstream in(dir / store_files::kMeta);
  if (!in) return meta;
  try {
    const json doc = json::parse(in);
    meta.image_root = doc.value("image_root", "");
    if (const auto it = doc.find("clusters"); it != doc.end()) {
      meta.cluster_space = it->at("space").get<std::string>();
      meta.cluster_top = it->value("top", meta.cluster_top);
    }
    if (const auto it = doc.find("projection"); it != doc.end()) {
      meta.projection_method = it->at("method").get<std::string>();
      if (it->contains("space")) meta.projection_space = it->at("space").get<std::string>();
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::kParseError, std::string("meta.json: ") + e.what());
  }
  return meta;
}

void write_meta(const fs::path& dir, const StoreMeta& meta) {
  json doc = {{"image_root", meta.image_root}};
  if (meta.cluster_space) {
    doc["clusters"] = {{"space", *meta.cluster_space}, {"top", meta.cluster_top}};
  }
  if (meta.projection_method) {
    doc["projection"] = {{"method", *meta.projection_method}};
    if (meta.projection_space) doc["projection"]["space"] = *meta.projection_space;
  }
  std::ofstream out(dir / store_files::kMeta, std::ios::trunc);
  if (!out) fail(ErrorCode::kIoError, "cannot write meta.json in " + dir.string());
  out << doc.dump(1) << '\n';
}

bool same_instances(const std::vector<InstanceRecord>& a,
                    const std::vector<InstanceRecord>& b) {
  return std::ranges::equal(a, b, [](const auto& x, const auto& y) {
    return x.id == y.id && x.split == y.split && x.image_path == y.image_path &&
           x.attributes == y.attributes;
  });
}

void require_store(const fs::path& dir) {
  if (!fs::exists(dir / store_files::kManifest)) {
    fail(ErrorCode::kIoError, dir.string() + " is not a store (no manifest.json)");
  }
}

}  // namespace

StoreLock::StoreLock(const fs::path& dir) {
  fd_ = ::open((dir / store_files::kLock).c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (fd_ < 0) fail(ErrorCode::kIoError, "cannot open lock file in " + dir.string());
  if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
    ::close(fd_);
    fd_ = -1;
    fail(ErrorCode::kStoreLocked, dir.string() + " is locked by another writer");
  }
}

StoreLock::~StoreLock() {
  if (fd_ >= 0) {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
}

LoadedStore open_store(const fs::path& dir) {
  require_store(dir);
  std::vector<InstanceRecord> records = load_manifest(dir / store_files::kManifest);
  const std::uint64_t count = records.size();

  std::vector<fs::path> space_files;
  if (fs::is_directory(dir / store_files::kSpaces)) {
    for (const auto& entry : fs::directory_iterator(dir / store_files::kSpaces)) {
      if (entry.path().extension() == ".dsem") space_files.push_back(entry.path());
    }
  }
  std::ranges::sort(space_files);
  std::vector<LatentSpace> spaces;
  for (const auto& path : space_files) {
    spaces.push_back(load_embeddings(path, count, {}, path.stem().string()));
  }

  LoadedStore out{dir, build_store(std::move(records), std::move(spaces)),
                  read_meta(dir), {}, {}, {}, {}};
  if (fs::exists(dir / store_files::kModel)) {
    out.model = load_model(dir / store_files::kModel);
  }
  if (fs::exists(dir / store_files::kScores)) {
    out.scores = load_scores(dir / store_files::kScores, out.store);
  }
  if (fs::exists(dir / store_files::kClusters) && out.meta.cluster_space) {
    out.clusters =
        load_clusters(dir / store_files::kClusters, out.store, *out.meta.cluster_space);
  }
  if (fs::exists(dir / store_files::kProjection)) {
    out.projection = load_external_projection(dir / store_files::kProjection, out.store);
  }
  return out;
}

void ingest(const fs::path& manifest, const fs::path& embeddings,
            const std::string& space, const fs::path& out_dir) {
  check_space_name(space);
  std::vector<InstanceRecord> records = load_manifest(manifest);
  LatentSpace latent = load_embeddings(embeddings, records.size(), {}, space);
  build_store(records, {latent});  // validates ids and row counts

  std::error_code ec;
  fs::create_directories(out_dir / store_files::kSpaces, ec);
  if (ec) fail(ErrorCode::kIoError, "cannot create " + out_dir.string());
  StoreLock lock(out_dir);

  StoreMeta meta = read_meta(out_dir);
  if (fs::exists(out_dir / store_files::kManifest)) {
    if (!same_instances(load_manifest(out_dir / store_files::kManifest), records)) {
      fail(ErrorCode::kInvalidArgument,
           out_dir.string() + " already holds a different manifest");
    }
  }
  save_manifest(out_dir / store_files::kManifest, records);
  meta.image_root = fs::absolute(manifest).parent_path().lexically_normal().string();
  write_meta(out_dir, meta);
  write_embeddings(out_dir / store_files::kSpaces / (space + ".dsem"), latent);
}

TrainedRatioModel train_step(const fs::path& dir, const std::string& space,
                             const TrainConfig& config) {
  require_store(dir);
  StoreLock lock(dir);
  const LoadedStore loaded = open_store(dir);
  DreTrainResult result = train_dre(loaded.store, space, config);
  save_model(dir / store_files::kModel, result.trained);
  write_embeddings(dir / store_files::kSpaces / "dre.dsem", result.dre);
  return std::move(result.trained);
}

ScoreTable score_step(const fs::path& dir, ScoreMethod method,
                      const std::string& space,
                      const IsolationForestParams& forest) {
  require_store(dir);
  StoreLock lock(dir);
  const LoadedStore loaded = open_store(dir);
  ScoringInputs inputs;
  inputs.forest = forest;
  if (loaded.model) inputs.model = &loaded.model->model;
  ScoreTable table = score_dataset(loaded.store, method, space, inputs);
  save_scores(dir / store_files::kScores, loaded.store, table);
  return table;
}

std::vector<ClusterSummary> cluster_step(const fs::path& dir,
                                         const std::string& space,
                                         std::size_t k, std::size_t top) {
  require_store(dir);
  StoreLock lock(dir);
  const LoadedStore loaded = open_store(dir);
  const ClusterAssignment assignment = ward_cluster(loaded.store, space, k);
  save_clusters(dir / store_files::kClusters, loaded.store, assignment);
  StoreMeta meta = loaded.meta;
  meta.cluster_space = space;
  meta.cluster_top = top;
  write_meta(dir, meta);
  if (!loaded.scores) return {};
  return rank_clusters(assignment, *loaded.scores, top);
}

void project_pca_step(const fs::path& dir, const std::string& space) {
  require_store(dir);
  StoreLock lock(dir);
  const LoadedStore loaded = open_store(dir);
  const ProjectionTable table = project_test_split(loaded.store, space);
  save_projection(dir / store_files::kProjection, loaded.store, table);
  StoreMeta meta = loaded.meta;
  meta.projection_method = "pca";
  meta.projection_space = space;
  write_meta(dir, meta);
}

void project_import_step(const fs::path& dir, const fs::path& csv) {
  require_store(dir);
  StoreLock lock(dir);
  const LoadedStore loaded = open_store(dir);
  const ProjectionTable table = load_external_projection(csv, loaded.store);
  save_projection(dir / store_files::kProjection, loaded.store, table);
  StoreMeta meta = loaded.meta;
  meta.projection_method = "external";
  meta.projection_space.reset();
  write_meta(dir, meta);
}

BenchReport bench_step(const fs::path& dir, const std::vector<ScoreMethod>& methods,
                       const std::vector<std::string>& spaces,
                       const BenchOptions& options, const fs::path& out_csv) {
  require_store(dir);
  const LoadedStore loaded = open_store(dir);
  BenchReport report = run_benchmark(loaded.store, methods, spaces, options);
  save_bench(out_csv, report);
  return report;
}

}  // namespace shiftscope
