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

// Command-line pipeline driver: ingest -> train -> score -> cluster ->
// project -> bench -> serve. Talks to the engine only through its C API.

#include <cstdio>
#include <string>
#include <string_view>

#include "CLI11.hpp"
#include "shiftscope/shiftscope.h"

namespace {

constexpr std::string_view kSubcommands[] = {"ingest",  "train", "score", "cluster",
                                             "project", "bench", "serve"};

int report(ss_status status, const char* step) {
  if (status != SS_OK) {
    std::fprintf(stderr, "shiftscope %s: %s: %s\n", step, ss_status_name(status),
                 ss_last_error());
  }
  return static_cast<int>(status);
}

bool known_subcommand(std::string_view arg) {
  for (const auto name : kSubcommands) {
    if (arg == name) return true;
  }
  return false;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1 && argv[1][0] != '-' && !known_subcommand(argv[1])) {
    std::fprintf(stderr, "shiftscope: unknown subcommand '%s'\n", argv[1]);
    return SS_ERR_UNKNOWN_SUBCOMMAND;
  }

  CLI::App app{"Covariate-shift detection and contrastive exploration over embeddings"};
  app.require_subcommand(1);
  app.set_version_flag("--version", ss_version());

  std::string store;
  std::string space;

  auto* ingest = app.add_subcommand("ingest", "Create or extend a store from a manifest and embeddings");
  std::string manifest, embeddings, out_dir;
  ingest->add_option("--manifest", manifest, "Manifest JSON")->required();
  ingest->add_option("--embeddings", embeddings, "Embedding file (.dsem)")->required();
  ingest->add_option("--space", space, "Name of the latent space")->required();
  ingest->add_option("--out", out_dir, "Store directory")->required();

  ss_train_options train_options;
  ss_train_options_init(&train_options);
  auto* train = app.add_subcommand("train", "Train the density-ratio model");
  train->add_option("--store", store, "Store directory")->required();
  train->add_option("--space", space, "Input latent space")->required();
  train->add_option("--hidden", train_options.hidden_dim, "Hidden units")->capture_default_str();
  train->add_option("--epochs", train_options.epochs, "Epochs")->capture_default_str();
  train->add_option("--lr", train_options.learning_rate, "Learning rate")->capture_default_str();
  train->add_option("--batch", train_options.batch_size, "Minibatch size")->capture_default_str();
  train->add_option("--seed", train_options.seed, "Random seed")->capture_default_str();

  std::string method;
  auto* score = app.add_subcommand("score", "Score every instance");
  score->add_option("--store", store, "Store directory")->required();
  score->add_option("--method", method, "density-ratio | iforest | center")
      ->required()
      ->check(CLI::IsMember({"density-ratio", "iforest", "center", "density_ratio",
                             "isolation_forest", "center_distance"}));
  score->add_option("--space", space, "Latent space")->required();

  std::size_t k = 100;
  std::size_t top = 10;
  auto* cluster = app.add_subcommand("cluster", "Ward-cluster the test split");
  cluster->add_option("--store", store, "Store directory")->required();
  cluster->add_option("--space", space, "Latent space")->required();
  cluster->add_option("--k", k, "Number of clusters")->capture_default_str();
  cluster->add_option("--top", top, "Clusters to rank")->capture_default_str();

  std::string projection_method;
  std::string import_csv;
  auto* project = app.add_subcommand("project", "2D overview of the test split");
  project->add_option("--store", store, "Store directory")->required();
  auto* project_space = project->add_option("--space", space, "Latent space");
  auto* project_method =
      project->add_option("--method", projection_method, "Projection method")
          ->check(CLI::IsMember({"pca"}));
  auto* project_import = project->add_option("--import", import_csv, "CSV id,x,y");
  project_method->needs(project_space);
  project_import->excludes(project_method);
  project_import->excludes(project_space);

  std::string methods = "density-ratio,iforest,center";
  std::string spaces;
  std::uint64_t bench_seed = 0;
  std::string bench_out;
  auto* bench = app.add_subcommand("bench", "Attribute-shift benchmark by AUROC");
  bench->add_option("--store", store, "Store directory")->required();
  bench->add_option("--methods", methods, "Comma-separated methods")->capture_default_str();
  bench->add_option("--spaces", spaces, "Comma-separated spaces")->required();
  bench->add_option("--seed", bench_seed, "Root seed")->capture_default_str();
  bench->add_option("--out", bench_out, "Report CSV")->required();

  int port = 8080;
  auto* serve = app.add_subcommand("serve", "Serve the HTTP API");
  serve->add_option("--store", store, "Store directory")->required();
  serve->add_option("--port", port, "TCP port")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : SS_ERR_INVALID_ARGUMENT;
  }

  if (*ingest) {
    const int rc = report(ss_ingest(manifest.c_str(), embeddings.c_str(),
                                    space.c_str(), out_dir.c_str()),
                          "ingest");
    if (rc == 0) std::printf("ingested space '%s' into %s\n", space.c_str(), out_dir.c_str());
    return rc;
  }
  if (*train) {
    double loss = 0.0;
    const int rc = report(ss_train(store.c_str(), space.c_str(), &train_options, &loss),
                          "train");
    if (rc == 0) std::printf("trained on '%s': final KLIEP loss %.6f\n", space.c_str(), loss);
    return rc;
  }
  if (*score) {
    const int rc = report(ss_score(store.c_str(), method.c_str(), space.c_str(), 0), "score");
    if (rc == 0) std::printf("scored with %s on '%s'\n", method.c_str(), space.c_str());
    return rc;
  }
  if (*cluster) {
    std::size_t ranked = 0;
    const int rc =
        report(ss_cluster(store.c_str(), space.c_str(), k, top, &ranked), "cluster");
    if (rc == 0) std::printf("%zu clusters on '%s', %zu ranked\n", k, space.c_str(), ranked);
    return rc;
  }
  if (*project) {
    if (!import_csv.empty()) {
      return report(ss_project_import(store.c_str(), import_csv.c_str()), "project");
    }
    if (space.empty()) {
      std::fprintf(stderr, "shiftscope project: give --space with --method pca, or --import\n");
      return SS_ERR_INVALID_ARGUMENT;
    }
    return report(ss_project_pca(store.c_str(), space.c_str()), "project");
  }
  if (*bench) {
    const int rc = report(ss_bench(store.c_str(), methods.c_str(), spaces.c_str(),
                                   &train_options, bench_seed, bench_out.c_str()),
                          "bench");
    if (rc == 0) std::printf("wrote %s\n", bench_out.c_str());
    return rc;
  }
  if (*serve) {
    ss_store* handle = nullptr;
    if (const int rc = report(ss_store_open(store.c_str(), &handle), "serve"); rc != 0) {
      return rc;
    }
    std::printf("serving %s on port %d\n", store.c_str(), port);
    std::fflush(stdout);
    const int rc = report(ss_serve(handle, "0.0.0.0", port), "serve");
    ss_store_close(handle);
    return rc;
  }
  return SS_ERR_UNKNOWN_SUBCOMMAND;
}
