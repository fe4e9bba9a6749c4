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

#include "shiftscope/shiftscope.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "httplib.h"
#include "shiftscope/error.hpp"
#include "shiftscope/service.hpp"
#include "shiftscope/store_dir.hpp"

struct ss_store {
  std::unique_ptr<shiftscope::Service> service;
  std::thread server_thread;
};

namespace {

using shiftscope::ErrorCode;

thread_local std::string last_error;

template <typename Fn>
ss_status guarded(Fn&& fn) {
  try {
    fn();
    last_error.clear();
    return SS_OK;
  } catch (const shiftscope::Error& e) {
    last_error = e.what();
    return static_cast<ss_status>(e.code());
  } catch (const std::exception& e) {
    last_error = e.what();
    return SS_ERR_INTERNAL;
  }
}

std::string required(const char* value, const char* what) {
  if (value == nullptr || *value == '\0') {
    shiftscope::fail(ErrorCode::kInvalidArgument, std::string(what) + " is required");
  }
  return value;
}

shiftscope::TrainConfig to_config(const ss_train_options* options) {
  ss_train_options defaults;
  ss_train_options_init(&defaults);
  const ss_train_options& o = options ? *options : defaults;
  shiftscope::TrainConfig config;
  config.hidden_dim = o.hidden_dim;
  config.epochs = o.epochs;
  config.learning_rate = o.learning_rate;
  config.batch_size = o.batch_size;
  config.seed = o.seed;
  config.validate();
  return config;
}

std::vector<std::string> split_list(const std::string& list) {
  std::vector<std::string> out;
  std::stringstream stream(list);
  std::string item;
  while (std::getline(stream, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

extern "C" {

const char* ss_version(void) { return "0.1.0"; }

const char* ss_status_name(ss_status status) {
  return shiftscope::error_code_name(static_cast<ErrorCode>(status)).data();
}

const char* ss_last_error(void) { return last_error.c_str(); }

void ss_train_options_init(ss_train_options* options) {
  if (options == nullptr) return;
  const shiftscope::TrainConfig defaults;
  options->hidden_dim = static_cast<uint32_t>(defaults.hidden_dim);
  options->epochs = defaults.epochs;
  options->learning_rate = defaults.learning_rate;
  options->batch_size = static_cast<uint32_t>(defaults.batch_size);
  options->seed = defaults.seed;
}

ss_status ss_ingest(const char* manifest_path, const char* embeddings_path,
                    const char* space, const char* out_dir) {
  return guarded([&] {
    shiftscope::ingest(required(manifest_path, "manifest"),
                       required(embeddings_path, "embeddings"),
                       required(space, "space"), required(out_dir, "out"));
  });
}

ss_status ss_train(const char* store_dir, const char* space,
                   const ss_train_options* options, double* final_loss) {
  return guarded([&] {
    const auto trained = shiftscope::train_step(
        required(store_dir, "store"), required(space, "space"), to_config(options));
    if (final_loss) *final_loss = trained.history.back();
  });
}

ss_status ss_score(const char* store_dir, const char* method, const char* space,
                   uint64_t seed) {
  return guarded([&] {
    shiftscope::IsolationForestParams forest;
    forest.seed = seed;
    shiftscope::score_step(required(store_dir, "store"),
                           shiftscope::parse_method(required(method, "method")),
                           required(space, "space"), forest);
  });
}

ss_status ss_cluster(const char* store_dir, const char* space, size_t k,
                     size_t top, size_t* n_ranked) {
  return guarded([&] {
    const auto summaries = shiftscope::cluster_step(
        required(store_dir, "store"), required(space, "space"), k, top);
    if (n_ranked) *n_ranked = summaries.size();
  });
}

ss_status ss_project_pca(const char* store_dir, const char* space) {
  return guarded([&] {
    shiftscope::project_pca_step(required(store_dir, "store"), required(space, "space"));
  });
}

ss_status ss_project_import(const char* store_dir, const char* csv_path) {
  return guarded([&] {
    shiftscope::project_import_step(required(store_dir, "store"),
                                    required(csv_path, "import"));
  });
}

ss_status ss_bench(const char* store_dir, const char* methods, const char* spaces,
                   const ss_train_options* options, uint64_t seed,
                   const char* out_csv) {
  return guarded([&] {
    std::vector<shiftscope::ScoreMethod> parsed;
    for (const auto& name : split_list(required(methods, "methods"))) {
      parsed.push_back(shiftscope::parse_method(name));
    }
    shiftscope::BenchOptions bench;
    bench.train = to_config(options);
    bench.seed = seed;
    shiftscope::bench_step(required(store_dir, "store"), parsed,
                           split_list(required(spaces, "spaces")), bench,
                           required(out_csv, "out"));
  });
}

ss_status ss_store_open(const char* store_dir, ss_store** out) {
  if (out == nullptr) {
    last_error = "out handle is required";
    return SS_ERR_INVALID_ARGUMENT;
  }
  *out = nullptr;
  return guarded([&] {
    auto handle = std::make_unique<ss_store>();
    handle->service = std::make_unique<shiftscope::Service>(
        shiftscope::open_store(required(store_dir, "store")));
    *out = handle.release();
  });
}

void ss_store_close(ss_store* store) {
  if (store == nullptr) return;
  ss_serve_stop(store);
  delete store;
}

ss_status ss_store_counts(const ss_store* store, size_t* n_train, size_t* n_test) {
  return guarded([&] {
    if (store == nullptr) shiftscope::fail(ErrorCode::kInvalidArgument, "null store");
    const auto& s = store->service->loaded().store;
    if (n_train) *n_train = s.train_indices().size();
    if (n_test) *n_test = s.test_indices().size();
  });
}

ss_status ss_serve(ss_store* store, const char* host, int port) {
  return guarded([&] {
    if (store == nullptr) shiftscope::fail(ErrorCode::kInvalidArgument, "null store");
    store->service->listen(host ? host : "0.0.0.0", port);
  });
}

ss_status ss_serve_start(ss_store* store, const char* host, int* port) {
  return guarded([&] {
    if (store == nullptr || port == nullptr) {
      shiftscope::fail(ErrorCode::kInvalidArgument, "null store or port");
    }
    if (store->server_thread.joinable()) {
      shiftscope::fail(ErrorCode::kInvalidArgument, "already serving");
    }
    const std::string h = host ? host : "127.0.0.1";
    shiftscope::Service& service = *store->service;
    if (*port == 0) {
      *port = service.bind_any(h);
    } else {
      service.bind(h, *port);
    }
    store->server_thread = std::thread([&service] { service.listen_bound(); });
  });
}

ss_status ss_serve_stop(ss_store* store) {
  return guarded([&] {
    if (store == nullptr) return;
    store->service->stop();
    if (store->server_thread.joinable()) store->server_thread.join();
  });
}

ss_status ss_request(const ss_store* store, const char* method, const char* target,
                     const char* request_body, int* http_status, char** body,
                     size_t* body_len) {
  return guarded([&] {
    if (store == nullptr || http_status == nullptr || body == nullptr) {
      shiftscope::fail(ErrorCode::kInvalidArgument, "null argument");
    }
    *body = nullptr;
    shiftscope::HttpRequest request;
    request.method = method ? method : "GET";
    const std::string t = required(target, "target");
    const std::size_t q = t.find('?');
    request.path = httplib::detail::decode_url(t.substr(0, q), false);
    if (q != std::string::npos) {
      httplib::Params params;
      httplib::detail::parse_query_text(t.substr(q + 1), params);
      for (const auto& [key, value] : params) request.query.emplace(key, value);
    }
    if (request_body) request.body = request_body;
    const shiftscope::HttpResponse response = store->service->handle(request);
    *http_status = response.status;
    char* copy = static_cast<char*>(std::malloc(response.body.size() + 1));
    if (copy == nullptr) shiftscope::fail(ErrorCode::kInternal, "out of memory");
    std::memcpy(copy, response.body.data(), response.body.size());
    copy[response.body.size()] = '\0';
    *body = copy;
    if (body_len) *body_len = response.body.size();
  });
}

void ss_free(void* ptr) { std::free(ptr); }

}  // extern "C"
