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

#include "shiftscope/service.hpp"

#include <charconv>
#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>
#include <string_view>
#include <vector>

#include "httplib.h"
#include "json.hpp"
#include "shiftscope/error.hpp"
#include "shiftscope/histogram.hpp"
#include "shiftscope/neighborhood.hpp"

namespace shiftscope {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr std::size_t kDefaultPageSize = 100;

HttpResponse json_response(int status, const json& body) {
  return {status, "application/json", body.dump()};
}

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnknownInstance:
    case ErrorCode::kUnknownCluster:
    case ErrorCode::kUnknownSpace:
      return 404;
    case ErrorCode::kMissingArtifact:
    case ErrorCode::kMissingModel:
    case ErrorCode::kScoreCoverageGap:
      return 409;
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kParseError:
      return 400;
    default:
      return 500;
  }
}

HttpResponse error_response(ErrorCode code, const std::string& message) {
  return json_response(status_for(code),
                       {{"error",
                         {{"code", std::string(error_code_name(code))},
                          {"message", message}}}});
}

std::vector<std::string> split_path(std::string_view path) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (start <= path.size()) {
    const std::size_t end = std::min(path.find('/', start), path.size());
    if (end > start) parts.emplace_back(path.substr(start, end - start));
    start = end + 1;
  }
  return parts;
}

std::size_t query_size(const HttpRequest& request, const std::string& key,
                       std::size_t fallback) {
  const auto it = request.query.find(key);
  if (it == request.query.end() || it->second.empty()) return fallback;
  std::size_t value = 0;
  const auto& s = it->second;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    fail(ErrorCode::kInvalidArgument, "query '" + key + "' must be a non-negative integer");
  }
  return value;
}

std::string query_string(const HttpRequest& request, const std::string& key) {
  const auto it = request.query.find(key);
  return it == request.query.end() ? std::string() : it->second;
}

std::string utc_timestamp() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buffer[32];
  std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buffer;
}

std::string content_type_for(const fs::path& path) {
  std::string ext = path.extension().string();
  for (char& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (ext == ".png") return "image/png";
  if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
  if (ext == ".gif") return "image/gif";
  if (ext == ".webp") return "image/webp";
  if (ext == ".bmp") return "image/bmp";
  if (ext == ".svg") return "image/svg+xml";
  return "application/octet-stream";
}

class Router {
 public:
  explicit Router(const LoadedStore& loaded)
      : loaded_(loaded), store_(loaded.store) {}

  HttpResponse dataset() const {
    json spaces = json::array();
    for (const auto& name : store_.space_names()) {
      spaces.push_back({{"name", name}, {"dim", store_.space(name).dim()}});
    }
    json methods = json::array();
    if (loaded_.scores) {
      methods.push_back({{"method", std::string(method_name(loaded_.scores->method()))},
                         {"space", loaded_.scores->space_name()}});
    }
    return json_response(
        200, {{"counts",
               {{"train", store_.train_indices().size()},
                {"test", store_.test_indices().size()},
                {"total", store_.size()}}},
              {"spaces", std::move(spaces)},
              {"methods", std::move(methods)},
              {"artifacts",
               {{"model", loaded_.model.has_value()},
                {"scores", loaded_.scores.has_value()},
                {"clusters", loaded_.clusters.has_value()},
                {"projection", loaded_.projection.has_value()}}}});
  }

  HttpResponse instances(const HttpRequest& request) const {
    std::vector<std::size_t> indices;
    const std::string split = query_string(request, "split");
    if (split.empty()) {
      for (std::size_t i = 0; i < store_.size(); ++i) indices.push_back(i);
    } else {
      const Split s = parse_split(split);
      indices = store_.indices_of(s);
    }
    std::string sort = query_string(request, "sort");
    if (sort.empty()) sort = loaded_.scores ? "suspicion" : "index";
    if (sort == "suspicion") {
      sort_by_suspicion(indices, scores());
    } else if (sort != "index") {
      fail(ErrorCode::kInvalidArgument, "sort must be 'suspicion' or 'index'");
    }
    const std::size_t offset = query_size(request, "offset", 0);
    const std::size_t limit = query_size(request, "limit", kDefaultPageSize);
    json items = json::array();
    for (std::size_t k = offset; k < indices.size() && k < offset + limit; ++k) {
      items.push_back(brief(indices[k]));
    }
    return json_response(200, {{"total", indices.size()},
                               {"offset", offset},
                               {"limit", limit},
                               {"sort", sort},
                               {"items", std::move(items)}});
  }

  HttpResponse instance(const std::string& id) const {
    const std::size_t i = store_.index_of(id);
    const InstanceRecord& record = store_.record(i);
    json body = {{"id", record.id},
                 {"index", i},
                 {"split", std::string(split_name(record.split))},
                 {"image", record.image_path},
                 {"scores", nullptr}};
    if (!record.attributes.empty()) body["attributes"] = record.attributes;
    if (loaded_.scores) {
      if (const ScoreRow* row = loaded_.scores->find(i)) {
        body["scores"] = {
            {"method", std::string(method_name(loaded_.scores->method()))},
            {"space", loaded_.scores->space_name()},
            {"raw", row->raw},
            {"ratio", row->ratio ? json(*row->ratio) : json(nullptr)},
            {"suspicion", row->suspicion}};
      }
    }
    return json_response(200, body);
  }

  HttpResponse neighbors(const std::string& id, const HttpRequest& request) const {
    const std::size_t focus = store_.index_of(id);
    const std::string space = space_for(request);
    NeighborhoodOptions options;
    options.target_test_count = query_size(request, "target", options.target_test_count);
    options.min_count = query_size(request, "min", options.min_count);
    const Neighborhood hood = adaptive_neighborhood(store_, space, focus, options);
    const LatentSpace& latent = store_.space(space);
    const auto members = [&](const std::vector<std::size_t>& indices) {
      json out = json::array();
      for (const std::size_t i : indices) {
        out.push_back({{"id", store_.record(i).id},
                       {"distance", pairwise_distance(latent.row(focus), latent.row(i))}});
      }
      return out;
    };
    return json_response(200, {{"focus", id},
                               {"space", space},
                               {"radius", hood.radius},
                               {"target", options.target_test_count},
                               {"min", options.min_count},
                               {"train", members(hood.train_members)},
                               {"test", members(hood.test_members)}});
  }

  HttpResponse focus_histogram(const std::string& id, const HttpRequest& request) const {
    const std::size_t focus = store_.index_of(id);
    const std::string space = space_for(request);
    NeighborhoodOptions options;
    options.target_test_count = query_size(request, "target", options.target_test_count);
    options.min_count = query_size(request, "min", options.min_count);
    const Neighborhood hood = adaptive_neighborhood(store_, space, focus, options);
    const SideBySideHistogram h =
        build_side_by_side(hood.train_members, hood.test_members, scores(), id);
    json body = histogram_json(h, space);
    body["subject_kind"] = "instance";
    body["radius"] = hood.radius;
    return json_response(200, body);
  }

  HttpResponse clusters(const HttpRequest& request) const {
    const ClusterAssignment& assignment = cluster_assignment(request);
    const auto summaries =
        rank_clusters(assignment, scores(), loaded_.meta.cluster_top);
    json list = json::array();
    for (const ClusterSummary& s : summaries) {
      json reps = json::array();
      for (const std::size_t i : s.representatives) reps.push_back(store_.record(i).id);
      list.push_back({{"cluster_id", s.cluster_id},
                      {"size", s.size},
                      {"mean_suspicion", s.mean_suspicion},
                      {"representatives", std::move(reps)}});
    }
    return json_response(200, {{"space", assignment.space_name},
                               {"n_clusters", assignment.cluster_count()},
                               {"clusters", std::move(list)}});
  }

  HttpResponse cluster_histogram(const std::string& cid, const HttpRequest& request) const {
    const ClusterAssignment& assignment = cluster_assignment(request);
    std::size_t cluster = 0;
    const auto [ptr, ec] = std::from_chars(cid.data(), cid.data() + cid.size(), cluster);
    if (ec != std::errc() || ptr != cid.data() + cid.size()) {
      fail(ErrorCode::kUnknownCluster, "unknown cluster '" + cid + "'");
    }
    const ContrastSet set = cluster_contrast_set(store_, assignment, cluster, scores());
    const SideBySideHistogram h =
        build_side_by_side(set.train, set.test, scores(), std::to_string(cluster));
    json body = histogram_json(h, assignment.space_name);
    body["subject"] = cluster;
    body["subject_kind"] = "cluster";
    return json_response(200, body);
  }

  HttpResponse projection() const {
    if (!loaded_.projection) {
      fail(ErrorCode::kMissingArtifact, "no projection computed; run 'project'");
    }
    json points = json::array();
    for (const ProjectedPoint& p : *loaded_.projection) {
      points.push_back({{"id", store_.record(p.index).id}, {"x", p.x}, {"y", p.y}});
    }
    return json_response(200, points);
  }

  HttpResponse image(const std::string& id) const {
    const InstanceRecord& record = store_.record(store_.index_of(id));
    const fs::path path = fs::path(loaded_.meta.image_root) / record.image_path;
    std::ifstream in(path, std::ios::binary);
    if (!in) {
      return error_response(ErrorCode::kUnknownInstance,
                            "image file for '" + id + "' not found");
    }
    std::ostringstream bytes;
    bytes << in.rdbuf();
    return {200, content_type_for(path), bytes.str()};
  }

 private:
  const ScoreTable& scores() const {
    if (!loaded_.scores) fail(ErrorCode::kMissingArtifact, "no scores computed; run 'score'");
    return *loaded_.scores;
  }

  const ClusterAssignment& cluster_assignment(const HttpRequest& request) const {
    if (!loaded_.clusters) {
      fail(ErrorCode::kMissingArtifact, "no clusters computed; run 'cluster'");
    }
    const std::string space = query_string(request, "space");
    if (!space.empty() && space != loaded_.clusters->space_name) {
      fail(ErrorCode::kMissingArtifact, "clusters were computed in space '" +
                                            loaded_.clusters->space_name + "'");
    }
    return *loaded_.clusters;
  }

  std::string space_for(const HttpRequest& request) const {
    std::string space = query_string(request, "space");
    if (!space.empty()) {
      store_.space(space);
      return space;
    }
    if (loaded_.scores && store_.has_space(loaded_.scores->space_name())) {
      return loaded_.scores->space_name();
    }
    const auto names = store_.space_names();
    if (names.empty()) fail(ErrorCode::kMissingArtifact, "store has no spaces");
    return names.front();
  }

  json brief(std::size_t i) const {
    const InstanceRecord& record = store_.record(i);
    json item = {{"id", record.id}, {"split", std::string(split_name(record.split))}};
    const ScoreRow* row = loaded_.scores ? loaded_.scores->find(i) : nullptr;
    item["suspicion"] = row ? json(row->suspicion) : json(nullptr);
    return item;
  }

  json histogram_json(const SideBySideHistogram& h, const std::string& space) const {
    json bins = json::array();
    const auto ids = [&](const std::vector<std::size_t>& indices) {
      json out = json::array();
      for (const std::size_t i : indices) out.push_back(store_.record(i).id);
      return out;
    };
    for (const HistogramBin& bin : h.bins) {
      bins.push_back({{"lo", bin.lo},
                      {"hi", bin.hi},
                      {"train", ids(bin.train)},
                      {"test", ids(bin.test)},
                      {"train_count", bin.train.size()},
                      {"test_count", bin.test.size()}});
    }
    return {{"subject", h.subject},
            {"space", space},
            {"n_bins", h.bins.size()},
            {"bins", std::move(bins)}};
  }

  const LoadedStore& loaded_;
  const AnalysisStore& store_;
};

}  // namespace

Service::Service(LoadedStore loaded) : loaded_(std::move(loaded)) {}

Service::~Service() = default;

HttpResponse Service::handle(const HttpRequest& request) const {
  try {
    if (request.method == "GET") return get(request);
    if (request.method == "POST" && request.path == "/api/findings") {
      return post_finding(request);
    }
    return error_response(ErrorCode::kInvalidArgument,
                          request.method + " " + request.path + " is not supported");
  } catch (const Error& e) {
    return error_response(e.code(), e.what());
  } catch (const std::exception& e) {
    return error_response(ErrorCode::kInternal, e.what());
  }
}

HttpResponse Service::get(const HttpRequest& request) const {
  const Router router(loaded_);
  const std::vector<std::string> parts = split_path(request.path);
  const auto is = [&](std::initializer_list<std::string_view> pattern) {
    if (parts.size() != pattern.size()) return false;
    std::size_t k = 0;
    for (const std::string_view p : pattern) {
      if (p != "*" && parts[k] != p) return false;
      ++k;
    }
    return true;
  };
  if (is({"api", "dataset"})) return router.dataset();
  if (is({"api", "instances"})) return router.instances(request);
  if (is({"api", "instances", "*"})) return router.instance(parts[2]);
  if (is({"api", "neighbors", "*"})) return router.neighbors(parts[2], request);
  if (is({"api", "histogram", "focus", "*"})) {
    return router.focus_histogram(parts[3], request);
  }
  if (is({"api", "clusters"})) return router.clusters(request);
  if (is({"api", "clusters", "*", "histogram"})) {
    return router.cluster_histogram(parts[2], request);
  }
  if (is({"api", "projection"})) return router.projection();
  if (is({"images", "*"})) return router.image(parts[1]);
  return json_response(404, {{"error",
                              {{"code", "NotFound"},
                               {"message", "no route for " + request.path}}}});
}

HttpResponse Service::post_finding(const HttpRequest& request) const {
  json body;
  try {
    body = json::parse(request.body);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::kParseError, std::string("finding body: ") + e.what());
  }
  if (!body.is_object() || !body.contains("description") ||
      !body["description"].is_string() ||
      body["description"].get<std::string>().empty()) {
    fail(ErrorCode::kInvalidArgument, "finding needs a non-empty description");
  }
  json ids = json::array();
  if (const auto it = body.find("instance_ids"); it != body.end() && !it->is_null()) {
    if (!it->is_array()) fail(ErrorCode::kInvalidArgument, "instance_ids must be a list");
    for (const auto& id : *it) {
      if (!id.is_string() || !loaded_.store.find(id.get<std::string>())) {
        fail(ErrorCode::kInvalidArgument, "unknown instance id in finding");
      }
      ids.push_back(id);
    }
  }
  const json finding = {{"timestamp", utc_timestamp()},
                        {"description", body["description"]},
                        {"instance_ids", std::move(ids)}};
  {
    const std::lock_guard<std::mutex> guard(journal_mutex_);
    std::ofstream out(loaded_.dir / store_files::kFindings, std::ios::app);
    if (!out) fail(ErrorCode::kIoError, "cannot append to findings journal");
    out << finding.dump() << '\n';
  }
  return json_response(201, finding);
}

void Service::install_routes() {
  server_ = std::make_unique<httplib::Server>();
  // No SO_REUSEPORT: an occupied port must fail to bind.
  server_->set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  const auto forward = [this](const httplib::Request& req, httplib::Response& res) {
    HttpRequest request;
    request.method = req.method;
    request.path = req.path;
    for (const auto& [key, value] : req.params) request.query.emplace(key, value);
    request.body = req.body;
    const HttpResponse response = handle(request);
    res.status = response.status;
    res.set_content(response.body, response.content_type);
  };
  server_->Get(".*", forward);
  server_->Post(".*", forward);
}

int Service::bind_any(const std::string& host) {
  install_routes();
  const int port = server_->bind_to_any_port(host);
  if (port < 0) fail(ErrorCode::kPortUnavailable, "cannot bind " + host);
  return port;
}

void Service::listen_bound() {
  if (!server_) fail(ErrorCode::kInternal, "listen_bound before bind");
  server_->listen_after_bind();
}

void Service::bind(const std::string& host, int port) {
  install_routes();
  if (!server_->bind_to_port(host, port)) {
    fail(ErrorCode::kPortUnavailable, "cannot bind " + host + ":" + std::to_string(port));
  }
}

void Service::listen(const std::string& host, int port) {
  bind(host, port);
  listen_bound();
}

void Service::stop() {
  if (server_) server_->stop();
}

}  // namespace shiftscope
