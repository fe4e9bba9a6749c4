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

#include <fstream>
#include <set>
#include <thread>

#include "doctest.h"
#include "httplib.h"
#include "json.hpp"
#include "shiftscope/error.hpp"
#include "shiftscope/histogram.hpp"
#include "shiftscope/service.hpp"
#include "test_support.hpp"

using namespace shiftscope;
using nlohmann::json;
using shiftscope::testing::TempDir;

namespace {

struct Served {
  TempDir tmp;
  testing::Fixture fixture = testing::gaussian_shift(300, 270, 30);
  std::unique_ptr<Service> service;

  Served() {
    testing::prepare_store_dir(fixture, tmp / "store");
    std::ofstream(tmp / "source" / "tr0.png", std::ios::binary) << "\x89PNG-bytes";
    service = std::make_unique<Service>(open_store(tmp / "store"));
  }

  HttpResponse get(const std::string& path, std::map<std::string, std::string> query = {}) const {
    return service->handle({"GET", path, std::move(query), ""});
  }
  json get_json(const std::string& path, std::map<std::string, std::string> query = {}) const {
    const HttpResponse r = get(path, std::move(query));
    REQUIRE(r.status == 200);
    return json::parse(r.body);
  }
  HttpResponse post(const std::string& body) const {
    return service->handle({"POST", "/api/findings", {}, body});
  }
};

Served& served() {
  static Served s;
  return s;
}

std::string error_code(const HttpResponse& r) {
  return json::parse(r.body)["error"]["code"].get<std::string>();
}

double suspicion_of(const std::string& id) {
  return served().get_json("/api/instances/" + id)["scores"]["suspicion"].get<double>();
}

// Recounts a histogram payload from per-id lookups.
void check_histogram(const json& h) {
  REQUIRE(h["bins"].size() == 5);
  REQUIRE(h["n_bins"] == 5);
  for (std::size_t b = 0; b < 5; ++b) {
    const json& bin = h["bins"][b];
    const double lo = bin["lo"];
    const double hi = bin["hi"];
    CHECK(lo == doctest::Approx(static_cast<double>(4 - b) / 5));
    CHECK(hi == doctest::Approx(static_cast<double>(5 - b) / 5));
    CHECK(bin["train"].size() == bin["train_count"].get<std::size_t>());
    CHECK(bin["test"].size() == bin["test_count"].get<std::size_t>());
    for (const char* side : {"train", "test"}) {
      double previous = 2.0;
      for (const auto& id : bin[side]) {
        const double s = suspicion_of(id);
        CHECK(bin_of(s) == 4 - b);
        CHECK(s <= previous);
        previous = s;
        const json record = served().get_json("/api/instances/" + id.get<std::string>());
        CHECK(record["split"] == side);
      }
    }
  }
}

}  // namespace

TEST_CASE("dataset summary") {
  const json d = served().get_json("/api/dataset");
  CHECK(d["counts"]["train"] == 300);
  CHECK(d["counts"]["test"] == 300);
  CHECK(d["counts"]["total"] == 600);
  std::set<std::string> spaces;
  for (const auto& s : d["spaces"]) spaces.insert(s["name"]);
  CHECK(spaces == std::set<std::string>{"dre", "z"});
  REQUIRE(d["methods"].size() == 1);
  CHECK(d["methods"][0]["method"] == "density_ratio");
  CHECK(d["artifacts"]["model"] == true);
  CHECK(d["artifacts"]["clusters"] == true);
}

TEST_CASE("instance listing") {
  const json page = served().get_json("/api/instances",
                                      {{"split", "test"}, {"offset", "5"}, {"limit", "20"}});
  CHECK(page["total"] == 300);
  REQUIRE(page["items"].size() == 20);
  double previous = 2.0;
  for (const auto& item : page["items"]) {
    CHECK(item["split"] == "test");
    CHECK(item["suspicion"].get<double>() <= previous);
    previous = item["suspicion"];
  }
  const json first = served().get_json("/api/instances", {{"split", "test"}, {"limit", "6"}});
  CHECK(first["items"][5] == page["items"][0]);
  const json all = served().get_json("/api/instances", {{"limit", "1000"}});
  CHECK(all["items"].size() == 600);
  const json by_index = served().get_json("/api/instances", {{"sort", "index"}, {"limit", "1"}});
  CHECK(by_index["items"][0]["id"] == "tr0");
  CHECK(served().get("/api/instances", {{"limit", "x"}}).status == 400);
  CHECK(served().get("/api/instances", {{"sort", "name"}}).status == 400);
  CHECK(served().get("/api/instances", {{"split", "val"}}).status == 400);
}

TEST_CASE("instance record") {
  const json r = served().get_json("/api/instances/sh3");
  CHECK(r["split"] == "test");
  CHECK(r["image"] == "sh3.png");
  CHECK(r["scores"]["method"] == "density_ratio");
  CHECK(r["scores"]["ratio"].get<double>() > 0.0);
  const HttpResponse missing = served().get("/api/instances/nobody");
  CHECK(missing.status == 404);
  CHECK(error_code(missing) == "UnknownInstance");
}

TEST_CASE("neighbors") {
  const json n = served().get_json("/api/neighbors/te10", {{"target", "40"}});
  CHECK(n["space"] == "z");
  CHECK(n["test"].size() >= 40);
  const double radius = n["radius"];
  for (const char* side : {"train", "test"}) {
    for (const auto& m : n[side]) {
      CHECK(m["distance"].get<double>() <= radius);
      CHECK(served().get("/api/instances/" + m["id"].get<std::string>()).status == 200);
    }
  }
  const HttpResponse missing = served().get("/api/neighbors/unknown-id");
  CHECK(missing.status == 404);
  CHECK(error_code(missing) == "UnknownInstance");
  CHECK(served().get("/api/neighbors/te10", {{"space", "pixels"}}).status == 404);
  const json dre = served().get_json("/api/neighbors/te10", {{"space", "dre"}});
  CHECK(dre["space"] == "dre");
}

TEST_CASE("focus histogram recount") {
  const json h = served().get_json("/api/histogram/focus/sh0", {{"target", "50"}});
  CHECK(h["subject"] == "sh0");
  CHECK(h["subject_kind"] == "instance");
  check_histogram(h);
  const json n = served().get_json("/api/neighbors/sh0", {{"target", "50"}});
  std::size_t train = 0, test = 0;
  for (const auto& bin : h["bins"]) {
    train += bin["train_count"].get<std::size_t>();
    test += bin["test_count"].get<std::size_t>();
  }
  CHECK(train == n["train"].size());
  CHECK(test == n["test"].size());
}

TEST_CASE("cluster front page") {
  const json c = served().get_json("/api/clusters");
  CHECK(c["n_clusters"] == 20);
  REQUIRE(c["clusters"].size() == 10);
  double previous = 2.0;
  for (const auto& s : c["clusters"]) {
    CHECK(s["representatives"].size() <= 9);
    CHECK(s["representatives"].size() == std::min<std::size_t>(9, s["size"]));
    CHECK(s["mean_suspicion"].get<double>() <= previous);
    previous = s["mean_suspicion"];
    for (const auto& id : s["representatives"]) {
      const json r = served().get_json("/api/instances/" + id.get<std::string>());
      CHECK(r["split"] == "test");
    }
  }
  const std::string top = std::to_string(c["clusters"][0]["cluster_id"].get<std::size_t>());
  const json h = served().get_json("/api/clusters/" + top + "/histogram");
  CHECK(h["subject_kind"] == "cluster");
  check_histogram(h);
  std::size_t train = 0, test = 0;
  for (const auto& bin : h["bins"]) {
    train += bin["train_count"].get<std::size_t>();
    test += bin["test_count"].get<std::size_t>();
  }
  CHECK(train == test);
  CHECK(test == std::min<std::size_t>(50, c["clusters"][0]["size"]));

  CHECK(error_code(served().get("/api/clusters/99/histogram")) == "UnknownCluster");
  CHECK(served().get("/api/clusters/abc/histogram").status == 404);
  CHECK(served().get("/api/clusters", {{"space", "dre"}}).status == 409);
}

TEST_CASE("projection and images") {
  const json p = served().get_json("/api/projection");
  CHECK(p.size() == 300);
  for (const auto& point : p) {
    CHECK(point["x"].is_number());
    CHECK(served().get("/api/instances/" + point["id"].get<std::string>()).status == 200);
  }
  const HttpResponse image = served().get("/images/tr0");
  CHECK(image.status == 200);
  CHECK(image.content_type == "image/png");
  CHECK(image.body == "\x89PNG-bytes");
  CHECK(served().get("/images/tr1").status == 404);
  CHECK(served().get("/api/nothing").status == 404);
}

TEST_CASE("responses are idempotent") {
  for (const char* path : {"/api/dataset", "/api/clusters", "/api/projection",
                           "/api/histogram/focus/te0", "/api/neighbors/sh1"}) {
    CHECK(served().get(path).body == served().get(path).body);
  }
}

TEST_CASE("findings journal") {
  const HttpResponse ok =
      served().post(R"({"description":"bright backgrounds","instance_ids":["sh1","te2"]})");
  REQUIRE(ok.status == 201);
  const json f = json::parse(ok.body);
  CHECK(f["description"] == "bright backgrounds");
  CHECK(f["instance_ids"] == json::array({"sh1", "te2"}));
  CHECK(f["timestamp"].get<std::string>().size() == 20);
  CHECK(served().post(R"({"description":"no ids"})").status == 201);
  CHECK(served().post(R"({"description":""})").status == 400);
  CHECK(served().post("{not json").status == 400);
  CHECK(served().post(R"({"description":"x","instance_ids":["ghost"]})").status == 400);

  std::ifstream journal(served().tmp / "store" / "findings.jsonl");
  std::string line;
  std::vector<json> lines;
  while (std::getline(journal, line)) lines.push_back(json::parse(line));
  REQUIRE(lines.size() >= 2);
  CHECK(lines[lines.size() - 2] == f);
  CHECK(served().service->handle({"DELETE", "/api/dataset", {}, ""}).status == 400);
}

TEST_CASE("missing artifacts are conflicts") {
  TempDir tmp;
  const auto f = testing::random_store(40, 40, 3, 2);
  testing::write_fixture(f, tmp / "source");
  ingest(tmp / "source" / "manifest.json", tmp / "source" / "z.dsem", "z", tmp / "store");
  const Service bare(open_store(tmp / "store"));
  const auto get = [&](const std::string& path) { return bare.handle({"GET", path, {}, ""}); };
  CHECK(get("/api/dataset").status == 200);
  CHECK(get("/api/clusters").status == 409);
  CHECK(get("/api/projection").status == 409);
  CHECK(get("/api/histogram/focus/te50").status == 409);
  CHECK(get("/api/neighbors/te50").status == 200);
  CHECK(json::parse(get("/api/instances/te50").body)["scores"].is_null());

  score_step(tmp / "store", ScoreMethod::kCenterDistance, "z");
  const Service scored(open_store(tmp / "store"));
  CHECK(scored.handle({"GET", "/api/histogram/focus/te50", {}, ""}).status == 200);
  CHECK(scored.handle({"GET", "/api/clusters/0/histogram", {}, ""}).status == 409);
}

TEST_CASE("live transport") {
  TempDir tmp;
  const auto f = testing::gaussian_shift(80, 70, 10);
  testing::prepare_store_dir(f, tmp / "store", 8);
  Service service(open_store(tmp / "store"));
  const int port = service.bind_any("127.0.0.1");
  REQUIRE(port > 0);
  std::thread thread([&] { service.listen_bound(); });

  httplib::Client client("127.0.0.1", port);
  const auto dataset = client.Get("/api/dataset");
  REQUIRE(dataset);
  CHECK(dataset->status == 200);
  CHECK(dataset->body == service.handle({"GET", "/api/dataset", {}, ""}).body);
  const auto page = client.Get("/api/instances?split=train&limit=3&sort=index");
  REQUIRE(page);
  CHECK(json::parse(page->body)["items"][2]["id"] == "tr2");
  const auto missing = client.Get("/api/instances/zzz");
  REQUIRE(missing);
  CHECK(missing->status == 404);
  const auto posted = client.Post("/api/findings", R"({"description":"live"})", "application/json");
  REQUIRE(posted);
  CHECK(posted->status == 201);

  Service other(open_store(tmp / "store"));
  CHECK_THROWS_AS(other.bind("127.0.0.1", port), shiftscope::Error);

  service.stop();
  thread.join();
}
