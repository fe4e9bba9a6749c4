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

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "test_support.hpp"

using shiftscope::testing::TempDir;

namespace {

int run(const std::string& args, const TempDir& tmp) {
  const std::string cmd = std::string(SHIFTSCOPE_CLI) + " " + args + " >" +
                          (tmp / "stdout.txt").string() + " 2>" + (tmp / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Gaussian-shift fixture with a "shifted" attribute on every record.
shiftscope::testing::Fixture labeled_shift() {
  auto f = shiftscope::testing::gaussian_shift(1000, 900, 100);
  for (std::size_t i = 0; i < f.records.size(); ++i) {
    f.records[i].attributes["shifted"] = f.shifted[i];
  }
  return f;
}

}  // namespace

TEST_CASE("argument errors") {
  TempDir tmp;
  CHECK(run("", tmp) == 2);
  CHECK(run("frobnicate --x 1", tmp) == 28);
  CHECK(slurp(tmp / "stderr.txt").find("frobnicate") != std::string::npos);
  CHECK(run("train --store x", tmp) == 2);
  CHECK(run("score --store x --space z --method best", tmp) == 2);
  CHECK(run("--help", tmp) == 0);
  CHECK(run("--version", tmp) == 0);
}

TEST_CASE("full pipeline") {
  TempDir tmp;
  const auto f = labeled_shift();
  shiftscope::testing::write_fixture(f, tmp / "source");
  const std::string store = (tmp / "store").string();
  const std::string ingest = "ingest --manifest " + (tmp / "source" / "manifest.json").string() +
                             " --embeddings " + (tmp / "source" / "z.dsem").string() +
                             " --space z --out " + store;
  REQUIRE(run(ingest, tmp) == 0);
  CHECK(run(ingest, tmp) == 0);

  CHECK(run("score --store " + store + " --method density-ratio --space z", tmp) == 18);
  CHECK(slurp(tmp / "stderr.txt").find("MissingModel") != std::string::npos);

  const std::string train = "train --store " + store + " --space z --seed 5";
  REQUIRE(run(train, tmp) == 0);
  CHECK(std::filesystem::exists(tmp / "store" / "model.json"));
  CHECK(std::filesystem::exists(tmp / "store" / "spaces" / "dre.dsem"));
  const std::string model = slurp(tmp / "store" / "model.json");
  REQUIRE(run(train, tmp) == 0);
  CHECK(slurp(tmp / "store" / "model.json") == model);

  REQUIRE(run("score --store " + store + " --method density-ratio --space z", tmp) == 0);
  const std::string scores = slurp(tmp / "store" / "scores.csv");
  REQUIRE(run("score --store " + store + " --method density-ratio --space z", tmp) == 0);
  CHECK(slurp(tmp / "store" / "scores.csv") == scores);
  CHECK(run("score --store " + store + " --method center --space q", tmp) == 15);

  REQUIRE(run("cluster --store " + store + " --space z --k 30", tmp) == 0);
  CHECK(slurp(tmp / "store" / "clusters.csv").rfind("id,cluster\n", 0) == 0);
  REQUIRE(run("project --store " + store + " --space dre --method pca", tmp) == 0);
  const std::string projection = slurp(tmp / "store" / "projection.csv");
  std::ofstream(tmp / "copy.csv") << projection;
  REQUIRE(run("project --store " + store + " --import " + (tmp / "copy.csv").string(), tmp) == 0);
  CHECK(slurp(tmp / "store" / "projection.csv") == projection);
  CHECK(run("project --store " + store, tmp) == 2);

  const std::string out = (tmp / "bench.csv").string();
  REQUIRE(run("bench --store " + store + " --spaces z --seed 2 --out " + out, tmp) == 0);
  std::istringstream report(slurp(out));
  std::string line;
  std::getline(report, line);
  CHECK(line == "method,space,attribute,polarity,auroc");
  bool found = false;
  while (std::getline(report, line)) {
    if (line.rfind("density_ratio,z,shifted,absent,", 0) == 0) {
      found = true;
      CHECK(std::stod(line.substr(line.rfind(',') + 1)) >= 0.95);
    }
  }
  CHECK(found);
}

TEST_CASE("serve reports a missing store") {
  TempDir tmp;
  CHECK(run("serve --store " + (tmp / "absent").string() + " --port 1", tmp) != 0);
}
