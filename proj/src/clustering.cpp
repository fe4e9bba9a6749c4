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

#include "shiftscope/clustering.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>

#include "csv.hpp"
#include "shiftscope/error.hpp"
#include "shiftscope/neighborhood.hpp"

namespace shiftscope {
namespace {

constexpr double kNoNeighbor = std::numeric_limits<double>::infinity();

// Ward merge cost in centroid form: n_a n_b / (n_a + n_b) * |c_a - c_b|^2.
// Equivalent to the Lance-Williams Ward update on squared distances, without
// the quadratic dissimilarity matrix.
class WardState {
 public:
  WardState(const LatentSpace& space, std::span<const std::size_t> rows)
      : dim_(space.dim()),
        size_(rows.size(), 1),
        active_(rows.size(), true),
        centroid_(rows.size() * space.dim()),
        nn_(rows.size(), 0),
        nn_cost_(rows.size(), kNoNeighbor) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto row = space.row(rows[i]);
      std::copy(row.begin(), row.end(), centroid_.begin() + i * dim_);
    }
    for (std::size_t i = 0; i < rows.size(); ++i) refresh(i);
  }

  double cost(std::size_t a, std::size_t b) const {
    const double* ca = centroid_.data() + a * dim_;
    const double* cb = centroid_.data() + b * dim_;
    double sq = 0.0;
    for (std::size_t k = 0; k < dim_; ++k) {
      const double diff = ca[k] - cb[k];
      sq += diff * diff;
    }
    const auto na = static_cast<double>(size_[a]);
    const auto nb = static_cast<double>(size_[b]);
    return na * nb / (na + nb) * sq;
  }

  // Nearest active partner with a larger id.
  void refresh(std::size_t i) {
    nn_cost_[i] = kNoNeighbor;
    for (std::size_t j = i + 1; j < active_.size(); ++j) {
      if (!active_[j]) continue;
      const double c = cost(i, j);
      if (c < nn_cost_[i]) {
        nn_cost_[i] = c;
        nn_[i] = j;
      }
    }
  }

  void merge_next() {
    std::size_t best = active_.size();
    for (std::size_t i = 0; i < active_.size(); ++i) {
      if (active_[i] && nn_cost_[i] != kNoNeighbor &&
          (best == active_.size() || nn_cost_[i] < nn_cost_[best])) {
        best = i;
      }
    }
    const std::size_t i = best;
    const std::size_t j = nn_[i];

    const auto ni = static_cast<double>(size_[i]);
    const auto nj = static_cast<double>(size_[j]);
    double* ci = centroid_.data() + i * dim_;
    const double* cj = centroid_.data() + j * dim_;
    for (std::size_t k = 0; k < dim_; ++k) ci[k] = (ni * ci[k] + nj * cj[k]) / (ni + nj);
    size_[i] += size_[j];
    active_[j] = false;
    parent_.push_back({j, i});

    for (std::size_t k = 0; k < j; ++k) {
      if (!active_[k] || k == i) continue;
      if (nn_[k] == i || nn_[k] == j) {
        refresh(k);
      } else if (k < i) {
        const double c = cost(k, i);
        if (c < nn_cost_[k] || (c == nn_cost_[k] && i < nn_[k])) {
          nn_cost_[k] = c;
          nn_[k] = i;
        }
      }
    }
    refresh(i);
  }

  // Cluster id (smallest member position) of every row.
  std::vector<std::size_t> roots() const {
    std::vector<std::size_t> root(active_.size());
    std::iota(root.begin(), root.end(), std::size_t{0});
    // Merges only ever fold a larger id into a smaller one, so replaying them
    // backwards resolves each row's final cluster.
    for (auto it = parent_.rbegin(); it != parent_.rend(); ++it) {
      root[it->first] = root[it->second];
    }
    return root;
  }

 private:
  std::size_t dim_;
  std::vector<std::size_t> size_;
  std::vector<bool> active_;
  std::vector<double> centroid_;
  std::vector<std::size_t> nn_;
  std::vector<double> nn_cost_;
  std::vector<std::pair<std::size_t, std::size_t>> parent_;  // (absorbed, into)
};

}  // namespace

std::vector<std::size_t> ward_labels(const LatentSpace& space,
                                     std::span<const std::size_t> rows,
                                     std::size_t n_clusters) {
  if (n_clusters < 1) fail(ErrorCode::kInvalidArgument, "n_clusters must be >= 1");
  if (rows.size() < n_clusters) {
    fail(ErrorCode::kTooFewPoints,
         std::to_string(rows.size()) + " points for " +
             std::to_string(n_clusters) + " clusters");
  }
  WardState state(space, rows);
  for (std::size_t remaining = rows.size(); remaining > n_clusters; --remaining) {
    state.merge_next();
  }
  const std::vector<std::size_t> root = state.roots();
  std::map<std::size_t, std::size_t> label_of;
  std::vector<std::size_t> labels(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto [it, inserted] = label_of.emplace(root[i], label_of.size());
    labels[i] = it->second;
  }
  return labels;
}

ClusterAssignment make_assignment(const AnalysisStore& store,
                                  const std::string& space_name,
                                  std::vector<std::size_t> members_order,
                                  std::vector<std::size_t> labels) {
  const LatentSpace& space = store.space(space_name);
  if (members_order.size() != labels.size()) {
    fail(ErrorCode::kInvalidArgument, "labels do not match members");
  }
  ClusterAssignment out;
  out.space_name = space_name;
  const std::size_t k =
      labels.empty() ? 0 : *std::ranges::max_element(labels) + 1;
  out.members.resize(k);
  for (std::size_t p = 0; p < labels.size(); ++p) {
    out.members[labels[p]].push_back(members_order[p]);
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (out.members[c].empty()) {
      fail(ErrorCode::kParseError, "cluster " + std::to_string(c) + " is empty");
    }
    std::ranges::sort(out.members[c]);
    out.centroids.push_back(centroid(space, out.members[c]));
  }
  out.n_clusters = k;
  out.members_order = std::move(members_order);
  out.labels = std::move(labels);
  return out;
}

ClusterAssignment ward_cluster(const AnalysisStore& store,
                               const std::string& space_name,
                               std::size_t n_clusters) {
  const LatentSpace& space = store.space(space_name);
  const auto& test = store.test_indices();
  std::vector<std::size_t> labels = ward_labels(space, test, n_clusters);
  return make_assignment(store, space_name, test, std::move(labels));
}

void sort_by_suspicion(std::vector<std::size_t>& indices,
                       const ScoreTable& scores) {
  std::vector<std::pair<double, std::size_t>> keyed;
  keyed.reserve(indices.size());
  for (const std::size_t i : indices) keyed.emplace_back(scores.suspicion(i), i);
  std::ranges::sort(keyed, [](const auto& a, const auto& b) {
    return a.first > b.first || (a.first == b.first && a.second < b.second);
  });
  for (std::size_t k = 0; k < keyed.size(); ++k) indices[k] = keyed[k].second;
}

std::vector<ClusterSummary> rank_clusters(const ClusterAssignment& assignment,
                                          const ScoreTable& scores,
                                          std::size_t top_k) {
  std::vector<ClusterSummary> summaries;
  summaries.reserve(assignment.cluster_count());
  for (std::size_t c = 0; c < assignment.cluster_count(); ++c) {
    ClusterSummary summary;
    summary.cluster_id = c;
    std::vector<std::size_t> members = assignment.members[c];
    summary.size = members.size();
    double sum = 0.0;
    for (const std::size_t i : members) sum += scores.suspicion(i);
    summary.mean_suspicion = sum / static_cast<double>(members.size());
    sort_by_suspicion(members, scores);
    members.resize(std::min(members.size(), kRepresentativeCount));
    summary.representatives = std::move(members);
    summaries.push_back(std::move(summary));
  }
  std::ranges::stable_sort(summaries, [](const auto& a, const auto& b) {
    return a.mean_suspicion > b.mean_suspicion;
  });
  summaries.resize(std::min(summaries.size(), top_k));
  return summaries;
}

ContrastSet cluster_contrast_set(const AnalysisStore& store,
                                 const ClusterAssignment& assignment,
                                 std::size_t cluster_id,
                                 const ScoreTable& scores, std::size_t cap) {
  if (cluster_id >= assignment.cluster_count()) {
    fail(ErrorCode::kUnknownCluster, "unknown cluster " + std::to_string(cluster_id));
  }
  ContrastSet out;
  out.test = assignment.members[cluster_id];
  sort_by_suspicion(out.test, scores);
  // Both sides hold the same count.
  out.test.resize(std::min({out.test.size(), cap, store.train_indices().size()}));

  const LatentSpace& space = store.space(assignment.space_name);
  const auto nearest = nearest_to_point(store, space, Split::kTrain,
                                        assignment.centroids[cluster_id],
                                        out.test.size());
  for (const Neighbor& n : nearest) out.train.push_back(n.index);
  sort_by_suspicion(out.train, scores);
  return out;
}

void save_clusters(const std::filesystem::path& path,
                   const AnalysisStore& store,
                   const ClusterAssignment& assignment) {
  std::string out = "id,cluster\n";
  for (std::size_t p = 0; p < assignment.members_order.size(); ++p) {
    out += csv::quote(store.record(assignment.members_order[p]).id);
    out += ',';
    out += std::to_string(assignment.labels[p]);
    out += '\n';
  }
  csv::write_file(path, out);
}

ClusterAssignment load_clusters(const std::filesystem::path& path,
                                const AnalysisStore& store,
                                const std::string& space_name) {
  const auto table = csv::read_table(path, "id,cluster", ErrorCode::kMissingArtifact);
  std::vector<std::size_t> members;
  std::vector<std::size_t> labels;
  for (const auto& f : table) {
    const std::size_t index = store.index_of(f[0]);
    if (store.record(index).split != Split::kTest) {
      fail(ErrorCode::kParseError, "clustered instance '" + f[0] + "' is not test");
    }
    const double label = csv::parse_number(f[1], path.string());
    if (label < 0 || label != static_cast<double>(static_cast<std::size_t>(label))) {
      fail(ErrorCode::kParseError, "bad cluster label '" + f[1] + "'");
    }
    members.push_back(index);
    labels.push_back(static_cast<std::size_t>(label));
  }
  if (members.size() != store.test_indices().size()) {
    fail(ErrorCode::kCoverageGap, "clusters do not cover the test split");
  }
  return make_assignment(store, space_name, std::move(members), std::move(labels));
}

}  // namespace shiftscope
