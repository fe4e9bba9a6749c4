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

#include "shiftscope/projection.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "csv.hpp"
#include "shiftscope/error.hpp"
#include "shiftscope/rng.hpp"

namespace shiftscope {
namespace {

constexpr std::uint64_t kPowerSeed = 0x5EED5EEDULL;

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

void normalize(std::vector<double>& v) {
  const double norm = std::sqrt(dot(v, v));
  for (double& x : v) x /= norm;
}

void remove_component(std::vector<double>& v, std::span<const double> unit) {
  const double c = dot(v, unit);
  for (std::size_t k = 0; k < v.size(); ++k) v[k] -= c * unit[k];
}

void fix_sign(std::vector<double>& v) {
  std::size_t arg = 0;
  for (std::size_t k = 1; k < v.size(); ++k) {
    if (std::abs(v[k]) > std::abs(v[arg])) arg = k;
  }
  if (v[arg] < 0) {
    for (double& x : v) x = -x;
  }
}

// Centered data matrix with covariance products C v = X^T X v / n.
class Centered {
 public:
  Centered(const LatentSpace& space, std::span<const std::size_t> rows)
      : dim_(space.dim()), n_(rows.size()), mean_(space.dim(), 0.0) {
    data_.reserve(n_ * dim_);
    for (const std::size_t r : rows) {
      const auto row = space.row(r);
      for (std::size_t k = 0; k < dim_; ++k) mean_[k] += row[k];
    }
    for (double& m : mean_) m /= static_cast<double>(n_);
    for (const std::size_t r : rows) {
      const auto row = space.row(r);
      for (std::size_t k = 0; k < dim_; ++k) data_.push_back(row[k] - mean_[k]);
    }
  }

  std::vector<double> covariance_times(std::span<const double> v) const {
    std::vector<double> out(dim_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
      const std::span<const double> x(data_.data() + i * dim_, dim_);
      const double proj = dot(x, v);
      for (std::size_t k = 0; k < dim_; ++k) out[k] += proj * x[k];
    }
    for (double& x : out) x /= static_cast<double>(n_);
    return out;
  }

  double total_variance() const {
    return dot(data_, data_) / static_cast<double>(n_);
  }

  const std::vector<double>& mean() const { return mean_; }

 private:
  std::size_t dim_;
  std::size_t n_;
  std::vector<double> mean_;
  std::vector<double> data_;
};

// Leading eigenvector of the covariance restricted to the complement of
// `deflate`, or an arbitrary unit vector in that complement when the
// restricted covariance vanishes.
std::vector<double> leading_component(const Centered& data, std::size_t dim,
                                      const std::vector<double>* deflate,
                                      const PcaOptions& options, Rng& rng) {
  std::vector<double> v(dim);
  for (double& x : v) x = rng.uniform(-1.0, 1.0);
  if (deflate) remove_component(v, *deflate);
  normalize(v);
  for (int it = 0; it < options.max_iterations; ++it) {
    std::vector<double> w = data.covariance_times(v);
    if (deflate) remove_component(w, *deflate);
    const double norm = std::sqrt(dot(w, w));
    if (norm <= 1e-300) break;
    for (double& x : w) x /= norm;
    double delta = 0.0;
    for (std::size_t k = 0; k < dim; ++k) delta += (w[k] - v[k]) * (w[k] - v[k]);
    v = std::move(w);
    if (std::sqrt(delta) < options.tolerance) break;
  }
  if (deflate) {
    // Re-orthogonalize; also rescues the case where the complement carries no
    // variance and v drifted.
    remove_component(v, *deflate);
    if (dot(v, v) < 1e-20) {
      std::size_t arg = 0;
      for (std::size_t k = 1; k < dim; ++k) {
        if (std::abs((*deflate)[k]) < std::abs((*deflate)[arg])) arg = k;
      }
      v.assign(dim, 0.0);
      v[arg] = 1.0;
      remove_component(v, *deflate);
    }
    normalize(v);
  }
  fix_sign(v);
  return v;
}

}  // namespace

Projector2D fit_pca2(const LatentSpace& space, std::span<const std::size_t> rows,
                     const PcaOptions& options) {
  if (rows.size() < 3) fail(ErrorCode::kTooFewPoints, "PCA needs at least 3 points");
  if (space.dim() < 2) fail(ErrorCode::kDimensionMismatch, "PCA needs at least 2 dims");
  const Centered data(space, rows);
  if (data.total_variance() <= 0.0) {
    fail(ErrorCode::kDegenerateVariance, "all points are identical");
  }
  Rng rng(kPowerSeed);
  Projector2D out;
  out.method = ProjectionMethod::kPca;
  out.mean = data.mean();
  out.components[0] = leading_component(data, space.dim(), nullptr, options, rng);
  out.components[1] =
      leading_component(data, space.dim(), &out.components[0], options, rng);
  for (std::size_t c = 0; c < 2; ++c) {
    out.explained_variance[c] =
        dot(out.components[c], data.covariance_times(out.components[c]));
  }
  return out;
}

std::array<double, 2> project2(const Projector2D& projector,
                               std::span<const float> point) {
  if (point.size() != projector.mean.size()) {
    fail(ErrorCode::kDimensionMismatch, "point dim does not match projector");
  }
  std::array<double, 2> out{};
  for (std::size_t c = 0; c < 2; ++c) {
    double s = 0.0;
    for (std::size_t k = 0; k < point.size(); ++k) {
      s += (static_cast<double>(point[k]) - projector.mean[k]) *
           projector.components[c][k];
    }
    out[c] = s;
  }
  return out;
}

ProjectionTable project_test_split(const AnalysisStore& store,
                                   const std::string& space_name) {
  const LatentSpace& space = store.space(space_name);
  const Projector2D projector = fit_pca2(space, store.test_indices());
  ProjectionTable table;
  for (const std::size_t i : store.test_indices()) {
    const auto xy = project2(projector, space.row(i));
    table.push_back({i, xy[0], xy[1]});
  }
  return table;
}

void save_projection(const std::filesystem::path& path,
                     const AnalysisStore& store, const ProjectionTable& table) {
  std::string out = "id,x,y\n";
  for (const ProjectedPoint& p : table) {
    out += csv::quote(store.record(p.index).id) + ',' + csv::number(p.x) + ',' +
           csv::number(p.y) + '\n';
  }
  csv::write_file(path, out);
}

ProjectionTable load_external_projection(const std::filesystem::path& path,
                                         const AnalysisStore& store) {
  const auto rows = csv::read_table(path, "id,x,y");
  std::map<std::size_t, std::array<double, 2>> by_index;
  const std::string where = path.string();
  for (const auto& f : rows) {
    const auto index = store.find(f[0]);
    if (!index || store.record(*index).split != Split::kTest) {
      fail(ErrorCode::kParseError, where + ": '" + f[0] + "' is not a test instance");
    }
    const double x = csv::parse_number(f[1], where);
    const double y = csv::parse_number(f[2], where);
    if (!std::isfinite(x) || !std::isfinite(y)) {
      fail(ErrorCode::kNonFiniteValue, where + ": non-finite coordinate");
    }
    if (!by_index.emplace(*index, std::array{x, y}).second) {
      fail(ErrorCode::kDuplicateId, where + ": '" + f[0] + "' listed twice");
    }
  }
  ProjectionTable table;
  for (const std::size_t i : store.test_indices()) {
    const auto it = by_index.find(i);
    if (it == by_index.end()) {
      fail(ErrorCode::kCoverageGap,
           where + ": no coordinates for '" + store.record(i).id + "'");
    }
    table.push_back({i, it->second[0], it->second[1]});
  }
  return table;
}

}  // namespace shiftscope
