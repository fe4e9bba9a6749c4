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

#include "shiftscope/histogram.hpp"

#include <algorithm>
#include <cmath>

#include "shiftscope/clustering.hpp"
#include "shiftscope/error.hpp"

namespace shiftscope {

std::size_t bin_of(double suspicion, std::size_t n_bins) {
  if (n_bins < 1) fail(ErrorCode::kInvalidArgument, "need at least one bin");
  if (!(suspicion >= 0.0 && suspicion <= 1.0)) {
    fail(ErrorCode::kOutOfRange, "suspicion " + std::to_string(suspicion) +
                                     " outside [0, 1]");
  }
  const auto n = static_cast<double>(n_bins);
  auto bin = std::min(static_cast<std::size_t>(std::floor(suspicion * n)),
                      n_bins - 1);
  // Rounding in the product can disagree with the edges b / n_bins.
  if (bin > 0 && suspicion < static_cast<double>(bin) / n) --bin;
  if (bin + 1 < n_bins && suspicion >= static_cast<double>(bin + 1) / n) ++bin;
  return bin;
}

SideBySideHistogram build_side_by_side(std::span<const std::size_t> train,
                                       std::span<const std::size_t> test,
                                       const ScoreTable& scores,
                                       std::string subject,
                                       std::size_t n_bins) {
  if (n_bins < 1) fail(ErrorCode::kInvalidArgument, "need at least one bin");
  SideBySideHistogram out;
  out.subject = std::move(subject);
  // Built lowest-first, reversed at the end.
  out.bins.resize(n_bins);
  for (std::size_t b = 0; b < n_bins; ++b) {
    out.bins[b].lo = static_cast<double>(b) / static_cast<double>(n_bins);
    out.bins[b].hi = static_cast<double>(b + 1) / static_cast<double>(n_bins);
  }
  for (const std::size_t i : train) {
    out.bins[bin_of(scores.suspicion(i), n_bins)].train.push_back(i);
  }
  for (const std::size_t i : test) {
    out.bins[bin_of(scores.suspicion(i), n_bins)].test.push_back(i);
  }
  for (auto& bin : out.bins) {
    sort_by_suspicion(bin.train, scores);
    sort_by_suspicion(bin.test, scores);
  }
  std::ranges::reverse(out.bins);
  return out;
}

}  // namespace shiftscope
