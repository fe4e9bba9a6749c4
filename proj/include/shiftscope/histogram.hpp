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

#ifndef SHIFTSCOPE_HISTOGRAM_HPP_
#define SHIFTSCOPE_HISTOGRAM_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "shiftscope/scoring.hpp"

namespace shiftscope {

inline constexpr std::size_t kDefaultBins = 5;

// floor(suspicion * n_bins), with 1.0 clamped into the top bin.
std::size_t bin_of(double suspicion, std::size_t n_bins = kDefaultBins);

struct HistogramBin {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<std::size_t> train;  // descending suspicion
  std::vector<std::size_t> test;   // descending suspicion
};

// Train on the left, test on the right, highest-suspicion bin first. The
// subject is a focal instance id or a cluster id rendered as text.
struct SideBySideHistogram {
  std::string subject;
  std::vector<HistogramBin> bins;
};

SideBySideHistogram build_side_by_side(std::span<const std::size_t> train,
                                       std::span<const std::size_t> test,
                                       const ScoreTable& scores,
                                       std::string subject,
                                       std::size_t n_bins = kDefaultBins);

}  // namespace shiftscope

#endif  // SHIFTSCOPE_HISTOGRAM_HPP_
