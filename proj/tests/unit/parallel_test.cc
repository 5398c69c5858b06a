// Copyright 2026 The BSM Toolkit Authors
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

#include "bsm/parallel.h"

#include <gtest/gtest.h>

#include <atomic>
#include <stdexcept>
#include <vector>

namespace bsm {
namespace {

TEST(ParallelFor, VisitsEveryIndexOnce) {
  for (int threads : {1, 2, 4}) {
    std::vector<int> hits(1000, 0);
    parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; }, threads);
    for (int h : hits) EXPECT_EQ(h, 1);
  }
  int calls = 0;
  parallel_for(0, [&](std::size_t) { ++calls; });
  EXPECT_EQ(calls, 0);
}

TEST(ParallelFor, RethrowsLowestFailingIndex) {
  std::atomic<int> completed{0};
  try {
    parallel_for(
        64,
        [&](std::size_t i) {
          if (i == 40 || i == 7) throw std::runtime_error("index " + std::to_string(i));
          ++completed;
        },
        4);
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "index 7");
  }
  EXPECT_EQ(completed.load(), 62);
}

TEST(ParallelFor, DefaultThreadCountIsConfigurable) {
  const int before = default_threads();
  set_default_threads(3);
  EXPECT_EQ(default_threads(), 3);
  set_default_threads(before);
  EXPECT_GE(default_threads(), 1);
}

}  // namespace
}  // namespace bsm
