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

#ifndef BSM_PARALLEL_H_
#define BSM_PARALLEL_H_

#include <cstddef>
#include <functional>

namespace bsm {

// Process-wide worker count used when a call passes threads = 0.
void set_default_threads(int threads);
int default_threads();

// Runs body(i) for i in [0, count). Iterations must write disjoint outputs;
// results are then independent of scheduling. If any iteration throws, the
// exception from the lowest failing index is rethrown after all workers
// finish.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body, int threads = 0);

}  // namespace bsm

#endif  // BSM_PARALLEL_H_
