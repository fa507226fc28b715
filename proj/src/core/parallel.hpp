// Copyright 2026 The EvoNorm Search Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#ifndef EVONORM_CORE_PARALLEL_HPP_
#define EVONORM_CORE_PARALLEL_HPP_

#include <functional>

namespace evonorm {

// Runs body(0..count-1) on up to `workers` threads. Each index runs exactly
// once; the first exception thrown by any body is rethrown after all
// threads finish.
void ParallelFor(int count, int workers, const std::function<void(int)>& body);

// EVONORM_WORKERS when set to a positive integer, otherwise 1.
int DefaultWorkerCount();

// Keeps large tensor buffers on the heap instead of fresh mmap'd pages.
// A no-op outside glibc.
void ConfigureAllocator();

}  // namespace evonorm

#endif  // EVONORM_CORE_PARALLEL_HPP_
