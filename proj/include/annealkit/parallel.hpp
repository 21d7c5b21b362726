// Copyright 2026 The Annealkit Authors
//
//    Licensed under the Apache License, Version 2.0 (the "License");
//    you may not use this file except in compliance with the License.
//    You may obtain a copy of the License at
//
//        http://www.apache.org/licenses/LICENSE-2.0
//
//    Unless required by applicable law or agreed to in writing, software
//    distributed under the License is distributed on an "AS IS" BASIS,
//    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//    See the License for the specific language governing permissions and
//    limitations under the License.

#pragma once

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace annealkit {

// Worker count used by parallel_for when the caller passes 0.
// ANNEALKIT_WORKERS overrides hardware_concurrency.
inline int default_workers() {
    if (const char* env = std::getenv("ANNEALKIT_WORKERS")) {
        int n = std::atoi(env);
        if (n >= 1) return n;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
}

// Runs fn(i) for i in [0, n).  Each index is processed exactly once and the
// caller's output slots are indexed by i, so results are identical for any
// worker count.
template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
    if (workers <= 0) workers = default_workers();
    if (workers == 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::size_t nthreads = std::min<std::size_t>(workers, n);
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (std::size_t t = 0; t < nthreads; ++t) {
        pool.emplace_back([t, n, nthreads, &fn] {
            for (std::size_t i = t; i < n; i += nthreads) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace annealkit
