// SPDX-License-Identifier: Apache-2.0
//
// islslp: low-range-sidelobe symbol-level precoding for MIMO-OFDM ISAC
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace islslp
{

// Worker count: hardware concurrency, capped by ISL_SLP_THREADS when set to a positive integer.
inline int worker_count()
{
    int n = int(std::max(1u, std::thread::hardware_concurrency()));
    if (const char *env = std::getenv("ISL_SLP_THREADS"))
    {
        char *end = nullptr;
        const long cap = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && cap > 0)
            n = std::min<long>(n, cap);
    }
    return n;
}

// Runs body(i) for i in [0, count). Each index is processed exactly once; callers write results
// into per-index slots so the outcome does not depend on scheduling. The first exception is rethrown.
template <class Body>
void parallel_for(int count, Body &&body, int workers = worker_count())
{
    workers = std::max(1, std::min(workers, count));
    if (workers <= 1)
    {
        for (int i = 0; i < count; ++i)
            body(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto run = [&] {
        for (int i = next++; i < count; i = next++)
        {
            try
            {
                body(i);
            }
            catch (...)
            {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error)
                    error = std::current_exception();
                next = count;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(std::size_t(workers - 1));
    for (int w = 1; w < workers; ++w)
        pool.emplace_back(run);
    run();
    for (auto &t : pool)
        t.join();
    if (error)
        std::rethrow_exception(error);
}

} // namespace islslp
