// dcm - dynamic channel map built on a hybrid ray-tracing / stochastic channel model
// Copyright (C) 2026 The dcm authors
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

#ifndef DCM_PARALLEL_HPP
#define DCM_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace dcm
{
    /// Worker count from DCM_THREADS (0 or unset = hardware concurrency).
    inline unsigned worker_count()
    {
        unsigned n = 0;
        if (const char *env = std::getenv("DCM_THREADS"))
            n = unsigned(std::strtoul(env, nullptr, 10));
        if (n == 0)
            n = std::max(1u, std::thread::hardware_concurrency());
        return n;
    }

    /// Runs fn(i) for i in [0, n). Callers write results by index so the outcome does not depend on
    /// the worker count. The exception of the lowest failing index is rethrown.
    template <typename Fn>
    void parallel_for(std::size_t n, Fn &&fn)
    {
        const std::size_t workers = std::min<std::size_t>(worker_count(), n);
        if (workers <= 1)
        {
            for (std::size_t i = 0; i < n; ++i)
                fn(i);
            return;
        }
        std::atomic<std::size_t> next{0};
        std::mutex err_mutex;
        std::size_t err_index = n;
        std::exception_ptr err;
        auto body = [&]
        {
            for (;;)
            {
                const std::size_t i = next.fetch_add(1);
                if (i >= n)
                    return;
                try
                {
                    fn(i);
                }
                catch (...)
                {
                    std::lock_guard lock(err_mutex);
                    if (i < err_index)
                    {
                        err_index = i;
                        err = std::current_exception();
                    }
                }
            }
        };
        std::vector<std::thread> pool;
        for (std::size_t w = 1; w < workers; ++w)
            pool.emplace_back(body);
        body();
        for (auto &t : pool)
            t.join();
        if (err)
            std::rethrow_exception(err);
    }
}

#endif
