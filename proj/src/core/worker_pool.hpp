// Copyright 2026 The ontoseg Authors
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

#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

#include "core/error.hpp"

namespace ontoseg {

/// Runs fn(i) for every i in [0, count). Items are claimed from a shared
/// counter, so scheduling varies between runs; callers must write results
/// into per-index slots and merge in index order to stay deterministic.
/// An exception escaping fn stops nothing else; the one with the lowest
/// index is rethrown after all items finish.
inline void parallel_for(std::size_t count, int workers,
                         const std::function<void(std::size_t)>& fn) {
    if (workers < 1) throw argument_error("worker count must be at least 1");
    if (count == 0) return;

    std::vector<std::exception_ptr> errors(count);
    if (workers == 1 || count == 1) {
        for (std::size_t i = 0; i < count; ++i) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    } else {
        std::atomic<std::size_t> next{0};
        auto body = [&] {
            while (true) {
                std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    fn(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        };
        std::vector<std::thread> threads;
        const std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(workers), count);
        threads.reserve(n);
        for (std::size_t t = 0; t < n; ++t) threads.emplace_back(body);
        for (std::thread& t : threads) t.join();
    }
    for (const std::exception_ptr& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace ontoseg
