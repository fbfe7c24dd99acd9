#pragma once

#include <algorithm>
#include <cstddef>
#include <future>
#include <thread>
#include <vector>

namespace disempower {

/// Calls fn(i) for i in [0, count) across hardware threads. Each index is
/// visited exactly once; callers write results by index. The first exception
/// thrown by any worker is rethrown after all workers finish.
template <class Fn>
void parallel_for(std::size_t count, Fn&& fn) {
    const std::size_t workers =
        std::min<std::size_t>(count, std::max(1u, std::thread::hardware_concurrency()));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::future<void>> futures;
    futures.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        futures.push_back(std::async(std::launch::async, [&fn, w, workers, count] {
            for (std::size_t i = w; i < count; i += workers) fn(i);
        }));
    }
    for (auto& f : futures) f.wait();
    for (auto& f : futures) f.get();
}

}  // namespace disempower
