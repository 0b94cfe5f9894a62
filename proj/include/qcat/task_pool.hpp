// task_pool.hpp — bounded worker pool for independent sweep cells
#pragma once

#include <atomic>
#include <functional>
#include <thread>
#include <vector>

namespace qcat {

extern "C" void openblas_set_num_threads(int);

// Pin BLAS/LAPACK to one thread: sweep cells provide the parallelism, and a
// fixed thread count keeps reductions deterministic.
inline void pin_blas_threads() {
    static const bool once = [] {
        openblas_set_num_threads(1);
        return true;
    }();
    (void)once;
}

// Run all tasks on up to `threads` workers. Tasks must not throw (sweep cells
// record their own errors); results land in caller-owned slots, so output
// ordering never depends on scheduling.
inline void run_tasks(std::vector<std::function<void()>>& tasks, int threads) {
    pin_blas_threads();
    if (threads <= 0) threads = int(std::thread::hardware_concurrency());
    if (threads <= 1 || tasks.size() <= 1) {
        for (auto& t : tasks) t();
        return;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            tasks[i]();
        }
    };
    std::vector<std::thread> crew;
    int n_workers = std::min<int>(threads, int(tasks.size()));
    crew.reserve(n_workers);
    for (int i = 0; i < n_workers; ++i) crew.emplace_back(worker);
    for (auto& t : crew) t.join();
}

// Adapter with the signature sigma_curve / gamma_curve expect.
inline std::function<void(std::vector<std::function<void()>>&)> pool_runner(int threads) {
    return [threads](std::vector<std::function<void()>>& tasks) { run_tasks(tasks, threads); };
}

} // namespace qcat
