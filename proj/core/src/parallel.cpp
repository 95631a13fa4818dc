#include "gcalc/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <thread>
#include <vector>

namespace gcalc {

namespace {

int read_env_threads() {
    const char* raw = std::getenv("GCALC_THREADS");
    if (!raw) return 1;
    int n = std::atoi(raw);
    return n >= 1 ? n : 1;
}

std::atomic<int>& thread_cap() {
    static std::atomic<int> cap{read_env_threads()};
    return cap;
}

constexpr std::size_t kMinChunk = 4096;

}  // namespace

int max_threads() { return thread_cap().load(std::memory_order_relaxed); }

void set_max_threads(int n) { thread_cap().store(n >= 1 ? n : 1, std::memory_order_relaxed); }

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn) {
    if (n == 0) return;
    const int cap = max_threads();
    std::size_t workers = static_cast<std::size_t>(cap);
    if (workers > 1 && n / workers < kMinChunk) workers = n / kMinChunk;
    if (workers <= 1) {
        fn(0, n);
        return;
    }

    const std::size_t chunk = (n + workers - 1) / workers;
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    std::exception_ptr first_error;
    std::atomic_flag error_claimed = ATOMIC_FLAG_INIT;

    auto run = [&](std::size_t begin, std::size_t end) {
        try {
            fn(begin, end);
        } catch (...) {
            if (!error_claimed.test_and_set()) first_error = std::current_exception();
        }
    };

    for (std::size_t w = 1; w < workers; ++w) {
        std::size_t begin = w * chunk;
        if (begin >= n) break;
        std::size_t end = begin + chunk < n ? begin + chunk : n;
        pool.emplace_back(run, begin, end);
    }
    run(0, chunk < n ? chunk : n);
    for (auto& t : pool) t.join();

    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace gcalc
