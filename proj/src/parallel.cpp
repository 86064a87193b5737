#include "salem2d/parallel.hpp"

#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace salem2d {

namespace {
std::atomic<int> g_threads{0};
}

void set_thread_count(int n) { g_threads.store(n < 0 ? 0 : n); }

int thread_count() {
    int n = g_threads.load();
    if (n == 0) {
        n = int(std::thread::hardware_concurrency());
        if (n == 0) n = 1;
    }
    return n;
}

void parallel_for(std::int64_t begin, std::int64_t end,
                  const std::function<void(std::int64_t, std::int64_t)>& body,
                  std::int64_t min_chunk) {
    const std::int64_t n = end - begin;
    if (n <= 0) return;
    const int workers = thread_count();
    if (workers <= 1 || n <= min_chunk) {
        body(begin, end);
        return;
    }
    const std::int64_t chunks = std::max<std::int64_t>(1, std::min<std::int64_t>(4 * workers, (n + min_chunk - 1) / min_chunk));
    const std::int64_t step = (n + chunks - 1) / chunks;
    std::atomic<std::int64_t> next{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    auto run = [&] {
        while (true) {
            const std::int64_t c = next.fetch_add(1);
            if (c >= chunks || failed.load()) return;
            const std::int64_t lo = begin + c * step;
            const std::int64_t hi = std::min(end, lo + step);
            try {
                body(lo, hi);
            } catch (...) {
                if (!failed.exchange(true)) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    for (int i = 1; i < workers; ++i) pool.emplace_back(run);
    run();
    for (auto& t : pool) t.join();
    if (failed.load()) std::rethrow_exception(error);
}

} // namespace salem2d
