#include "holder/util.hpp"

#include <atomic>
#include <charconv>
#include <cstdio>

namespace holder {

std::string hex16(uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return std::string(buf);
}

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

void parallel_for_chunks(size_t n, int threads,
                         const std::function<void(size_t, size_t, size_t)>& fn) {
    if (n == 0) return;
    size_t chunks = std::min(n, k_chunk_count);
    auto run_chunk = [&](size_t c) {
        size_t begin = n * c / chunks;
        size_t end = n * (c + 1) / chunks;
        if (begin < end) fn(c, begin, end);
    };
    if (threads <= 1) {
        for (size_t c = 0; c < chunks; ++c) run_chunk(c);
        return;
    }
    std::vector<std::thread> pool;
    std::atomic<size_t> next{0};
    size_t workers = std::min<size_t>(static_cast<size_t>(threads), chunks);
    pool.reserve(workers);
    for (size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                size_t c = next.fetch_add(1);
                if (c >= chunks) return;
                run_chunk(c);
            }
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace holder
