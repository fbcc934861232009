#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace holder {

using vecd = std::vector<double>;

// config/schema problems -> CLI exit 2
struct schema_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// numerical hard errors (shifted point escaped the domain, nonfinite value) -> CLI exit 3
struct hard_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// compensated summation; deterministic for a fixed visit order
struct kahan_sum {
    double s = 0.0, c = 0.0;
    void add(double x) {
        double y = x - c;
        double t = s + y;
        c = (t - s) - y;
        s = t;
    }
    double value() const { return s; }
};

// integer part with a fudge for products like (2/3)*3 that land just under an integer
inline int floor_index(double x) { return static_cast<int>(std::floor(x + 1e-9)); }

// splitmix64: bit-stable across platforms, cheap to split into independent streams
struct rng_stream {
    uint64_t state;
    explicit rng_stream(uint64_t seed, uint64_t stream = 0)
        : state(seed ^ (0x9e3779b97f4a7c15ULL * (stream + 1))) {}
    uint64_t next_u64() {
        uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
    double uniform(double a, double b) { return a + (b - a) * next_double(); }
    // log-uniform on [a,b], a,b > 0
    double log_uniform(double a, double b) {
        return std::exp(uniform(std::log(a), std::log(b)));
    }
    int next_below(int n) { return static_cast<int>(next_u64() % static_cast<uint64_t>(n)); }
};

struct fnv1a {
    uint64_t h = 1469598103934665603ULL;
    void bytes(const void* p, size_t n) {
        const unsigned char* b = static_cast<const unsigned char*>(p);
        for (size_t i = 0; i < n; ++i) {
            h ^= b[i];
            h *= 1099511628211ULL;
        }
    }
    void str(const std::string& s) { bytes(s.data(), s.size()); }
    void f64(double x) {
        uint64_t u;
        std::memcpy(&u, &x, sizeof u);
        bytes(&u, sizeof u);
    }
    void u64(uint64_t x) { bytes(&x, sizeof x); }
    uint64_t value() const { return h; }
};

std::string hex16(uint64_t v);

// shortest decimal round-trip formatting; keeps JSON reports byte-identical across reruns
std::string format_double(double x);

// chunk boundaries are fixed (independent of thread count) so any per-chunk
// reductions merge deterministically
void parallel_for_chunks(size_t n, int threads,
                         const std::function<void(size_t chunk, size_t begin, size_t end)>& fn);

inline constexpr size_t k_chunk_count = 64;

}  // namespace holder
