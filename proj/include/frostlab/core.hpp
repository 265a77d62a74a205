#pragma once

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace frostlab {

// Neumaier-compensated accumulator. Long double sums in the energy and
// incidence kernels reach 10^7 terms; plain accumulation loses digits the
// reproducibility contracts cannot afford.
class KahanSum {
public:
    void add(double x) {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

// SplitMix64. Used instead of <random> engines+distributions so that seeded
// output is identical across standard library implementations.
struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    // uniform in [0,1)
    double uniform() { return double(next() >> 11) * 0x1.0p-53; }
    // uniform integer in [0,n)
    std::uint64_t below(std::uint64_t n) { return next() % n; }
};

// Derives an independent per-module stream from one global seed.
inline std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t tag) {
    SplitMix64 s(seed ^ (0x9e3779b97f4a7c15ull * (tag + 1)));
    s.next();
    return s.next();
}

// FROSTLAB_THREADS caps worker count; default is the hardware concurrency.
inline unsigned thread_budget() {
    if (const char* env = std::getenv("FROSTLAB_THREADS")) {
        long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<unsigned>(v);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1;
}

// Runs fn(i) for i in [0,n). fn must only write to per-i slots; the final
// result of any reduction over those slots is then independent of the
// schedule, which is what the concurrency contracts require.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    unsigned workers = thread_budget();
    if (workers <= 1 || n < 64) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    if (workers > n) workers = static_cast<unsigned>(n);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += workers) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

inline void require(bool cond, const std::string& what) {
    if (!cond) throw std::invalid_argument(what);
}

}  // namespace frostlab
