#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace tracepress {

// Thin wrapper over std::mt19937_64. The engine itself is fully specified by
// the standard; std::uniform_*_distribution is not, so the helpers here do
// their own mapping to keep sequences identical across platforms.
class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    uint64_t next_u64() { return engine_(); }

    // Unbiased integer in [0, n) via rejection sampling.
    uint64_t uniform_below(uint64_t n) {
        if (n == 0) {
            return 0;
        }
        const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t x = engine_();
        while (x >= limit) {
            x = engine_();
        }
        return x % n;
    }

    // Uniform double in [0, 1) with 53 bits of randomness.
    double uniform_real() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform_real(double lo, double hi) { return lo + (hi - lo) * uniform_real(); }

    bool bernoulli(double p) { return uniform_real() < p; }

    template <typename T>
    void shuffle(std::vector<T> &v) {
        for (size_t i = v.size(); i > 1; --i) {
            const size_t j = static_cast<size_t>(uniform_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace tracepress
