#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace semfuse {

/// Deterministic RNG built on mt19937_64. The standard fully specifies the
/// engine output but not the distribution adapters, so the sampling helpers
/// here are hand-rolled to keep results bit-identical across platforms.
class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [lo, hi] inclusive.
    int uniform_int(int lo, int hi) {
        uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
        return lo + static_cast<int>(engine_() % span);
    }

    bool bernoulli(double p) { return uniform() < p; }

    /// Index drawn from unnormalized nonnegative weights. Returns -1 when the
    /// total mass is zero.
    int discrete(const std::vector<double> &weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        if (total <= 0.0) return -1;
        double r = uniform() * total;
        double acc = 0.0;
        for (size_t i = 0; i < weights.size(); ++i) {
            acc += weights[i];
            if (r < acc) return static_cast<int>(i);
        }
        return static_cast<int>(weights.size()) - 1;
    }

private:
    std::mt19937_64 engine_;
};

/// splitmix64 mix; used to derive independent per-purpose RNG streams from
/// a base seed plus stream tags.
inline uint64_t mix_seed(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Independent stream keyed by (seed, a, b, c). Two streams with different
/// tags never share state, so adding a consumer does not perturb the others.
inline Rng derive_rng(uint64_t seed, uint64_t a, uint64_t b = 0, uint64_t c = 0) {
    uint64_t s = mix_seed(seed ^ mix_seed(a ^ mix_seed(b ^ mix_seed(c))));
    return Rng(s);
}

}  // namespace semfuse
