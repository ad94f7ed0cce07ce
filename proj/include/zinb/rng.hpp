#ifndef ZINB_RNG_HPP
#define ZINB_RNG_HPP

#include <cstdint>
#include <random>

namespace zinb {

/// SplitMix64 finalizer; used to derive well-separated stream seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed of substream `index` under a base seed.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
    return splitmix64(splitmix64(base) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

/// Per-chain random source; the stream is a pure function of the seed.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
    double normal() { return std_normal_(engine_); }
    double normal(double mean, double sd) { return mean + sd * normal(); }
    double gamma(double shape) { return std::gamma_distribution<double>(shape, 1.0)(engine_); }
    bool bernoulli(double p) { return uniform() < p; }
    std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi) {
        return std::uniform_int_distribution<std::uint64_t>(lo, hi)(engine_);
    }
    std::int64_t binomial(std::int64_t trials, double p) {
        if (trials <= 0 || p <= 0.0) return 0;
        if (p >= 1.0) return trials;
        return std::binomial_distribution<std::int64_t>(trials, p)(engine_);
    }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> std_normal_{0.0, 1.0};
};

}  // namespace zinb

#endif
