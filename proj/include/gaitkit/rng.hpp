#pragma once

#include <cstdint>
#include <vector>

namespace gaitkit {

// xoshiro256** seeded through splitmix64. Self-contained so that seeded runs
// are bit-reproducible regardless of the standard library in use
// (std::normal_distribution and friends are implementation-defined).
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();

    // Uniform in [0, 1) with 53-bit resolution.
    double uniform();
    double uniform(double lo, double hi);

    // Inclusive range, unbiased (rejection sampling).
    std::uint64_t uniform_index(std::uint64_t n); // in [0, n)
    int uniform_int(int lo, int hi);

    // Standard normal via Box-Muller; second deviate is cached.
    double normal();
    double normal(double mu, double sigma);

    // Derive an independent child stream; deterministic in (parent seed, tag).
    Rng fork(std::uint64_t tag) const;

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(uniform_index(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::uint64_t state_[4];
    std::uint64_t seed_;
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
};

} // namespace gaitkit
