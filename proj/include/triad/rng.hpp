#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace triad {

/// Deterministic random stream: identical seed + identical call sequence gives
/// identical output on every platform. Gaussian and integer sampling are
/// implemented here rather than with std distributions, whose output is
/// implementation-defined. A stream has exactly one owner; derive independent
/// sub-streams with split() instead of sharing.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    std::uint64_t seed() const { return seed_; }

    /// Number of raw 64-bit draws consumed so far (the stream position).
    std::uint64_t position() const { return draws_; }

    std::uint64_t next_u64() {
        ++draws_;
        return engine_();
    }

    /// Uniform double in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller; consumes exactly two raw draws.
    double gauss() {
        const double u1 = 1.0 - uniform(); // (0, 1], keeps the log finite
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
    }

    double gauss(double mean, double stddev) { return mean + stddev * gauss(); }

    /// Uniform integer in [0, n), unbiased via rejection.
    std::uint64_t below(std::uint64_t n);

    /// Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    std::vector<int> permutation(int n) {
        std::vector<int> p(n);
        for (int i = 0; i < n; ++i) p[i] = i;
        shuffle(p);
        return p;
    }

    /// Independent stream derived from this stream's seed and a tag.
    /// Independent of the parent's position by construction.
    RngStream split(std::uint64_t tag) const { return RngStream(mix_seed(seed_, tag)); }

    static std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag);

private:
    static constexpr double kPi = 3.141592653589793238462643383279502884;

    std::uint64_t seed_;
    std::mt19937_64 engine_;
    std::uint64_t draws_ = 0;
};

} // namespace triad
