#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace copcoal {

/// splitmix64 finalizer; used to derive independent child seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Seedable, splittable random stream. Every stochastic routine takes one of
/// these by reference; children obtained with split() are independent of the
/// parent's consumption state, so results do not depend on call order.
class Rng {
public:
    using engine_type = std::mt19937_64;

    explicit Rng(std::uint64_t seed) : seed_(seed), engine_(mix64(seed)) {}

    std::uint64_t seed() const noexcept { return seed_; }

    Rng split(std::uint64_t stream) const { return Rng(mix64(seed_ ^ mix64(stream + 0x632BE59BD9B4E019ULL))); }

    engine_type& engine() noexcept { return engine_; }

    /// Uniform on the open interval (0, 1).
    double uniform() {
        for (;;) {
            double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
            if (u > 0.0) return u;
        }
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double normal() { return normal_(engine_); }

    double exponential() { return -std::log(uniform()); }

    double gamma(double shape) { return std::gamma_distribution<double>(shape, 1.0)(engine_); }

    double chi_squared(double dof) { return 2.0 * gamma(0.5 * dof); }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        // rejection on the raw engine output; portable across standard libraries
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        for (;;) {
            const std::uint64_t x = engine_();
            if (x < limit) return x % n;
        }
    }

private:
    std::uint64_t seed_;
    engine_type engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace copcoal
