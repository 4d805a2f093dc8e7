#pragma once

/// Deterministic random number generation for simulations.
///
/// std::normal_distribution is implementation-defined, so sampled streams
/// would differ across standard libraries.  To keep simulation outputs (and
/// the regression values frozen in the tests) reproducible everywhere, the
/// sampler draws from std::mt19937_64 and applies its own Box-Muller
/// transform.  Per-run seeds are derived from a master seed with splitmix64
/// so that Monte Carlo runs are independent of execution order.

#include <cmath>
#include <cstdint>
#include <random>

namespace robustarma {

/// One step of the splitmix64 sequence; updates state and returns the draw.
[[nodiscard]] inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Seed for sub-stream `index` of the generator seeded by `master`.
[[nodiscard]] inline std::uint64_t derive_seed(std::uint64_t master,
                                               std::uint64_t index) {
    std::uint64_t state = master;
    std::uint64_t out = splitmix64_next(state);
    state ^= index * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL;
    out ^= splitmix64_next(state);
    return out;
}

/// Deterministic uniform/normal sampler (mt19937_64 + Box-Muller).
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform draw in [0, 1) with 53-bit resolution.
    [[nodiscard]] double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in {0, ..., k-1}.
    [[nodiscard]] std::size_t uniform_index(std::size_t k) {
        return static_cast<std::size_t>(uniform() * static_cast<double>(k));
    }

    /// Standard normal draw.
    [[nodiscard]] double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 =
            (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
        const double u2 = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * 3.14159265358979323846 * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

    [[nodiscard]] double normal(double mean, double sd) {
        return mean + sd * normal();
    }

    [[nodiscard]] double half_normal(double sd) {
        return std::abs(normal()) * sd;
    }

    /// Random sign: +1 or -1 with equal probability.
    [[nodiscard]] double random_sign() {
        return (engine_() & 1ULL) ? 1.0 : -1.0;
    }

  private:
    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace robustarma
