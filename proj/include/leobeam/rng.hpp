#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace leobeam {

// Stateless seed mixer used to derive independent stream seeds from one base
// seed. Two runs with the same base seed see identical streams.
inline uint64_t mix_seed(uint64_t base, uint64_t stream) {
    uint64_t z = base + 0x9e3779b97f4a7c15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Seeded random stream. Distributions are implemented on top of the raw
// mt19937_64 output so sampled trajectories do not depend on the standard
// library's distribution internals.
class Rng {
  public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    uint64_t raw() { return gen_(); }

    // uniform in [0, 1)
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // inclusive bounds
    int uniform_int(int lo, int hi) {
        const uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
        return lo + static_cast<int>(gen_() % span);
    }

    // Box-Muller; second value cached
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    // Poisson sample; exact inversion for small means, rounded normal
    // approximation for large ones (relative error negligible at that scale).
    long long poisson(double mean) {
        if (mean <= 0.0) return 0;
        if (mean < 64.0) {
            const double limit = std::exp(-mean);
            long long k = 0;
            double p = 1.0;
            do {
                ++k;
                p *= uniform();
            } while (p > limit);
            return k - 1;
        }
        const double v = std::round(mean + std::sqrt(mean) * normal());
        return v < 0.0 ? 0 : static_cast<long long>(v);
    }

  private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace leobeam
