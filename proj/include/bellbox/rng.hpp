#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <random>

namespace bellbox {

// Deterministic random source. mt19937_64 is fully specified by the
// standard; the uniform/normal transforms below avoid the
// implementation-defined std::*_distribution classes so that a given
// seed yields the same stream on every toolchain.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // Uniform in [0, 1) with 53-bit resolution.
    double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Standard normal via Box-Muller, one spare cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = 1.0 - uniform01();  // (0, 1]
        double u2 = uniform01();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    std::array<double, 3> unit_vector3() {
        while (true) {
            std::array<double, 3> v{normal(), normal(), normal()};
            double n2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
            if (n2 > 1e-24) {
                double inv = 1.0 / std::sqrt(n2);
                return {v[0] * inv, v[1] * inv, v[2] * inv};
            }
        }
    }

  private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace bellbox
