// Deterministic random fields: seeded mt19937_64 with explicit mappings so
// identical seeds reproduce every bit on any platform.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "logsob/grid.hpp"

namespace logsob {

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    double uniform() {  // [0, 1)
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double normal() {
        if (have_) {
            have_ = false;
            return cached_;
        }
        double u1 = 0.0;
        while (u1 == 0.0) u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        cached_ = r * std::sin(2.0 * M_PI * u2);
        have_ = true;
        return r * std::cos(2.0 * M_PI * u2);
    }

  private:
    std::mt19937_64 eng_;
    bool have_ = false;
    double cached_ = 0.0;
};

// Low-order cosine mixture under a wide Gaussian envelope; smooth, decaying,
// and grid-resolved. Not normalized.
inline Field random_band_limited(const Grid& grid, Rng& rng, int components = 8) {
    const double env_w = grid.radius / 3.5;
    struct Mode {
        double amp, wx, wy, px, py;
    };
    std::vector<Mode> modes(components);
    for (Mode& m : modes) {
        m.amp = rng.normal();
        m.wx = rng.uniform(0.25, 1.8);
        m.wy = rng.uniform(0.25, 1.8);
        m.px = rng.uniform(0.0, 2.0 * M_PI);
        m.py = rng.uniform(0.0, 2.0 * M_PI);
    }
    return sample(grid, [&](const Point& x) {
        double r2 = x[0] * x[0] + (grid.dim == 2 ? x[1] * x[1] : 0.0);
        double env = std::exp(-0.5 * r2 / (env_w * env_w));
        double s = 0.0;
        for (const Mode& m : modes) {
            double v = std::cos(m.wx * x[0] + m.px);
            if (grid.dim == 2) v *= std::cos(m.wy * x[1] + m.py);
            s += m.amp * v;
        }
        return env * s;
    });
}

inline Field random_unit_h1(const Grid& grid, Rng& rng) {
    Field w = random_band_limited(grid, rng);
    double n = std::sqrt(h1_inner(w, w));
    return (1.0 / n) * w;
}

inline Field random_unit_l2(const Grid& grid, Rng& rng) {
    Field w = random_band_limited(grid, rng);
    double n = std::sqrt(l2_inner(w, w));
    return (1.0 / n) * w;
}

}  // namespace logsob
