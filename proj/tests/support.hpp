#pragma once

// Shared helpers for unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include "etraj/image.hpp"
#include "etraj/trajectory.hpp"

namespace etraj::testing {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    double uniform(double lo, double hi) {
        return lo + (hi - lo) * std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
    }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }
    // Uniform value at least `margin` away from any integer.
    double off_lattice(double lo, double hi, double margin = 0.05) {
        for (;;) {
            const double v = uniform(lo, hi);
            const double frac = v - std::floor(v);
            if (frac > margin && frac < 1.0 - margin) return v;
        }
    }

private:
    std::mt19937_64 engine_;
};

inline Image random_image(Rng& rng, int h, int w, int c) {
    Image img(h, w, c);
    for (double& v : img.data()) v = rng.uniform(0.0, 1.0);
    return img;
}

// Smooth multi-frequency texture with values in [0, 1].
inline Image texture_image(Rng& rng, int h, int w, int c) {
    Image img(h, w, c);
    constexpr int kWaves = 12;
    for (int ch = 0; ch < c; ++ch) {
        double fx[kWaves], fy[kWaves], ph[kWaves], amp[kWaves];
        for (int k = 0; k < kWaves; ++k) {
            const double freq = rng.uniform(0.08, 0.6);
            const double ang = rng.uniform(0.0, 2.0 * M_PI);
            fx[k] = freq * std::cos(ang);
            fy[k] = freq * std::sin(ang);
            ph[k] = rng.uniform(0.0, 2.0 * M_PI);
            amp[k] = rng.uniform(0.5, 1.0);
        }
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                double s = 0.0;
                double norm = 0.0;
                for (int k = 0; k < kWaves; ++k) {
                    s += amp[k] * std::sin(fx[k] * x + fy[k] * y + ph[k]);
                    norm += amp[k];
                }
                img.at(y, x, ch) = 0.5 + 0.45 * s / std::sqrt(norm * 2.0);
            }
        }
    }
    for (double& v : img.data()) v = std::clamp(v, 0.0, 1.0);
    return img;
}

inline OffsetField random_offsets(Rng& rng, int steps, int h, int w, double reach,
                                  bool off_lattice = false) {
    OffsetField f(steps, h, w);
    for (double& v : f.data()) {
        v = off_lattice ? rng.off_lattice(-reach, reach) : rng.uniform(-reach, reach);
    }
    return f;
}

inline TrajectoryField random_trajectory(Rng& rng, ConstraintMode mode, int steps, int h, int w,
                                         double reach) {
    TrajectoryField t(mode, steps, h, w);
    for (double& v : t.params()) v = rng.uniform(-reach, reach);
    return t;
}

inline double rel_error(double a, double b, double floor = 1e-8) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

inline std::filesystem::path temp_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("etraj_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace etraj::testing
