#include <doctest.h>

#include <cmath>

#include "etraj/errors.hpp"
#include "etraj/extraction.hpp"
#include "etraj/recover.hpp"
#include "support.hpp"

using namespace etraj;
using namespace etraj::testing;

TEST_CASE("frames of a still trajectory are the sharp image") {
    Rng rng(71);
    const Image sharp = random_image(rng, 8, 9, 3);
    const TrajectoryField zero(ConstraintMode::Quadratic, 15, 8, 9);
    const auto frames = extract_frames(sharp, zero, 7);
    REQUIRE(frames.size() == 7);
    for (const Image& f : frames) CHECK(f == sharp);
}

TEST_CASE("frame identities") {
    Rng rng(72);
    for (auto mode : {ConstraintMode::Linear, ConstraintMode::BdLinear, ConstraintMode::Quadratic}) {
        const Image sharp = texture_image(rng, 16, 18, 3);
        const TrajectoryField t = random_trajectory(rng, mode, 15, 16, 18, 3.0);
        const auto frames = extract_frames(sharp, t, 15);
        CHECK(frames[7] == sharp);
        Image mean(16, 18, 3);
        for (const Image& f : frames)
            for (std::size_t i = 0; i < f.size(); ++i) mean.data()[i] += f.data()[i] / 15.0;
        const Image b = reblur(sharp, t, 15);
        for (std::size_t i = 0; i < b.size(); ++i) CHECK(mean.data()[i] == doctest::Approx(b.data()[i]));
        const auto fine = extract_frames(sharp, t, 29);
        for (int k = 0; k < 15; ++k) CHECK(fine[2 * k] == frames[k]);
    }
}

TEST_CASE("zero-constraint fields extract their own steps only") {
    Rng rng(73);
    const Image sharp = random_image(rng, 6, 6, 1);
    const TrajectoryField t = TrajectoryField::from_offsets(random_offsets(rng, 5, 6, 6, 2.0));
    const auto frames = extract_frames(sharp, t, 5);
    CHECK(frames.size() == 5);
    CHECK_THROWS_AS(extract_frames(sharp, t, 7), UnsupportedMode);
    CHECK_THROWS_AS(extract_frames(sharp, t, 4), EvenStepCount);
    CHECK_THROWS_AS(extract_frames(Image(5, 6, 1), t, 5), DimensionError);
}

TEST_CASE("motion-aware sampling offsets") {
    TrajectoryField t(ConstraintMode::Linear, 15, 2, 3);
    const OffsetField zero = ma_sampling_offsets(t);
    CHECK(zero.steps() == kMaTaps);
    for (double v : zero.data()) CHECK(v == 0.0);

    for (int y = 0; y < 2; ++y)
        for (int x = 0; x < 3; ++x) t.pixel(y, x)[0] = 4.0;
    const OffsetField s = ma_sampling_offsets(t, 0.25);
    for (int n = 0; n < kMaTaps; ++n) {
        CHECK(s.at(n, 1, 2).x == doctest::Approx(1.0 - 0.25 * n).epsilon(1e-15));
        CHECK(s.at(n, 1, 2).y == 0.0);
    }
    CHECK_THROWS_AS(ma_sampling_offsets(TrajectoryField(ConstraintMode::Zero, 9, 2, 2)), UnsupportedMode);
}

TEST_CASE("motion-aware convolution") {
    Rng rng(74);
    const Image feature = random_image(rng, 7, 8, 2);
    MaWeights w(2, 3);
    for (double& v : w.w) v = rng.uniform(-1.0, 1.0);

    // Coincident taps: output is the summed weights times the centre value.
    const Image centre = motion_aware_conv(feature, w, OffsetField(kMaTaps, 7, 8));
    for (int y = 0; y < 7; ++y)
        for (int x = 0; x < 8; ++x)
            for (int o = 0; o < 3; ++o) {
                double s = 0.0;
                for (int n = 0; n < kMaTaps; ++n)
                    for (int i = 0; i < 2; ++i) s += w.at(n, i, o) * feature.at(y, x, i);
                CHECK(centre.at(y, x, o) == doctest::Approx(s).epsilon(1e-14));
            }

    // Square grid: conventional 3x3 convolution with edge clamping everywhere.
    const Image grid = motion_aware_conv(feature, w, square_grid_sampling(7, 8));
    for (int y = 0; y < 7; ++y)
        for (int x = 0; x < 8; ++x)
            for (int o = 0; o < 3; ++o) {
                double s = 0.0;
                for (int n = 0; n < kMaTaps; ++n)
                    for (int i = 0; i < 2; ++i) {
                        const int yy = std::clamp(y + n / 3 - 1, 0, 6);
                        const int xx = std::clamp(x + n % 3 - 1, 0, 7);
                        s += w.at(n, i, o) * feature.at(yy, xx, i);
                    }
                CHECK(grid.at(y, x, o) == s);
            }

    CHECK_THROWS_AS(motion_aware_conv(feature, w, OffsetField(5, 7, 8)), DimensionError);
    CHECK_THROWS_AS(motion_aware_conv(feature, w, OffsetField(kMaTaps, 7, 7)), DimensionError);
    CHECK_THROWS_AS(motion_aware_conv(feature, MaWeights(3, 3), OffsetField(kMaTaps, 7, 8)), DimensionError);
}
