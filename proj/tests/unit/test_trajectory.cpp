#include <doctest.h>

#include <vector>

#include "etraj/errors.hpp"
#include "etraj/trajectory.hpp"
#include "support.hpp"

using namespace etraj;
using namespace etraj::testing;

namespace {

TrajectoryField single(ConstraintMode mode, int steps, std::vector<double> params) {
    TrajectoryField t(mode, steps, 1, 1);
    std::copy(params.begin(), params.end(), t.pixel(0, 0).begin());
    return t;
}

constexpr ConstraintMode kCurves[] = {ConstraintMode::Linear, ConstraintMode::BdLinear,
                                      ConstraintMode::Quadratic};

}  // namespace

TEST_CASE("linear expansion") {
    const auto f = expand(single(ConstraintMode::Linear, 15, {7.0, 0.0}), 15);
    CHECK(f.at(0, 0, 0) == Vec2{7.0, 0.0});
    CHECK(f.at(7, 0, 0) == Vec2{0.0, 0.0});
    CHECK(f.at(14, 0, 0) == Vec2{-7.0, 0.0});
    CHECK(f.at(1, 0, 0).x == doctest::Approx(6.0));
}

TEST_CASE("bd-linear expansion follows the two half-lines") {
    const auto f = expand(single(ConstraintMode::BdLinear, 5, {2.0, 0.0, 0.0, 4.0}), 5);
    CHECK(f.at(0, 0, 0) == Vec2{2.0, 0.0});
    CHECK(f.at(1, 0, 0) == Vec2{1.0, 0.0});
    CHECK(f.at(2, 0, 0) == Vec2{0.0, 0.0});
    CHECK(f.at(3, 0, 0) == Vec2{0.0, 2.0});
    CHECK(f.at(4, 0, 0) == Vec2{0.0, 4.0});
}

TEST_CASE("quadratic expansion") {
    const auto zero = expand(single(ConstraintMode::Quadratic, 9, {0, 0, 0, 0}), 9);
    for (double v : zero.data()) CHECK(v == 0.0);

    const auto f = expand(single(ConstraintMode::Quadratic, 5, {-4.0, 0.0, 4.0, 0.0}), 5);
    const double expected[] = {-4.0, -2.0, 0.0, 2.0, 4.0};
    for (int n = 0; n < 5; ++n) {
        CHECK(f.at(n, 0, 0).x == expected[n]);
        CHECK(f.at(n, 0, 0).y == 0.0);
    }
    // Curved case: u^2 term with dp1 = dp2 = (2, 0) gives 2 u^2.
    const auto g = expand(single(ConstraintMode::Quadratic, 5, {2.0, 0.0, 2.0, 0.0}), 5);
    const double curved[] = {2.0, 0.5, 0.0, 0.5, 2.0};
    for (int n = 0; n < 5; ++n) CHECK(g.at(n, 0, 0).x == doctest::Approx(curved[n]));
}

TEST_CASE("resample") {
    const auto q = single(ConstraintMode::Quadratic, 5, {-4.0, 0.0, 4.0, 0.0});
    const auto r = resample(q, 9);
    for (int m = 0; m < 9; ++m) CHECK(r.at(m, 0, 0).x == doctest::Approx(-4.0 + m));

    Rng rng(12);
    for (auto mode : kCurves) {
        const auto t = random_trajectory(rng, mode, 15, 3, 4, 5.0);
        CHECK(resample(t, 15) == expand(t, 15));
        const auto r7 = resample(t, 7);
        for (int y = 0; y < 3; ++y)
            for (int x = 0; x < 4; ++x) {
                const auto p = t.pixel(y, x);
                CHECK(r7.at(0, y, x) == Vec2{p[0], p[1]});
                const Vec2 last = mode == ConstraintMode::Linear ? Vec2{-p[0], -p[1]}
                                                                 : Vec2{p[2], p[3]};
                CHECK(r7.at(6, y, x) == last);
            }
    }
    CHECK_THROWS_AS(resample(TrajectoryField(ConstraintMode::Zero, 5, 2, 2), 7), UnsupportedMode);
    CHECK_THROWS_AS(resample(q, 8), EvenStepCount);
}

TEST_CASE("expand error paths") {
    CHECK_THROWS_AS(expand(single(ConstraintMode::Linear, 15, {1, 1}), 4), EvenStepCount);
    CHECK_THROWS_AS(expand(single(ConstraintMode::Linear, 15, {1, 1}), 1), EvenStepCount);
    CHECK_THROWS_AS(expand(TrajectoryField(ConstraintMode::Zero, 5, 2, 2), 7), StepMismatch);
    CHECK_THROWS_AS(TrajectoryField(ConstraintMode::Linear, 6, 2, 2), EvenStepCount);
}

TEST_CASE("zero-constraint fields round-trip through offsets") {
    Rng rng(13);
    const auto off = random_offsets(rng, 7, 3, 2, 3.0);
    const auto t = TrajectoryField::from_offsets(off);
    CHECK(t.mode() == ConstraintMode::Zero);
    CHECK(expand(t, 7) == off);
}

TEST_CASE("endpoint flow") {
    const auto lin = endpoint_flow(single(ConstraintMode::Linear, 15, {7.0, 0.0}));
    CHECK(lin.at(0, 0) == Vec2{14.0, 0.0});
    const auto quad = endpoint_flow(single(ConstraintMode::Quadratic, 15, {-4.0, 0.0, 4.0, 0.0}));
    CHECK(quad.at(0, 0) == Vec2{-8.0, 0.0});
    const auto zero = endpoint_flow(TrajectoryField(ConstraintMode::BdLinear, 5, 3, 3));
    for (double v : zero.data()) CHECK(v == 0.0);

    Rng rng(14);
    const auto off = random_offsets(rng, 5, 2, 2, 3.0);
    const auto zc = endpoint_flow(TrajectoryField::from_offsets(off));
    CHECK(zc.at(1, 0) == off.at(0, 1, 0) - off.at(4, 1, 0));
}

TEST_CASE("param jacobian hand sums") {
    std::vector<double> out(2);
    const std::vector<double> g = {1, 0, 1, 0, 1, 0};
    param_jacobian_apply(ConstraintMode::Linear, 3, g, out);
    CHECK(out[0] == 0.0);
    CHECK(out[1] == 0.0);

    std::vector<double> zero_grad(30, 0.0);
    for (auto mode : kCurves) {
        std::vector<double> o(static_cast<std::size_t>(params_per_pixel(mode, 15)), 1.0);
        param_jacobian_apply(mode, 15, zero_grad, o);
        for (double v : o) CHECK(v == 0.0);
    }
    CHECK_THROWS_AS(param_jacobian_apply(ConstraintMode::Linear, 4, std::vector<double>(8), out),
                    EvenStepCount);
}

TEST_CASE("param jacobian matches finite differences of loss after expand") {
    Rng rng(15);
    for (int trial = 0; trial < 60; ++trial) {
        const ConstraintMode mode = trial % 4 == 0 ? ConstraintMode::Zero : kCurves[trial % 3];
        const int steps = 2 * rng.integer(1, 8) + 1;
        const auto t = random_trajectory(rng, mode, steps, 1, 1, 3.0);
        std::vector<double> a(static_cast<std::size_t>(2 * steps));
        for (double& v : a) v = rng.uniform(-1.0, 1.0);
        // loss(o) = sum a.o + 0.5 |o|^2, so d loss / d o = a + o.
        auto loss = [&](const TrajectoryField& tr) {
            const auto o = expand(tr, steps);
            double s = 0.0;
            for (std::size_t i = 0; i < o.size(); ++i) s += a[i] * o.data()[i] + 0.5 * o.data()[i] * o.data()[i];
            return s;
        };
        const auto o = expand(t, steps);
        std::vector<double> g(a.size());
        for (std::size_t i = 0; i < g.size(); ++i) g[i] = a[i] + o.data()[i];
        std::vector<double> analytic(static_cast<std::size_t>(t.stride()));
        param_jacobian_apply(mode, steps, g, analytic);
        const double h = 1e-4;
        for (int k = 0; k < t.stride(); ++k) {
            auto plus = t;
            auto minus = t;
            plus.pixel(0, 0)[k] += h;
            minus.pixel(0, 0)[k] -= h;
            const double fd = (loss(plus) - loss(minus)) / (2 * h);
            CHECK(rel_error(analytic[static_cast<std::size_t>(k)], fd, 1e-6) < 1e-6);
        }
    }
}

TEST_CASE("constraint invariants over random draws") {
    Rng rng(16);
    for (int trial = 0; trial < 300; ++trial) {
        const int steps = 2 * rng.integer(1, 10) + 1;
        const int mid = (steps - 1) / 2;
        for (auto mode : kCurves) {
            const auto t = random_trajectory(rng, mode, steps, 1, 1, 10.0);
            const auto f = expand(t, steps);
            const auto p = t.pixel(0, 0);
            CHECK(f.at(mid, 0, 0) == Vec2{0.0, 0.0});
            CHECK(f.at(0, 0, 0) == Vec2{p[0], p[1]});
            if (mode == ConstraintMode::Linear) {
                CHECK(f.at(steps - 1, 0, 0) == Vec2{-p[0], -p[1]});
            } else {
                CHECK(f.at(steps - 1, 0, 0) == Vec2{p[2], p[3]});
            }
        }
        // Nesting: quadratic and bd-linear with dp1 = -dp2 reduce to linear.
        const double dx = rng.uniform(-8.0, 8.0);
        const double dy = rng.uniform(-8.0, 8.0);
        const auto lin = expand(single(ConstraintMode::Linear, steps, {dx, dy}), steps);
        CHECK(expand(single(ConstraintMode::Quadratic, steps, {dx, dy, -dx, -dy}), steps) == lin);
        CHECK(expand(single(ConstraintMode::BdLinear, steps, {dx, dy, -dx, -dy}), steps) == lin);
    }
}

TEST_CASE("expand is linear in the parameters") {
    Rng rng(17);
    for (int trial = 0; trial < 100; ++trial) {
        const auto mode = kCurves[trial % 3];
        const int steps = 2 * rng.integer(1, 8) + 1;
        const auto p1 = random_trajectory(rng, mode, steps, 2, 2, 5.0);
        const auto p2 = random_trajectory(rng, mode, steps, 2, 2, 5.0);
        const double a = rng.uniform(-2.0, 2.0);
        const double b = rng.uniform(-2.0, 2.0);
        auto mix = p1;
        for (std::size_t i = 0; i < mix.params().size(); ++i)
            mix.params()[i] = a * p1.params()[i] + b * p2.params()[i];
        const auto e = expand(mix, steps);
        const auto e1 = expand(p1, steps);
        const auto e2 = expand(p2, steps);
        for (std::size_t i = 0; i < e.size(); ++i)
            CHECK(e.data()[i] == doctest::Approx(a * e1.data()[i] + b * e2.data()[i]).epsilon(1e-12).scale(1.0));
    }
}
