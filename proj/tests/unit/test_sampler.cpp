#include <doctest.h>

#include <algorithm>

#include "etraj/errors.hpp"
#include "etraj/sampler.hpp"
#include "support.hpp"

using namespace etraj;
using namespace etraj::testing;

namespace {

Image ramp2x2() {
    Image img(2, 2, 1);
    img.at(0, 0, 0) = 0.0;
    img.at(0, 1, 0) = 1.0;
    img.at(1, 0, 0) = 2.0;
    img.at(1, 1, 0) = 3.0;
    return img;
}

constexpr BoundaryMode kModes[] = {BoundaryMode::ClampToEdge, BoundaryMode::ZeroOutside};

}  // namespace

TEST_CASE("bilinear sample hand-evaluated values") {
    const Image img = ramp2x2();
    // 0.25*0 + 0.25*1 + 0.25*2 + 0.25*3
    CHECK(bilinear_sample(img, {0.5, 0.5}, 0) == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(bilinear_sample(img, {1.0, 0.0}, 0) == 1.0);
    CHECK(bilinear_sample(img, {0.0, 1.0}, 0) == 2.0);
    CHECK(bilinear_sample(img, {1.0, 1.0}, 0) == 3.0);
    // Clamp vs zero outside the raster.
    CHECK(bilinear_sample(img, {-3.0, 0.0}, 0, BoundaryMode::ClampToEdge) == 0.0);
    CHECK(bilinear_sample(img, {5.0, 1.0}, 0, BoundaryMode::ClampToEdge) == 3.0);
    CHECK(bilinear_sample(img, {1.5, 1.0}, 0, BoundaryMode::ZeroOutside) == doctest::Approx(1.5));
    CHECK(bilinear_sample(img, {7.0, 7.0}, 0, BoundaryMode::ZeroOutside) == 0.0);
}

TEST_CASE("bilinear sample is exact at lattice points") {
    Rng rng(3);
    const Image img = random_image(rng, 6, 7, 3);
    for (auto mode : kModes) {
        for (int y = 0; y < img.height(); ++y)
            for (int x = 0; x < img.width(); ++x)
                for (int c = 0; c < 3; ++c)
                    CHECK(bilinear_sample(img, {double(x), double(y)}, c, mode) == img.at(y, x, c));
    }
}

TEST_CASE("constant image samples to the constant") {
    Rng rng(4);
    const Image img(5, 6, 1, 0.37);
    for (int i = 0; i < 200; ++i) {
        const Vec2 pt{rng.uniform(0.0, 5.0), rng.uniform(0.0, 4.0)};
        for (auto mode : kModes) {
            CHECK(bilinear_sample(img, pt, 0, mode) == doctest::Approx(0.37).epsilon(1e-14));
            const Vec2 g = bilinear_grad(img, pt, 0, mode);
            if (mode == BoundaryMode::ClampToEdge || (pt.x < 4.0 && pt.y < 3.0)) {
                CHECK(g.x == doctest::Approx(0.0));
                CHECK(g.y == doctest::Approx(0.0));
            }
        }
    }
}

TEST_CASE("bilinear grad hand-evaluated values") {
    const Image img = ramp2x2();
    const Vec2 g = bilinear_grad(img, {0.5, 0.5}, 0);
    CHECK(g.x == doctest::Approx(1.0));
    CHECK(g.y == doctest::Approx(2.0));
    // Right edge under clamping: moving right is clamped, so d/dx is 0.
    const Vec2 e = bilinear_grad(img, {1.0, 0.5}, 0, BoundaryMode::ClampToEdge);
    CHECK(e.x == 0.0);
    CHECK(e.y == doctest::Approx(2.0));
    // Outside: clamped along both axes.
    const Vec2 o = bilinear_grad(img, {-1.0, 3.0}, 0, BoundaryMode::ClampToEdge);
    CHECK(o.x == 0.0);
    CHECK(o.y == 0.0);
    // Lattice point: right-sided cell.
    Image wide(2, 3, 1);
    wide.at(0, 0, 0) = 0.0;
    wide.at(0, 1, 0) = 1.0;
    wide.at(0, 2, 0) = 5.0;
    wide.at(1, 0, 0) = 0.0;
    wide.at(1, 1, 0) = 1.0;
    wide.at(1, 2, 0) = 5.0;
    CHECK(bilinear_grad(wide, {1.0, 0.0}, 0).x == doctest::Approx(4.0));
}

TEST_CASE("bilinear grad matches central differences off the lattice") {
    Rng rng(5);
    const Image img = random_image(rng, 9, 11, 3);
    const double h = 1e-3;
    int checked = 0;
    for (int i = 0; i < 1000; ++i) {
        const auto mode = kModes[i % 2];
        // Keep the h-neighborhood inside one cell.
        const Vec2 pt{rng.off_lattice(-1.0, 11.0, 0.01), rng.off_lattice(-1.0, 9.0, 0.01)};
        const int c = i % 3;
        const Vec2 g = bilinear_grad(img, pt, c, mode);
        const double fx = (bilinear_sample(img, {pt.x + h, pt.y}, c, mode) -
                           bilinear_sample(img, {pt.x - h, pt.y}, c, mode)) / (2 * h);
        const double fy = (bilinear_sample(img, {pt.x, pt.y + h}, c, mode) -
                           bilinear_sample(img, {pt.x, pt.y - h}, c, mode)) / (2 * h);
        CHECK(rel_error(g.x, fx, 1e-6) < 1e-4);
        CHECK(rel_error(g.y, fy, 1e-6) < 1e-4);
        ++checked;
    }
    CHECK(checked == 1000);
}

TEST_CASE("bilinear sample is linear along axis-parallel segments in a cell") {
    Rng rng(6);
    const Image img = random_image(rng, 6, 6, 1);
    for (int i = 0; i < 300; ++i) {
        const double x0 = rng.integer(0, 4);
        const double y = rng.off_lattice(0.0, 5.0);
        const double a = rng.uniform(0.0, 1.0);
        const double b = rng.uniform(0.0, 1.0);
        const double m = 0.5 * (a + b);
        const double va = bilinear_sample(img, {x0 + a, y}, 0);
        const double vb = bilinear_sample(img, {x0 + b, y}, 0);
        const double vm = bilinear_sample(img, {x0 + m, y}, 0);
        CHECK(vm == doctest::Approx(0.5 * (va + vb)).epsilon(1e-12));
    }
}

TEST_CASE("clamped samples stay within the neighborhood range") {
    Rng rng(8);
    const Image img = random_image(rng, 7, 7, 1);
    for (int i = 0; i < 500; ++i) {
        const Vec2 pt{rng.uniform(-3.0, 9.0), rng.uniform(-3.0, 9.0)};
        const double cx = std::clamp(pt.x, 0.0, 6.0);
        const double cy = std::clamp(pt.y, 0.0, 6.0);
        const int x0 = std::min(5, int(std::floor(cx)));
        const int y0 = std::min(5, int(std::floor(cy)));
        const double v[4] = {img.at(y0, x0, 0), img.at(y0, x0 + 1, 0), img.at(y0 + 1, x0, 0),
                             img.at(y0 + 1, x0 + 1, 0)};
        const double s = bilinear_sample(img, pt, 0);
        CHECK(s >= *std::min_element(v, v + 4) - 1e-15);
        CHECK(s <= *std::max_element(v, v + 4) + 1e-15);
    }
}

TEST_CASE("warp identities") {
    Rng rng(9);
    const Image img = random_image(rng, 5, 6, 3);
    const FlowMap zero(5, 6);
    for (auto mode : kModes) CHECK(warp(img, zero, mode) == img);

    FlowMap shift(5, 6);
    for (int y = 0; y < 5; ++y)
        for (int x = 0; x < 6; ++x) shift.set(y, x, {1.0, 0.0});
    const Image out = warp(img, shift, BoundaryMode::ClampToEdge);
    for (int y = 0; y < 5; ++y)
        for (int x = 0; x < 6; ++x)
            for (int c = 0; c < 3; ++c) CHECK(out.at(y, x, c) == img.at(y, std::min(x + 1, 5), c));

    const Image flat(5, 6, 1, 0.6);
    FlowMap wild(5, 6);
    for (double& v : wild.data()) v = rng.uniform(-20.0, 20.0);
    const Image warped = warp(flat, wild);
    for (double v : warped.data()) CHECK(v == doctest::Approx(0.6).epsilon(1e-14));

    CHECK_THROWS_AS(warp(img, FlowMap(4, 6)), DimensionError);
}
