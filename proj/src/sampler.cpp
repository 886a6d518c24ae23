#include "etraj/sampler.hpp"

#include <algorithm>
#include <cmath>

#include "etraj/errors.hpp"
#include "etraj/parallel.hpp"

namespace etraj {

namespace {

// Interpolation cell along one axis.
struct AxisCell {
    int i0 = 0;
    int i1 = 0;
    double frac = 0.0;
    bool in0 = true;
    bool in1 = true;
    bool differentiable = true;
};

AxisCell locate(double coord, int extent, BoundaryMode mode) {
    AxisCell cell;
    if (mode == BoundaryMode::ClampToEdge) {
        const double hi = static_cast<double>(extent - 1);
        cell.differentiable = coord >= 0.0 && coord < hi;
        const double c = std::clamp(coord, 0.0, hi);
        int i0 = static_cast<int>(std::floor(c));
        if (i0 > extent - 2) {
            i0 = extent - 2;
        }
        cell.i0 = i0;
        cell.i1 = i0 + 1;
        cell.frac = c - i0;
        return cell;
    }
    // Far outside: both neighbors are out of range, keep indices small.
    if (coord < -2.0 || coord > static_cast<double>(extent) + 1.0) {
        cell.i0 = -2;
        cell.i1 = -1;
        cell.frac = 0.0;
        cell.in0 = cell.in1 = false;
        return cell;
    }
    const double f = std::floor(coord);
    cell.i0 = static_cast<int>(f);
    cell.i1 = cell.i0 + 1;
    cell.frac = coord - f;
    cell.in0 = cell.i0 >= 0 && cell.i0 < extent;
    cell.in1 = cell.i1 >= 0 && cell.i1 < extent;
    return cell;
}

struct Corners {
    double v00, v10, v01, v11;  // v<x><y>
};

Corners corners(const Image& img, const AxisCell& cx, const AxisCell& cy, int c) {
    auto fetch = [&](int x, bool inx, int y, bool iny) {
        return (inx && iny) ? img.at(y, x, c) : 0.0;
    };
    return {fetch(cx.i0, cx.in0, cy.i0, cy.in0), fetch(cx.i1, cx.in1, cy.i0, cy.in0),
            fetch(cx.i0, cx.in0, cy.i1, cy.in1), fetch(cx.i1, cx.in1, cy.i1, cy.in1)};
}

double blend(const Corners& k, double fx, double fy) {
    return (1.0 - fy) * ((1.0 - fx) * k.v00 + fx * k.v10) + fy * ((1.0 - fx) * k.v01 + fx * k.v11);
}

Vec2 blend_grad(const Corners& k, const AxisCell& cx, const AxisCell& cy) {
    const double fx = cx.frac;
    const double fy = cy.frac;
    Vec2 g;
    if (cx.differentiable) {
        g.x = (1.0 - fy) * (k.v10 - k.v00) + fy * (k.v11 - k.v01);
    }
    if (cy.differentiable) {
        g.y = (1.0 - fx) * (k.v01 - k.v00) + fx * (k.v11 - k.v10);
    }
    return g;
}

}  // namespace

double bilinear_sample(const Image& img, Vec2 pt, int c, BoundaryMode mode) {
    const AxisCell cx = locate(pt.x, img.width(), mode);
    const AxisCell cy = locate(pt.y, img.height(), mode);
    return blend(corners(img, cx, cy, c), cx.frac, cy.frac);
}

Vec2 bilinear_grad(const Image& img, Vec2 pt, int c, BoundaryMode mode) {
    const AxisCell cx = locate(pt.x, img.width(), mode);
    const AxisCell cy = locate(pt.y, img.height(), mode);
    return blend_grad(corners(img, cx, cy, c), cx, cy);
}

void bilinear_sample_grad(const Image& img, Vec2 pt, BoundaryMode mode, double* values,
                          Vec2* grads) {
    const AxisCell cx = locate(pt.x, img.width(), mode);
    const AxisCell cy = locate(pt.y, img.height(), mode);
    for (int c = 0; c < img.channels(); ++c) {
        const Corners k = corners(img, cx, cy, c);
        if (values != nullptr) {
            values[c] = blend(k, cx.frac, cy.frac);
        }
        if (grads != nullptr) {
            grads[c] = blend_grad(k, cx, cy);
        }
    }
}

Image warp(const Image& img, const FlowMap& displacement, BoundaryMode mode) {
    if (displacement.height() != img.height() || displacement.width() != img.width()) {
        throw DimensionError("warp: displacement does not match image size");
    }
    Image out(img.height(), img.width(), img.channels());
    parallel_for(0, img.height(), [&](int y) {
        for (int x = 0; x < img.width(); ++x) {
            const Vec2 d = displacement.at(y, x);
            const Vec2 pt{x + d.x, y + d.y};
            for (int c = 0; c < img.channels(); ++c) {
                out.at(y, x, c) = bilinear_sample(img, pt, c, mode);
            }
        }
    });
    return out;
}

}  // namespace etraj
