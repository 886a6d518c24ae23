#pragma once

#include "etraj/image.hpp"

namespace etraj {

/// Bilinear interpolation of channel `c` at continuous position `pt`.
///
/// ClampToEdge clamps the coordinates into [0, W-1] x [0, H-1] first.
/// ZeroOutside treats every lattice neighbor outside the raster as 0.
double bilinear_sample(const Image& img, Vec2 pt, int c,
                       BoundaryMode mode = BoundaryMode::ClampToEdge);

/// Partial derivatives of bilinear_sample with respect to (x, y).
///
/// Exact inside a cell. On lattice lines the cell of (floor(x), floor(y)) is
/// used, i.e. the right-sided derivative. Under ClampToEdge the derivative is 0
/// along any axis whose coordinate lies outside [0, extent-1), since moving
/// rightward/downward from there is clamped.
Vec2 bilinear_grad(const Image& img, Vec2 pt, int c,
                   BoundaryMode mode = BoundaryMode::ClampToEdge);

// Value and gradient from the same cell lookup, for all channels at once.
// `values` and `grads` must hold img.channels() entries.
void bilinear_sample_grad(const Image& img, Vec2 pt, BoundaryMode mode, double* values,
                          Vec2* grads);

// output(x, y, c) = bilinear_sample(img, (x + dx, y + dy), c) (backward warp).
Image warp(const Image& img, const FlowMap& displacement,
           BoundaryMode mode = BoundaryMode::ClampToEdge);

}  // namespace etraj
