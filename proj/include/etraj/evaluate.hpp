#pragma once

#include <optional>
#include <vector>

#include "etraj/image.hpp"
#include "etraj/trajectory.hpp"

namespace etraj {

/// 10 log10(1 / MSE) over all samples. Identical images give +infinity.
double psnr(const Image& a, const Image& b);

/// Mean over pixels of min(|est - gt|^2, |est + gt|^2). The sign of a motion
/// recovered from a single blurry image is ambiguous, so both are accepted.
double motion_mse(const FlowMap& est, const FlowMap& gt);

// Mean over pixels of min(|est - gt|, |est + gt|).
double endpoint_error(const FlowMap& est, const FlowMap& gt);

/// Hue-wheel flow coloring: hue follows atan2(dy, dx), saturation grows with
/// |flow| / max_mag (clamped to 1) at full value, so zero flow is white.
/// Without max_mag the 99th-percentile magnitude is used.
Image flow_to_color(const FlowMap& flow, std::optional<double> max_mag = std::nullopt);

// Sample positions (pixel + offset) of the trajectories drawn by
// overlay_trajectories, one polyline per sampled pixel.
std::vector<std::vector<Vec2>> trajectory_polylines(const TrajectoryField& traj, int stride,
                                                    int samples);

/// Draws every `stride`-th pixel's trajectory as an anti-aliased polyline of
/// `samples` points over a dimmed RGB copy of `img`, with a dot at the first
/// step. Zero-constraint fields draw their stored steps.
Image overlay_trajectories(const Image& img, const TrajectoryField& traj, int stride,
                           int samples = 15);

}  // namespace etraj
