#pragma once

#include <vector>

#include "etraj/image.hpp"
#include "etraj/trajectory.hpp"

namespace etraj {

/// M sharp frames across the exposure: frame k = warp(sharp, offsets_k) with
/// offsets from resample(traj, M), ordered n = 0 .. M-1. The middle frame is
/// the input. Zero-constraint fields only support M equal to their own step
/// count (UnsupportedMode otherwise).
std::vector<Image> extract_frames(const Image& sharp, const TrajectoryField& traj, int frames,
                                  BoundaryMode mode = BoundaryMode::ClampToEdge);

inline constexpr int kMaTaps = 9;
inline constexpr double kMaAlpha = 0.1;

/// Sampling pattern of the motion-aware 3x3 filter: the curve evaluated at 9
/// equispaced times u in [-1, 1], scaled by alpha. Throws UnsupportedMode for
/// Zero.
OffsetField ma_sampling_offsets(const TrajectoryField& traj, double alpha = kMaAlpha);

/// Tap weights of a motion-aware convolution, indexed [tap][in][out].
struct MaWeights {
    int in_channels = 0;
    int out_channels = 0;
    std::vector<double> w;

    MaWeights(int in, int out) : in_channels(in), out_channels(out), w(static_cast<std::size_t>(kMaTaps) * in * out, 0.0) {}
    double& at(int tap, int in, int out) {
        return w[(static_cast<std::size_t>(tap) * in_channels + in) * out_channels + out];
    }
    double at(int tap, int in, int out) const {
        return w[(static_cast<std::size_t>(tap) * in_channels + in) * out_channels + out];
    }
};

/// y(p, o) = sum over taps n and inputs i of w[n][i][o] * x(p + sampling_n(p), i),
/// with bilinear sampling. Throws DimensionError unless sampling has 9 steps
/// and matches the feature size, and the weights match the channel count.
Image motion_aware_conv(const Image& feature, const MaWeights& weights,
                        const OffsetField& sampling,
                        BoundaryMode mode = BoundaryMode::ClampToEdge);

// The fixed 3x3 lattice {(-1,-1) .. (1,1)} in row-major tap order.
OffsetField square_grid_sampling(int height, int width);

}  // namespace etraj
