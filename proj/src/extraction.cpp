#include "etraj/extraction.hpp"

#include <string>

#include "etraj/errors.hpp"
#include "etraj/parallel.hpp"
#include "etraj/sampler.hpp"

namespace etraj {

std::vector<Image> extract_frames(const Image& sharp, const TrajectoryField& traj, int frames,
                                  BoundaryMode mode) {
    if (traj.height() != sharp.height() || traj.width() != sharp.width()) {
        throw DimensionError("extract_frames: trajectory does not match image size");
    }
    require_odd_steps(frames);
    if (traj.mode() == ConstraintMode::Zero && frames != traj.steps()) {
        throw UnsupportedMode("zero-constraint trajectories only yield their own " +
                              std::to_string(traj.steps()) + " frames");
    }
    const OffsetField offsets =
        traj.mode() == ConstraintMode::Zero ? expand(traj, frames) : resample(traj, frames);
    std::vector<Image> out;
    out.reserve(static_cast<std::size_t>(frames));
    FlowMap flow(sharp.height(), sharp.width());
    for (int n = 0; n < frames; ++n) {
        for (int y = 0; y < sharp.height(); ++y)
            for (int x = 0; x < sharp.width(); ++x) flow.set(y, x, offsets.at(n, y, x));
        out.push_back(warp(sharp, flow, mode));
    }
    return out;
}

OffsetField ma_sampling_offsets(const TrajectoryField& traj, double alpha) {
    if (traj.mode() == ConstraintMode::Zero) {
        throw UnsupportedMode("motion-aware sampling needs a closed-form trajectory");
    }
    OffsetField out = resample(traj, kMaTaps);
    for (double& v : out.data()) v *= alpha;
    return out;
}

OffsetField square_grid_sampling(int height, int width) {
    OffsetField out(kMaTaps, height, width);
    for (int n = 0; n < kMaTaps; ++n) {
        const Vec2 d{double(n % 3 - 1), double(n / 3 - 1)};
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x) out.set(n, y, x, d);
    }
    return out;
}

Image motion_aware_conv(const Image& feature, const MaWeights& weights,
                        const OffsetField& sampling, BoundaryMode mode) {
    if (sampling.steps() != kMaTaps || sampling.height() != feature.height() ||
        sampling.width() != feature.width()) {
        throw DimensionError("motion_aware_conv: sampling must have 9 taps and match the feature map");
    }
    if (weights.in_channels != feature.channels() || weights.out_channels < 1 ||
        weights.w.size() != static_cast<std::size_t>(kMaTaps) * weights.in_channels * weights.out_channels) {
        throw DimensionError("motion_aware_conv: weights do not match the channel count");
    }
    const int cin = feature.channels();
    const int cout = weights.out_channels;
    Image out(feature.height(), feature.width(), cout);
    parallel_for(0, feature.height(), [&](int y) {
        std::vector<double> x_val(static_cast<std::size_t>(cin));
        for (int x = 0; x < feature.width(); ++x) {
            for (int n = 0; n < kMaTaps; ++n) {
                const Vec2 d = sampling.at(n, y, x);
                bilinear_sample_grad(feature, {x + d.x, y + d.y}, mode, x_val.data(), nullptr);
                for (int i = 0; i < cin; ++i) {
                    for (int o = 0; o < cout; ++o) {
                        out.at(y, x, o) += weights.at(n, i, o) * x_val[static_cast<std::size_t>(i)];
                    }
                }
            }
        }
    });
    return out;
}

}  // namespace etraj
