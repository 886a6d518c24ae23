#pragma once

#include <vector>

#include "etraj/image.hpp"

namespace etraj {

// Default exposure discretization.
inline constexpr int kDefaultSteps = 15;

/// Blur creation: B(p) = (1/N) sum_n L(p + dp_n), sampled bilinearly.
/// Offsets are shared across channels.
Image create_blur(const Image& sharp, const OffsetField& offsets,
                  BoundaryMode mode = BoundaryMode::ClampToEdge);

/// Dense per-pixel kernel equivalent to the offsets at one output pixel.
struct BlurKernel {
    int radius = 0;
    std::vector<double> weights;  // (2R+1)^2, row-major, centered on the pixel

    int side() const { return 2 * radius + 1; }
    // Weight at relative displacement (dx, dy), |dx|, |dy| <= radius.
    double at(int dx, int dy) const {
        return weights[static_cast<std::size_t>((dy + radius) * side() + (dx + radius))];
    }
    double sum() const;
};

/// Distributes weight 1/N over the four lattice neighbors of each sample
/// position with bilinear weights. Taps that fall outside a height x width
/// raster are dropped, so the kernel sums to less than 1 near borders.
/// Throws SupportTooSmall if radius < ceil(max |dp|) + 1 at this pixel.
BlurKernel equivalent_kernel(const OffsetField& offsets, int x, int y, int radius);

// Blur by explicitly building and applying the equivalent kernel at every
// pixel. Matches create_blur with ZeroOutside.
Image equivalent_kernel_blur(const Image& sharp, const OffsetField& offsets);

/// Gradient of a scalar loss with respect to every offset, given the loss
/// gradient with respect to the blurred image:
///   grad[n][p] = (1/N) sum_c upstream(p, c) * d sample(sharp, p + dp_n, c) / d dp
OffsetField blur_grad_wrt_offsets(const Image& sharp, const OffsetField& offsets,
                                  const Image& upstream,
                                  BoundaryMode mode = BoundaryMode::ClampToEdge);

}  // namespace etraj
