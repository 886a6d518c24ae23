#pragma once

#include "etraj/image.hpp"
#include "etraj/trajectory.hpp"

namespace etraj {

struct LossWeights {
    double ssim = 0.1;
    double reg = 0.00002;
    double tv = 0.0005;
};

struct ImageLoss {
    double value = 0.0;
    Image grad;  // d value / d first argument
};

struct FieldLoss {
    double value = 0.0;
    OffsetField grad;
};

// Mean squared difference over all samples; gradient 2 (b_hat - b) / count.
ImageLoss l2_loss(const Image& b_hat, const Image& b);

// SSIM constants on the [0, 1] range: 11x11 Gaussian window, sigma 1.5.
inline constexpr int kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;
inline constexpr double kSsimC1 = 0.01 * 0.01;
inline constexpr double kSsimC2 = 0.03 * 0.03;
inline constexpr int kDefaultSsimScales = 3;

/// Mean single-scale SSIM over all valid window positions and channels.
/// Throws TooSmallForScales when either dimension is below the window size.
double ssim(const Image& a, const Image& b);

/// Multi-scale SSIM with 2x2 mean pooling between scales. Contrast-structure
/// terms of the finer scales and the full SSIM of the coarsest scale are
/// combined with the standard per-scale exponents, renormalized to the first
/// `scales` entries. Negative factors are clamped to 0 before exponentiation.
/// Requires min(height, width) >= 2^(scales-1) * 11.
double msssim(const Image& a, const Image& b, int scales = kDefaultSsimScales);

// 1 - msssim(b_hat, b, scales).
double msssim_loss(const Image& b_hat, const Image& b, int scales = kDefaultSsimScales);

// Largest scale count <= requested that fits the image, or 0 if none does.
int feasible_ssim_scales(int height, int width, int requested);

// 1 - ssim(b_hat, b) and its analytic gradient with respect to b_hat.
ImageLoss ssim_loss_grad(const Image& b_hat, const Image& b);

// (1 / (N w h)) sum of squared offset norms.
FieldLoss reg_loss(const OffsetField& offsets);

/// Anisotropic L1 total variation of every offset map, both components,
/// normalized per direction by the number of differences and averaged over
/// steps. A direction with extent 1 contributes nothing. The subgradient is 0
/// where a difference is exactly 0.
FieldLoss tv_loss(const OffsetField& offsets);

/// Per offset sample, the summed TV normalization of neighbour differences
/// that are exactly zero. Moving that sample by d in either direction raises
/// tv_loss by at least this weight times |d|.
OffsetField tv_kink_weights(const OffsetField& offsets);

struct TotalLossOptions {
    LossWeights weights;
    BoundaryMode boundary = BoundaryMode::ClampToEdge;
    // Requested MS-SSIM scales; reduced to what the image size allows.
    int ssim_scales = kDefaultSsimScales;
    // When set, the SSIM term also contributes a gradient, taken from
    // single-scale SSIM. Otherwise it only enters the scalar.
    bool ssim_gradient = false;
};

struct TotalLoss {
    double value = 0.0;
    double l2 = 0.0;
    double ssim = 0.0;  // 1 - MS-SSIM, 0 when the image is too small for one scale
    double reg = 0.0;
    double tv = 0.0;
    TrajectoryField grad;
    // Per parameter, the weighted TV slope hidden at tied neighbours: moving
    // that parameter alone by d changes the loss by at least
    // |d| * (tv_kink - |grad|) when tv_kink exceeds |grad|.
    TrajectoryField tv_kink;
    Image reblurred;
};

/// Cyclic reblur objective at B_hat = create_blur(sharp, expand(traj, steps)):
///   L = L2 + w.ssim * L_ssim + w.reg * L_reg + w.tv * L_tv
/// with the gradient taken with respect to the trajectory parameters.
TotalLoss total_loss(const Image& sharp, const Image& blurry, const TrajectoryField& traj,
                     int steps, const TotalLossOptions& options = {});

}  // namespace etraj
