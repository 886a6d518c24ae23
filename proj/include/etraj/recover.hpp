#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "etraj/blur.hpp"
#include "etraj/image.hpp"
#include "etraj/objective.hpp"
#include "etraj/trajectory.hpp"

namespace etraj {

struct RecoveryConfig {
    ConstraintMode mode = ConstraintMode::Linear;
    int steps = kDefaultSteps;
    LossWeights weights;
    BoundaryMode boundary = BoundaryMode::ClampToEdge;
    // Adam iterations per pyramid level.
    int iterations = 500;
    // Initial learning rate in pixels, decayed linearly to 0 within each level.
    // Steps that would raise the loss are rejected and the rate halved.
    double step_size = 0.1;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    int pyramid_levels = 3;
    // Unused by the deterministic solver; kept so configs round-trip.
    std::uint64_t seed = 0;
    int ssim_scales = kDefaultSsimScales;
    // Include the single-scale SSIM gradient in the descent direction.
    bool ssim_gradient = true;
    // Largest |dp| (full-resolution px) tried by the initial candidate search;
    // 0 starts from the zero trajectory.
    double search_radius = 8.0;
};

struct RecoveryReport {
    double final_loss = 0.0;
    std::vector<double> loss_trace;
    double reblur_psnr = 0.0;
    // NaN when the image is smaller than one SSIM window.
    double reblur_ssim = 0.0;
    int iterations_run = 0;
    // Index into loss_trace where each pyramid level starts, coarsest first.
    std::vector<int> level_starts;
};

/// Fits per-pixel trajectory parameters so that blurring `sharp` reproduces
/// `blurry`, coarse to fine over a 2x2 mean-pooling pyramid.
///
/// The coarsest level starts from a brute-force search over uniform linear
/// candidates scored by windowed reblur error. Each finer level upsamples the
/// parameters bilinearly with values doubled, then tries small linear shifts
/// per pixel. Curves are flipped in time to agree with the dominant motion
/// axis, and every level runs Adam on total_loss. Deterministic for a given
/// config.
///
/// Throws DimensionError for mismatched images, ArgumentError for invalid
/// configs and NonFiniteLoss if the objective diverges.
std::pair<TrajectoryField, RecoveryReport> recover(const Image& blurry, const Image& sharp,
                                                   const RecoveryConfig& config = {});

// expand then create_blur.
Image reblur(const Image& sharp, const TrajectoryField& traj, int steps,
             BoundaryMode mode = BoundaryMode::ClampToEdge);

// Halves each dimension (floor), averaging 2x2 blocks.
Image downsample2(const Image& img);

// Bilinear resize of a parameter field to (height, width), values scaled by `gain`.
TrajectoryField upsample_params(const TrajectoryField& traj, int height, int width, double gain);

/// Plain-text report:
///   final_loss: <v>
///   reblur_psnr: <v>
///   reblur_ssim: <v>
///   iterations_run: <n>
/// followed by one loss value per line.
void write_report(const RecoveryReport& report, const std::filesystem::path& path);

// Shortest round-trip decimal form; integral values get a trailing ".0".
std::string format_number(double v);

}  // namespace etraj
