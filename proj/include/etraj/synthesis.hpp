#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "etraj/blur.hpp"
#include "etraj/image.hpp"
#include "etraj/trajectory.hpp"

namespace etraj {

enum class MotionModel { GlobalTranslation, Affine, TwoLayer };

// Accepts "translate", "affine", "two-layer".
MotionModel parse_motion_model(std::string_view name);

struct SynthConfig {
    MotionModel motion_model = MotionModel::GlobalTranslation;
    double max_displacement = 8.0;
    // Lower bound on the magnitude of sampled translations.
    double min_displacement = 0.0;
    // Area fraction of the moving rectangle for TwoLayer.
    double object_fraction = 0.25;
    int n_steps = kDefaultSteps;
    std::uint64_t seed = 0;
};

/// Random per-pixel motion (endpoint-to-endpoint vectors) with magnitude at
/// most max_displacement everywhere. Components are rounded to f32 so the
/// flow survives ETRF storage unchanged. Deterministic in the seed.
///
///   GlobalTranslation  one vector for every pixel
///   Affine             rotation <= 3 deg, scale in [0.98, 1.02] about the image
///                      center plus a translation, clamped in magnitude
///   TwoLayer           affine background with an axis-aligned rectangle of
///                      about object_fraction of the area moving independently
FlowMap generate_flow(int height, int width, const SynthConfig& config);

// Linear trajectory whose first offset is flow / 2.
TrajectoryField flow_to_trajectory(const FlowMap& flow, int steps);

// create_blur along flow_to_trajectory(flow, steps).
Image render_blur(const Image& sharp, const FlowMap& flow, int steps,
                  BoundaryMode mode = BoundaryMode::ClampToEdge);

struct ManifestEntry {
    std::filesystem::path blurry;
    std::filesystem::path sharp;
    std::filesystem::path flow;
    std::uint64_t seed = 0;
};

/// For every PNG in sharp_dir (sorted by name) writes `count_per_image`
/// instances into out_dir: <stem>_<k>_blurry.png, <stem>_<k>_sharp.png and
/// <stem>_<k>_flow.etrf (Linear, dp = flow / 2), plus manifest.tsv with
/// tab-separated blurry, sharp, flow paths (relative to out_dir) and seed.
/// Blurry images are rendered from the stored sharp PNG, so re-rendering the
/// stored files reproduces the stored blurry image.
std::vector<ManifestEntry> make_dataset(const std::filesystem::path& sharp_dir,
                                        const std::filesystem::path& out_dir,
                                        int count_per_image, const SynthConfig& config);

// Seed of instance `index` derived from the base seed.
std::uint64_t instance_seed(std::uint64_t base, std::uint64_t index);

}  // namespace etraj
