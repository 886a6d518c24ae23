#include "etraj/synthesis.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "etraj/errors.hpp"
#include "etraj/io.hpp"

namespace etraj {

MotionModel parse_motion_model(std::string_view name) {
    if (name == "translate") return MotionModel::GlobalTranslation;
    if (name == "affine") return MotionModel::Affine;
    if (name == "two-layer") return MotionModel::TwoLayer;
    throw ArgumentError("unknown motion model '" + std::string(name) + "'");
}

std::uint64_t instance_seed(std::uint64_t base, std::uint64_t index) {
    // splitmix64 of the combined value
    std::uint64_t z = base + (index + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

namespace {

constexpr double kMaxRotationDeg = 3.0;
constexpr double kScaleSpread = 0.02;

double f32(double v) { return static_cast<double>(static_cast<float>(v)); }

// Clamps |v| to max_mag and rounds the components to f32 without crossing the bound.
Vec2 finalize(Vec2 v, double max_mag) {
    const double mag = std::hypot(v.x, v.y);
    if (mag > max_mag) {
        v = (mag > 0.0 ? max_mag / mag : 0.0) * v;
    }
    Vec2 r{f32(v.x), f32(v.y)};
    while (std::hypot(r.x, r.y) > max_mag) {
        r = {f32(r.x * (1.0 - 1e-7)), f32(r.y * (1.0 - 1e-7))};
    }
    return r;
}

class Sampler {
public:
    explicit Sampler(std::uint64_t seed) : engine_(seed) {}
    double uniform(double lo, double hi) {
        return lo + (hi - lo) * std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
    }
    Vec2 translation(double lo, double hi) {
        const double ang = uniform(0.0, 2.0 * M_PI);
        const double mag = uniform(std::min(lo, hi), hi);
        return {mag * std::cos(ang), mag * std::sin(ang)};
    }

private:
    std::mt19937_64 engine_;
};

struct Affine {
    double a, b, c, d;  // (s R - I)
    Vec2 t;
    Vec2 center;

    Vec2 at(int y, int x) const {
        const double px = x - center.x;
        const double py = y - center.y;
        return {a * px + b * py + t.x, c * px + d * py + t.y};
    }
};

Affine random_affine(Sampler& rng, int height, int width, const SynthConfig& cfg) {
    const double theta = rng.uniform(-kMaxRotationDeg, kMaxRotationDeg) * M_PI / 180.0;
    const double s = rng.uniform(1.0 - kScaleSpread, 1.0 + kScaleSpread);
    Affine m;
    m.a = s * std::cos(theta) - 1.0;
    m.b = -s * std::sin(theta);
    m.c = s * std::sin(theta);
    m.d = s * std::cos(theta) - 1.0;
    m.t = rng.translation(cfg.min_displacement, cfg.max_displacement);
    m.center = {(width - 1) / 2.0, (height - 1) / 2.0};
    return m;
}

}  // namespace

FlowMap generate_flow(int height, int width, const SynthConfig& cfg) {
    if (!(cfg.max_displacement >= 0.0)) {
        throw ArgumentError("max_displacement must be >= 0");
    }
    if (!(cfg.object_fraction >= 0.0 && cfg.object_fraction <= 1.0)) {
        throw ArgumentError("object_fraction must lie in [0, 1]");
    }
    FlowMap flow(height, width);
    Sampler rng(cfg.seed);
    const double cap = cfg.max_displacement;
    switch (cfg.motion_model) {
    case MotionModel::GlobalTranslation: {
        const Vec2 v = finalize(rng.translation(cfg.min_displacement, cap), cap);
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x) flow.set(y, x, v);
        break;
    }
    case MotionModel::Affine:
    case MotionModel::TwoLayer: {
        const Affine bg = random_affine(rng, height, width, cfg);
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x) flow.set(y, x, finalize(bg.at(y, x), cap));
        if (cfg.motion_model == MotionModel::Affine || cfg.object_fraction == 0.0) {
            break;
        }
        const double area = cfg.object_fraction * height * width;
        const double aspect = rng.uniform(0.5, 2.0);
        const int rw = std::clamp(static_cast<int>(std::lround(std::sqrt(area * aspect))), 1, width);
        const int rh = std::clamp(static_cast<int>(std::lround(area / rw)), 1, height);
        const int x0 = static_cast<int>(std::floor(rng.uniform(0.0, width - rw + 1.0 - 1e-9)));
        const int y0 = static_cast<int>(std::floor(rng.uniform(0.0, height - rh + 1.0 - 1e-9)));
        const Vec2 obj = finalize(rng.translation(cfg.min_displacement, cap), cap);
        for (int y = y0; y < y0 + rh; ++y)
            for (int x = x0; x < x0 + rw; ++x) flow.set(y, x, obj);
        break;
    }
    }
    return flow;
}

TrajectoryField flow_to_trajectory(const FlowMap& flow, int steps) {
    TrajectoryField traj(ConstraintMode::Linear, steps, flow.height(), flow.width());
    for (int y = 0; y < flow.height(); ++y)
        for (int x = 0; x < flow.width(); ++x) {
            const Vec2 f = flow.at(y, x);
            auto p = traj.pixel(y, x);
            p[0] = 0.5 * f.x;
            p[1] = 0.5 * f.y;
        }
    return traj;
}

Image render_blur(const Image& sharp, const FlowMap& flow, int steps, BoundaryMode mode) {
    if (flow.height() != sharp.height() || flow.width() != sharp.width()) {
        throw DimensionError("render_blur: flow does not match image size");
    }
    return create_blur(sharp, expand(flow_to_trajectory(flow, steps), steps), mode);
}

std::vector<ManifestEntry> make_dataset(const std::filesystem::path& sharp_dir,
                                        const std::filesystem::path& out_dir,
                                        int count_per_image, const SynthConfig& config) {
    namespace fs = std::filesystem;
    if (count_per_image < 0) {
        throw ArgumentError("count must be >= 0");
    }
    require_odd_steps(config.n_steps);
    std::error_code ec;
    if (!fs::is_directory(sharp_dir, ec)) {
        throw IoError("not a directory: " + sharp_dir.string());
    }
    std::vector<fs::path> inputs;
    for (const auto& entry : fs::directory_iterator(sharp_dir)) {
        auto ext = entry.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
        if (entry.is_regular_file() && ext == ".png") {
            inputs.push_back(entry.path());
        }
    }
    std::sort(inputs.begin(), inputs.end());

    fs::create_directories(out_dir, ec);
    if (ec) {
        throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
    }
    std::vector<ManifestEntry> manifest;
    std::uint64_t index = 0;
    for (const fs::path& input : inputs) {
        if (count_per_image == 0) {
            break;
        }
        const Image sharp = load_image(input);
        for (int k = 0; k < count_per_image; ++k, ++index) {
            SynthConfig cfg = config;
            cfg.seed = instance_seed(config.seed, index);
            const FlowMap flow = generate_flow(sharp.height(), sharp.width(), cfg);
            const Image blurry = render_blur(sharp, flow, cfg.n_steps);

            char tag[16];
            std::snprintf(tag, sizeof(tag), "_%03d", k);
            const std::string stem = input.stem().string() + tag;
            ManifestEntry e{stem + "_blurry.png", stem + "_sharp.png", stem + "_flow.etrf", cfg.seed};
            save_image(blurry, out_dir / e.blurry);
            save_image(sharp, out_dir / e.sharp);
            write_offsets(flow_to_trajectory(flow, cfg.n_steps), out_dir / e.flow);
            manifest.push_back(std::move(e));
        }
    }

    std::ofstream out(out_dir / "manifest.tsv", std::ios::binary);
    if (!out) {
        throw IoError("cannot write manifest in " + out_dir.string());
    }
    for (const ManifestEntry& e : manifest) {
        out << e.blurry.generic_string() << '\t' << e.sharp.generic_string() << '\t'
            << e.flow.generic_string() << '\t' << e.seed << '\n';
    }
    if (!out) {
        throw IoError("failed writing manifest in " + out_dir.string());
    }
    return manifest;
}

}  // namespace etraj
