#include "etraj/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "etraj/errors.hpp"
#include "etraj/parallel.hpp"

namespace etraj {

double psnr(const Image& a, const Image& b) {
    require_same_shape(a, b, "psnr");
    const auto x = a.data();
    const auto y = b.data();
    const std::size_t row = static_cast<std::size_t>(a.width()) * a.channels();
    const double sse = ordered_sum(0, a.height(), [&](int r) {
        double s = 0.0;
        const std::size_t lo = static_cast<std::size_t>(r) * row;
        for (std::size_t i = lo; i < lo + row; ++i) {
            const double d = x[i] - y[i];
            s += d * d;
        }
        return s;
    });
    if (sse == 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    const double mse = sse / static_cast<double>(x.size());
    return 10.0 * std::log10(1.0 / mse);
}

namespace {

void require_same_flow(const FlowMap& a, const FlowMap& b, const char* what) {
    if (!a.same_shape(b)) {
        throw DimensionError(std::string(what) + ": flow map shapes differ");
    }
}

template <typename PerPixel>
double mean_over_pixels(const FlowMap& est, const FlowMap& gt, PerPixel per_pixel) {
    const double total = ordered_sum(0, est.height(), [&](int y) {
        double s = 0.0;
        for (int x = 0; x < est.width(); ++x) {
            const Vec2 e = est.at(y, x);
            const Vec2 g = gt.at(y, x);
            const Vec2 minus = e - g;
            const Vec2 plus = e + g;
            s += per_pixel(minus.x * minus.x + minus.y * minus.y, plus.x * plus.x + plus.y * plus.y);
        }
        return s;
    });
    return total / (static_cast<double>(est.height()) * est.width());
}

}  // namespace

double motion_mse(const FlowMap& est, const FlowMap& gt) {
    require_same_flow(est, gt, "motion_mse");
    return mean_over_pixels(est, gt, [](double d2, double s2) { return std::min(d2, s2); });
}

double endpoint_error(const FlowMap& est, const FlowMap& gt) {
    require_same_flow(est, gt, "endpoint_error");
    return mean_over_pixels(est, gt,
                            [](double d2, double s2) { return std::sqrt(std::min(d2, s2)); });
}

namespace {

// HSV (h in degrees) to RGB.
void hsv_to_rgb(double h, double s, double v, double* rgb) {
    const double c = v * s;
    const double hp = std::fmod(h, 360.0) / 60.0;
    const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
    double r = 0, g = 0, b = 0;
    if (hp < 1) { r = c; g = x; }
    else if (hp < 2) { r = x; g = c; }
    else if (hp < 3) { g = c; b = x; }
    else if (hp < 4) { g = x; b = c; }
    else if (hp < 5) { r = x; b = c; }
    else { r = c; b = x; }
    const double m = v - c;
    rgb[0] = r + m;
    rgb[1] = g + m;
    rgb[2] = b + m;
}

}  // namespace

Image flow_to_color(const FlowMap& flow, std::optional<double> max_mag) {
    double scale = 0.0;
    if (max_mag) {
        scale = *max_mag;
    } else {
        std::vector<double> mags;
        mags.reserve(static_cast<std::size_t>(flow.height()) * flow.width());
        for (int y = 0; y < flow.height(); ++y)
            for (int x = 0; x < flow.width(); ++x) {
                const Vec2 f = flow.at(y, x);
                mags.push_back(std::hypot(f.x, f.y));
            }
        std::sort(mags.begin(), mags.end());
        // Nearest-rank 99th percentile.
        const auto rank = static_cast<std::size_t>(std::ceil(0.99 * mags.size()));
        scale = mags[std::max<std::size_t>(rank, 1) - 1];
    }
    const int h = std::max(flow.height(), 2);
    const int w = std::max(flow.width(), 2);
    Image out(h, w, 3, 1.0);
    for (int y = 0; y < flow.height(); ++y) {
        for (int x = 0; x < flow.width(); ++x) {
            const Vec2 f = flow.at(y, x);
            const double mag = std::hypot(f.x, f.y);
            if (mag == 0.0 || scale <= 0.0) {
                continue;
            }
            double hue = std::atan2(f.y, f.x) * 180.0 / M_PI;
            if (hue < 0.0) hue += 360.0;
            double rgb[3];
            hsv_to_rgb(hue, std::min(1.0, mag / scale), 1.0, rgb);
            for (int c = 0; c < 3; ++c) out.at(y, x, c) = rgb[c];
        }
    }
    return out;
}

std::vector<std::vector<Vec2>> trajectory_polylines(const TrajectoryField& traj, int stride,
                                                    int samples) {
    if (stride < 1) {
        throw ArgumentError("stride must be >= 1");
    }
    const bool raw = traj.mode() == ConstraintMode::Zero;
    const OffsetField offsets = raw ? expand(traj, traj.steps()) : resample(traj, samples);
    std::vector<std::vector<Vec2>> lines;
    // A stride beyond the image still draws the central pixel.
    const int y0 = std::min(stride / 2, (traj.height() - 1) / 2);
    const int x0 = std::min(stride / 2, (traj.width() - 1) / 2);
    for (int y = y0; y < traj.height(); y += stride) {
        for (int x = x0; x < traj.width(); x += stride) {
            std::vector<Vec2> line;
            line.reserve(static_cast<std::size_t>(offsets.steps()));
            for (int n = 0; n < offsets.steps(); ++n) {
                line.push_back(Vec2{double(x), double(y)} + offsets.at(n, y, x));
            }
            lines.push_back(std::move(line));
        }
    }
    return lines;
}

namespace {

// Coverage mask with bilinear splatting; keeps the max per pixel.
struct Coverage {
    int h, w;
    std::vector<double> v;

    Coverage(int height, int width) : h(height), w(width), v(static_cast<std::size_t>(height) * width, 0.0) {}

    void splat(Vec2 p, double strength = 1.0) {
        const double fx = std::floor(p.x);
        const double fy = std::floor(p.y);
        const double ax = p.x - fx;
        const double ay = p.y - fy;
        const double wx[2] = {1.0 - ax, ax};
        const double wy[2] = {1.0 - ay, ay};
        for (int j = 0; j < 2; ++j)
            for (int i = 0; i < 2; ++i) {
                const double qx = fx + i;
                const double qy = fy + j;
                if (qx < 0 || qy < 0 || qx >= w || qy >= h) continue;
                double& c = v[static_cast<std::size_t>(qy) * w + static_cast<std::size_t>(qx)];
                c = std::max(c, std::min(1.0, strength * wx[i] * wy[j] * 1.5));
            }
    }

    void segment(Vec2 a, Vec2 b) {
        const Vec2 d = b - a;
        const double len = std::hypot(d.x, d.y);
        const int pieces = std::max(1, static_cast<int>(std::ceil(len / 0.25)));
        for (int k = 0; k <= pieces; ++k) {
            splat(a + (static_cast<double>(k) / pieces) * d);
        }
    }
};

}  // namespace

Image overlay_trajectories(const Image& img, const TrajectoryField& traj, int stride, int samples) {
    if (traj.height() != img.height() || traj.width() != img.width()) {
        throw DimensionError("overlay_trajectories: trajectory does not match image size");
    }
    Image out(img.height(), img.width(), 3);
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
            for (int c = 0; c < 3; ++c)
                out.at(y, x, c) = 0.5 * img.at(y, x, img.channels() == 3 ? c : 0);

    Coverage lines(img.height(), img.width());
    Coverage dots(img.height(), img.width());
    for (const auto& line : trajectory_polylines(traj, stride, samples)) {
        for (std::size_t k = 1; k < line.size(); ++k) {
            const Vec2 d = line[k] - line[k - 1];
            if (d.x != 0.0 || d.y != 0.0) {
                lines.segment(line[k - 1], line[k]);
            }
        }
        dots.splat(line.front(), 2.0);
    }
    const double line_rgb[3] = {1.0, 0.9, 0.1};
    const double dot_rgb[3] = {1.0, 0.1, 0.1};
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * img.width() + x;
            for (int c = 0; c < 3; ++c) {
                double v = out.at(y, x, c);
                v = v * (1.0 - lines.v[i]) + line_rgb[c] * lines.v[i];
                v = v * (1.0 - dots.v[i]) + dot_rgb[c] * dots.v[i];
                out.at(y, x, c) = v;
            }
        }
    }
    return out;
}

}  // namespace etraj
