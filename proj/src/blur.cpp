#include "etraj/blur.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "etraj/errors.hpp"
#include "etraj/parallel.hpp"
#include "etraj/sampler.hpp"

namespace etraj {

namespace {

void require_matching(const Image& img, const OffsetField& offsets, const char* what) {
    if (offsets.height() != img.height() || offsets.width() != img.width()) {
        throw DimensionError(std::string(what) + ": offset field " +
                             std::to_string(offsets.height()) + "x" +
                             std::to_string(offsets.width()) + " does not match image " +
                             std::to_string(img.height()) + "x" + std::to_string(img.width()));
    }
}

}  // namespace

Image create_blur(const Image& sharp, const OffsetField& offsets, BoundaryMode mode) {
    require_matching(sharp, offsets, "create_blur");
    const int channels = sharp.channels();
    const int steps = offsets.steps();
    Image out(sharp.height(), sharp.width(), channels);
    parallel_for(0, sharp.height(), [&](int y) {
        std::vector<double> values(static_cast<std::size_t>(channels));
        std::vector<long double> acc(static_cast<std::size_t>(channels));
        for (int x = 0; x < sharp.width(); ++x) {
            std::fill(acc.begin(), acc.end(), 0.0L);
            for (int n = 0; n < steps; ++n) {
                const Vec2 d = offsets.at(n, y, x);
                bilinear_sample_grad(sharp, {x + d.x, y + d.y}, mode, values.data(), nullptr);
                for (int c = 0; c < channels; ++c) {
                    acc[static_cast<std::size_t>(c)] += values[static_cast<std::size_t>(c)];
                }
            }
            for (int c = 0; c < channels; ++c) {
                out.at(y, x, c) = static_cast<double>(acc[static_cast<std::size_t>(c)] / steps);
            }
        }
    });
    return out;
}

double BlurKernel::sum() const {
    double s = 0.0;
    for (double w : weights) {
        s += w;
    }
    return s;
}

BlurKernel equivalent_kernel(const OffsetField& offsets, int x, int y, int radius) {
    double reach = 0.0;
    for (int n = 0; n < offsets.steps(); ++n) {
        const Vec2 d = offsets.at(n, y, x);
        reach = std::max({reach, std::abs(d.x), std::abs(d.y)});
    }
    const int needed = static_cast<int>(std::ceil(reach)) + 1;
    if (radius < needed) {
        throw SupportTooSmall("kernel radius " + std::to_string(radius) + " below required " +
                              std::to_string(needed));
    }
    BlurKernel k;
    k.radius = radius;
    k.weights.assign(static_cast<std::size_t>(k.side() * k.side()), 0.0);
    for (int n = 0; n < offsets.steps(); ++n) {
        const Vec2 d = offsets.at(n, y, x);
        const double sx = x + d.x;
        const double sy = y + d.y;
        const double fx0 = std::floor(sx);
        const double fy0 = std::floor(sy);
        const int x0 = static_cast<int>(fx0);
        const int y0 = static_cast<int>(fy0);
        const double ax = sx - fx0;
        const double ay = sy - fy0;
        const double wx[2] = {1.0 - ax, ax};
        const double wy[2] = {1.0 - ay, ay};
        for (int j = 0; j < 2; ++j) {
            for (int i = 0; i < 2; ++i) {
                const int qx = x0 + i;
                const int qy = y0 + j;
                if (qx < 0 || qy < 0 || qx >= offsets.width() || qy >= offsets.height()) {
                    continue;
                }
                const int rx = qx - x + radius;
                const int ry = qy - y + radius;
                k.weights[static_cast<std::size_t>(ry * k.side() + rx)] += wx[i] * wy[j];
            }
        }
    }
    for (double& w : k.weights) {
        w /= offsets.steps();
    }
    return k;
}

Image equivalent_kernel_blur(const Image& sharp, const OffsetField& offsets) {
    require_matching(sharp, offsets, "equivalent_kernel_blur");
    Image out(sharp.height(), sharp.width(), sharp.channels());
    for (int y = 0; y < sharp.height(); ++y) {
        for (int x = 0; x < sharp.width(); ++x) {
            double reach = 0.0;
            for (int n = 0; n < offsets.steps(); ++n) {
                const Vec2 d = offsets.at(n, y, x);
                reach = std::max({reach, std::abs(d.x), std::abs(d.y)});
            }
            const BlurKernel k =
                equivalent_kernel(offsets, x, y, static_cast<int>(std::ceil(reach)) + 1);
            for (int c = 0; c < sharp.channels(); ++c) {
                double acc = 0.0;
                for (int dy = -k.radius; dy <= k.radius; ++dy) {
                    for (int dx = -k.radius; dx <= k.radius; ++dx) {
                        const int qx = x + dx;
                        const int qy = y + dy;
                        if (qx < 0 || qy < 0 || qx >= sharp.width() || qy >= sharp.height()) {
                            continue;
                        }
                        acc += k.at(dx, dy) * sharp.at(qy, qx, c);
                    }
                }
                out.at(y, x, c) = acc;
            }
        }
    }
    return out;
}

OffsetField blur_grad_wrt_offsets(const Image& sharp, const OffsetField& offsets,
                                  const Image& upstream, BoundaryMode mode) {
    require_matching(sharp, offsets, "blur_grad_wrt_offsets");
    require_same_shape(sharp, upstream, "blur_grad_wrt_offsets");
    const int channels = sharp.channels();
    const int steps = offsets.steps();
    const double share = 1.0 / steps;
    OffsetField grad(steps, offsets.height(), offsets.width());
    parallel_for(0, sharp.height(), [&](int y) {
        std::vector<Vec2> g(static_cast<std::size_t>(channels));
        for (int x = 0; x < sharp.width(); ++x) {
            for (int n = 0; n < steps; ++n) {
                const Vec2 d = offsets.at(n, y, x);
                bilinear_sample_grad(sharp, {x + d.x, y + d.y}, mode, nullptr, g.data());
                Vec2 total;
                for (int c = 0; c < channels; ++c) {
                    const double up = upstream.at(y, x, c);
                    total = total + up * g[static_cast<std::size_t>(c)];
                }
                grad.set(n, y, x, share * total);
            }
        }
    });
    return grad;
}

}  // namespace etraj
