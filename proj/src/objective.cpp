#include "etraj/objective.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "etraj/blur.hpp"
#include "etraj/errors.hpp"
#include "etraj/parallel.hpp"

namespace etraj {

ImageLoss l2_loss(const Image& b_hat, const Image& b) {
    require_same_shape(b_hat, b, "l2_loss");
    ImageLoss out{0.0, Image(b.height(), b.width(), b.channels())};
    const auto x = b_hat.data();
    const auto y = b.data();
    auto g = out.grad.data();
    const double count = static_cast<double>(x.size());
    const std::size_t row = static_cast<std::size_t>(b.width()) * b.channels();
    const double sum = ordered_sum(0, b.height(), [&](int r) {
        double s = 0.0;
        const std::size_t lo = static_cast<std::size_t>(r) * row;
        for (std::size_t i = lo; i < lo + row; ++i) {
            const double d = x[i] - y[i];
            s += d * d;
            g[i] = 2.0 * d / count;
        }
        return s;
    });
    out.value = sum / count;
    return out;
}

namespace {

// Single-channel working buffer.
struct Plane {
    int h = 0;
    int w = 0;
    std::vector<double> v;

    Plane() = default;
    Plane(int height, int width) : h(height), w(width), v(static_cast<std::size_t>(height) * width) {}
    double& operator()(int y, int x) { return v[static_cast<std::size_t>(y) * w + x]; }
    double operator()(int y, int x) const { return v[static_cast<std::size_t>(y) * w + x]; }
};

const std::array<double, kSsimWindow>& gaussian_taps() {
    static const std::array<double, kSsimWindow> taps = [] {
        std::array<double, kSsimWindow> t{};
        double s = 0.0;
        for (int i = 0; i < kSsimWindow; ++i) {
            const double d = i - kSsimWindow / 2;
            t[static_cast<std::size_t>(i)] = std::exp(-d * d / (2.0 * kSsimSigma * kSsimSigma));
            s += t[static_cast<std::size_t>(i)];
        }
        for (double& v : t) v /= s;
        return t;
    }();
    return taps;
}

Plane channel_plane(const Image& img, int c) {
    Plane p(img.height(), img.width());
    for (int y = 0; y < p.h; ++y)
        for (int x = 0; x < p.w; ++x) p(y, x) = img.at(y, x, c);
    return p;
}

// Separable Gaussian filter without padding; output shrinks by window-1.
Plane filter_valid(const Plane& in) {
    const auto& k = gaussian_taps();
    const int ho = in.h - kSsimWindow + 1;
    const int wo = in.w - kSsimWindow + 1;
    Plane tmp(in.h, wo);
    for (int y = 0; y < in.h; ++y) {
        for (int x = 0; x < wo; ++x) {
            double s = 0.0;
            for (int i = 0; i < kSsimWindow; ++i) s += k[static_cast<std::size_t>(i)] * in(y, x + i);
            tmp(y, x) = s;
        }
    }
    Plane out(ho, wo);
    for (int y = 0; y < ho; ++y) {
        for (int x = 0; x < wo; ++x) {
            double s = 0.0;
            for (int i = 0; i < kSsimWindow; ++i) s += k[static_cast<std::size_t>(i)] * tmp(y + i, x);
            out(y, x) = s;
        }
    }
    return out;
}

// Adjoint of filter_valid: scatters a valid-sized map back to full size.
Plane filter_adjoint(const Plane& m, int h, int w) {
    const auto& k = gaussian_taps();
    Plane tmp(h, m.w);
    for (int y = 0; y < m.h; ++y)
        for (int x = 0; x < m.w; ++x)
            for (int i = 0; i < kSsimWindow; ++i) tmp(y + i, x) += k[static_cast<std::size_t>(i)] * m(y, x);
    Plane out(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < m.w; ++x)
            for (int i = 0; i < kSsimWindow; ++i) out(y, x + i) += k[static_cast<std::size_t>(i)] * tmp(y, x);
    return out;
}

Plane product(const Plane& a, const Plane& b) {
    Plane p(a.h, a.w);
    for (std::size_t i = 0; i < p.v.size(); ++i) p.v[i] = a.v[i] * b.v[i];
    return p;
}

Plane pool2(const Plane& in) {
    Plane out(in.h / 2, in.w / 2);
    for (int y = 0; y < out.h; ++y)
        for (int x = 0; x < out.w; ++x)
            out(y, x) = 0.25 * (in(2 * y, 2 * x) + in(2 * y, 2 * x + 1) + in(2 * y + 1, 2 * x) +
                                in(2 * y + 1, 2 * x + 1));
    return out;
}

// Local moments of one plane pair under the Gaussian window.
struct Moments {
    Plane mx, my, mxx, myy, mxy;
};

Moments moments(const Plane& a, const Plane& b) {
    return {filter_valid(a), filter_valid(b), filter_valid(product(a, a)),
            filter_valid(product(b, b)), filter_valid(product(a, b))};
}

struct SsimMeans {
    double ssim = 0.0;
    double cs = 0.0;
};

SsimMeans ssim_means(const Plane& a, const Plane& b) {
    const Moments m = moments(a, b);
    double ssim_sum = 0.0;
    double cs_sum = 0.0;
    for (std::size_t i = 0; i < m.mx.v.size(); ++i) {
        const double mx = m.mx.v[i];
        const double my = m.my.v[i];
        const double vx = m.mxx.v[i] - mx * mx;
        const double vy = m.myy.v[i] - my * my;
        const double cxy = m.mxy.v[i] - mx * my;
        const double cs = (2.0 * cxy + kSsimC2) / (vx + vy + kSsimC2);
        const double lum = (2.0 * mx * my + kSsimC1) / (mx * mx + my * my + kSsimC1);
        cs_sum += cs;
        ssim_sum += lum * cs;
    }
    const double count = static_cast<double>(m.mx.v.size());
    return {ssim_sum / count, cs_sum / count};
}

constexpr std::array<double, 5> kScaleExponents = {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};

void require_window(int height, int width, int scales) {
    if (scales < 1 || scales > static_cast<int>(kScaleExponents.size())) {
        throw TooSmallForScales("ssim scale count must be in [1, 5], got " + std::to_string(scales));
    }
    const int need = (1 << (scales - 1)) * kSsimWindow;
    if (std::min(height, width) < need) {
        throw TooSmallForScales("image " + std::to_string(height) + "x" + std::to_string(width) +
                                " too small for " + std::to_string(scales) + " ssim scales");
    }
}

}  // namespace

int feasible_ssim_scales(int height, int width, int requested) {
    int s = std::min(requested, static_cast<int>(kScaleExponents.size()));
    while (s >= 1 && std::min(height, width) < (1 << (s - 1)) * kSsimWindow) {
        --s;
    }
    return std::max(s, 0);
}

double ssim(const Image& a, const Image& b) {
    require_same_shape(a, b, "ssim");
    require_window(a.height(), a.width(), 1);
    double total = 0.0;
    for (int c = 0; c < a.channels(); ++c) {
        total += ssim_means(channel_plane(a, c), channel_plane(b, c)).ssim;
    }
    return total / a.channels();
}

double msssim(const Image& a, const Image& b, int scales) {
    require_same_shape(a, b, "msssim");
    require_window(a.height(), a.width(), scales);
    double norm = 0.0;
    for (int j = 0; j < scales; ++j) norm += kScaleExponents[static_cast<std::size_t>(j)];
    double total = 0.0;
    for (int c = 0; c < a.channels(); ++c) {
        Plane pa = channel_plane(a, c);
        Plane pb = channel_plane(b, c);
        double value = 1.0;
        for (int j = 0; j < scales; ++j) {
            const SsimMeans s = ssim_means(pa, pb);
            const double factor = (j + 1 == scales) ? s.ssim : s.cs;
            const double exponent = kScaleExponents[static_cast<std::size_t>(j)] / norm;
            value *= std::pow(std::max(factor, 0.0), exponent);
            if (j + 1 < scales) {
                pa = pool2(pa);
                pb = pool2(pb);
            }
        }
        total += value;
    }
    return total / a.channels();
}

double msssim_loss(const Image& b_hat, const Image& b, int scales) {
    return 1.0 - msssim(b_hat, b, scales);
}

ImageLoss ssim_loss_grad(const Image& b_hat, const Image& b) {
    require_same_shape(b_hat, b, "ssim_loss_grad");
    require_window(b.height(), b.width(), 1);
    ImageLoss out{0.0, Image(b.height(), b.width(), b.channels())};
    const int ho = b.height() - kSsimWindow + 1;
    const int wo = b.width() - kSsimWindow + 1;
    const double scale = 1.0 / (static_cast<double>(ho) * wo * b.channels());
    double ssim_total = 0.0;
    for (int c = 0; c < b.channels(); ++c) {
        const Plane x = channel_plane(b_hat, c);
        const Plane y = channel_plane(b, c);
        const Moments m = moments(x, y);
        // d S / d (mean x), d S / d E[xy], d S / d E[x^2] at every window.
        Plane d_mx(ho, wo), d_mxy(ho, wo), d_mxx(ho, wo);
        for (std::size_t i = 0; i < m.mx.v.size(); ++i) {
            const double mx = m.mx.v[i];
            const double my = m.my.v[i];
            const double a1 = 2.0 * mx * my + kSsimC1;
            const double a2 = 2.0 * (m.mxy.v[i] - mx * my) + kSsimC2;
            const double b1 = mx * mx + my * my + kSsimC1;
            const double b2 = (m.mxx.v[i] - mx * mx) + (m.myy.v[i] - my * my) + kSsimC2;
            const double s = a1 * a2 / (b1 * b2);
            ssim_total += s;
            d_mx.v[i] = (2.0 * my * a2 - 2.0 * my * a1) / (b1 * b2) - s * 2.0 * mx / b1 +
                        s * 2.0 * mx / b2;
            d_mxy.v[i] = 2.0 * a1 / (b1 * b2);
            d_mxx.v[i] = -s / b2;
        }
        const Plane g_mx = filter_adjoint(d_mx, b.height(), b.width());
        const Plane g_mxy = filter_adjoint(d_mxy, b.height(), b.width());
        const Plane g_mxx = filter_adjoint(d_mxx, b.height(), b.width());
        for (int yy = 0; yy < b.height(); ++yy) {
            for (int xx = 0; xx < b.width(); ++xx) {
                const double d = g_mx(yy, xx) + g_mxy(yy, xx) * y(yy, xx) +
                                 2.0 * g_mxx(yy, xx) * x(yy, xx);
                out.grad.at(yy, xx, c) = -scale * d;
            }
        }
    }
    out.value = 1.0 - ssim_total * scale;
    return out;
}

FieldLoss reg_loss(const OffsetField& offsets) {
    FieldLoss out{0.0, OffsetField(offsets.steps(), offsets.height(), offsets.width())};
    const double count = static_cast<double>(offsets.steps()) * offsets.height() * offsets.width();
    const auto v = offsets.data();
    auto g = out.grad.data();
    const std::size_t row = static_cast<std::size_t>(offsets.width()) * 2;
    const int rows = offsets.steps() * offsets.height();
    const double sum = ordered_sum(0, rows, [&](int r) {
        double s = 0.0;
        const std::size_t lo = static_cast<std::size_t>(r) * row;
        for (std::size_t i = lo; i < lo + row; ++i) {
            s += v[i] * v[i];
            g[i] = 2.0 * v[i] / count;
        }
        return s;
    });
    out.value = sum / count;
    return out;
}

FieldLoss tv_loss(const OffsetField& offsets) {
    const int h = offsets.height();
    const int w = offsets.width();
    const int steps = offsets.steps();
    if (h < 2 && w < 2) {
        throw DimensionError("tv_loss needs at least two pixels along one axis");
    }
    FieldLoss out{0.0, OffsetField(steps, h, w)};
    const double hnorm = w > 1 ? 1.0 / (static_cast<double>(w - 1) * h * steps) : 0.0;
    const double vnorm = h > 1 ? 1.0 / (static_cast<double>(w) * (h - 1) * steps) : 0.0;
    auto sign = [](double d) { return d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0); };
    const auto v = offsets.data();
    auto g = out.grad.data();
    auto at = [&](int n, int y, int x, int k) {
        return ((static_cast<std::size_t>(n) * h + y) * w + x) * 2 + static_cast<std::size_t>(k);
    };
    // Each step is independent; within a step the scatter is sequential.
    const double total = ordered_sum(0, steps, [&](int n) {
        double hs = 0.0;
        double vs = 0.0;
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                for (int k = 0; k < 2; ++k) {
                    const std::size_t i = at(n, y, x, k);
                    if (x + 1 < w) {
                        const std::size_t j = at(n, y, x + 1, k);
                        const double d = v[i] - v[j];
                        hs += std::abs(d);
                        g[i] += hnorm * sign(d);
                        g[j] -= hnorm * sign(d);
                    }
                    if (y + 1 < h) {
                        const std::size_t j = at(n, y + 1, x, k);
                        const double d = v[i] - v[j];
                        vs += std::abs(d);
                        g[i] += vnorm * sign(d);
                        g[j] -= vnorm * sign(d);
                    }
                }
            }
        }
        return hs * hnorm + vs * vnorm;
    });
    out.value = total;
    return out;
}

OffsetField tv_kink_weights(const OffsetField& offsets) {
    const int h = offsets.height();
    const int w = offsets.width();
    const int steps = offsets.steps();
    OffsetField out(steps, h, w);
    const double hnorm = w > 1 ? 1.0 / (static_cast<double>(w - 1) * h * steps) : 0.0;
    const double vnorm = h > 1 ? 1.0 / (static_cast<double>(w) * (h - 1) * steps) : 0.0;
    const auto v = offsets.data();
    auto g = out.data();
    auto at = [&](int n, int y, int x, int k) {
        return ((static_cast<std::size_t>(n) * h + y) * w + x) * 2 + static_cast<std::size_t>(k);
    };
    parallel_for(0, steps, [&](int n) {
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                for (int k = 0; k < 2; ++k) {
                    const std::size_t i = at(n, y, x, k);
                    if (x + 1 < w && v[i] == v[at(n, y, x + 1, k)]) {
                        g[i] += hnorm;
                        g[at(n, y, x + 1, k)] += hnorm;
                    }
                    if (y + 1 < h && v[i] == v[at(n, y + 1, x, k)]) {
                        g[i] += vnorm;
                        g[at(n, y + 1, x, k)] += vnorm;
                    }
                }
    });
    return out;
}

TotalLoss total_loss(const Image& sharp, const Image& blurry, const TrajectoryField& traj,
                     int steps, const TotalLossOptions& options) {
    require_same_shape(sharp, blurry, "total_loss");
    if (traj.height() != sharp.height() || traj.width() != sharp.width()) {
        throw DimensionError("total_loss: trajectory field does not match image size");
    }
    const LossWeights& w = options.weights;
    const OffsetField offsets = expand(traj, steps);

    TotalLoss out;
    out.reblurred = create_blur(sharp, offsets, options.boundary);
    ImageLoss l2 = l2_loss(out.reblurred, blurry);
    out.l2 = l2.value;

    const int scales = feasible_ssim_scales(sharp.height(), sharp.width(), options.ssim_scales);
    if (scales > 0) {
        out.ssim = msssim_loss(out.reblurred, blurry, scales);
        if (options.ssim_gradient && w.ssim != 0.0) {
            const ImageLoss s = ssim_loss_grad(out.reblurred, blurry);
            auto g = l2.grad.data();
            const auto sg = s.grad.data();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += w.ssim * sg[i];
        }
    }

    const FieldLoss reg = reg_loss(offsets);
    const FieldLoss tv = tv_loss(offsets);
    out.reg = reg.value;
    out.tv = tv.value;
    out.value = out.l2 + w.ssim * out.ssim + w.reg * out.reg + w.tv * out.tv;

    OffsetField grad = blur_grad_wrt_offsets(sharp, offsets, l2.grad, options.boundary);
    auto g = grad.data();
    const auto rg = reg.grad.data();
    const auto tg = tv.grad.data();
    for (std::size_t i = 0; i < g.size(); ++i) {
        g[i] += w.reg * rg[i] + w.tv * tg[i];
    }
    out.grad = param_jacobian_apply(traj, grad);
    if (w.tv != 0.0) {
        OffsetField kinks = tv_kink_weights(offsets);
        for (double& k : kinks.data()) k *= w.tv;
        out.tv_kink = param_jacobian_abs_apply(traj, kinks);
    } else {
        out.tv_kink = TrajectoryField(traj.mode(), traj.steps(), traj.height(), traj.width());
    }
    return out;
}

}  // namespace etraj
