#include "etraj/recover.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <span>
#include <string>

#include "etraj/errors.hpp"
#include "etraj/evaluate.hpp"
#include "etraj/parallel.hpp"
#include "etraj/sampler.hpp"

namespace etraj {

Image reblur(const Image& sharp, const TrajectoryField& traj, int steps, BoundaryMode mode) {
    return create_blur(sharp, expand(traj, steps), mode);
}

Image downsample2(const Image& img) {
    const int h = img.height() / 2;
    const int w = img.width() / 2;
    Image out(h, w, img.channels());
    parallel_for(0, h, [&](int y) {
        for (int x = 0; x < w; ++x) {
            for (int c = 0; c < img.channels(); ++c) {
                out.at(y, x, c) = 0.25 * (img.at(2 * y, 2 * x, c) + img.at(2 * y, 2 * x + 1, c) +
                                          img.at(2 * y + 1, 2 * x, c) +
                                          img.at(2 * y + 1, 2 * x + 1, c));
            }
        }
    });
    return out;
}

TrajectoryField upsample_params(const TrajectoryField& traj, int height, int width, double gain) {
    TrajectoryField out(traj.mode(), traj.steps(), height, width);
    const int stride = traj.stride();
    const double sy = static_cast<double>(traj.height()) / height;
    const double sx = static_cast<double>(traj.width()) / width;
    parallel_for(0, height, [&](int y) {
        const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, traj.height() - 1.0);
        const int y0 = std::min(static_cast<int>(fy), traj.height() - 2);
        const double ay = fy - y0;
        for (int x = 0; x < width; ++x) {
            const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, traj.width() - 1.0);
            const int x0 = std::min(static_cast<int>(fx), traj.width() - 2);
            const double ax = fx - x0;
            const auto p00 = traj.pixel(y0, x0);
            const auto p01 = traj.pixel(y0, x0 + 1);
            const auto p10 = traj.pixel(y0 + 1, x0);
            const auto p11 = traj.pixel(y0 + 1, x0 + 1);
            auto dst = out.pixel(y, x);
            for (int k = 0; k < stride; ++k) {
                const double top = (1.0 - ax) * p00[k] + ax * p01[k];
                const double bottom = (1.0 - ax) * p10[k] + ax * p11[k];
                dst[k] = gain * ((1.0 - ay) * top + ay * bottom);
            }
        }
    });
    return out;
}

namespace {

void validate(const Image& blurry, const Image& sharp, const RecoveryConfig& cfg) {
    require_same_shape(blurry, sharp, "recover");
    require_odd_steps(cfg.steps);
    if (cfg.iterations < 1) {
        throw ArgumentError("iterations must be >= 1");
    }
    if (cfg.pyramid_levels < 1) {
        throw ArgumentError("pyramid_levels must be >= 1");
    }
    if (!(cfg.step_size > 0.0) || !(cfg.search_radius >= 0.0)) {
        throw ArgumentError("step_size must be positive and search_radius non-negative");
    }
}

// Levels actually used: the coarsest level keeps both dimensions >= 8.
int usable_levels(int height, int width, int requested) {
    int levels = 1;
    while (levels < requested && std::min(height, width) >> levels >= 8) {
        ++levels;
    }
    return levels;
}

// Per-pixel squared reblur error summed over channels and a 9x9 window.
std::vector<double> window_error(const Image& a, const Image& b) {
    const int h = a.height();
    const int w = a.width();
    std::vector<double> e(static_cast<std::size_t>(h) * w);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double s = 0.0;
            for (int c = 0; c < a.channels(); ++c) {
                const double d = a.at(y, x, c) - b.at(y, x, c);
                s += d * d;
            }
            e[static_cast<std::size_t>(y) * w + x] = s;
        }
    }
    constexpr int r = 4;
    std::vector<double> rows(e.size());
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double s = 0.0;
            for (int k = std::max(0, x - r); k <= std::min(w - 1, x + r); ++k)
                s += e[static_cast<std::size_t>(y) * w + k];
            rows[static_cast<std::size_t>(y) * w + x] = s;
        }
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double s = 0.0;
            for (int k = std::max(0, y - r); k <= std::min(h - 1, y + r); ++k)
                s += rows[static_cast<std::size_t>(k) * w + x];
            e[static_cast<std::size_t>(y) * w + x] = s;
        }
    return e;
}

// Uniform linear candidates on a half-plane grid, smallest magnitude first.
std::vector<Vec2> search_candidates(double radius, double step) {
    const int k = static_cast<int>(std::floor(radius / step));
    struct Cand {
        int i, j;
    };
    std::vector<Cand> grid;
    for (int j = 0; j <= k; ++j) {
        for (int i = -k; i <= k; ++i) {
            if (j == 0 && i < 0) continue;
            if (i * i + j * j > k * k) continue;
            grid.push_back({i, j});
        }
    }
    std::stable_sort(grid.begin(), grid.end(), [](const Cand& a, const Cand& b) {
        return a.i * a.i + a.j * a.j < b.i * b.i + b.j * b.j;
    });
    std::vector<Vec2> out;
    out.reserve(grid.size());
    for (const Cand& c : grid) out.push_back({c.i * step, c.j * step});
    return out;
}

// Adds the linear motion (-u) * shift to every pixel's curve.
TrajectoryField shifted(const TrajectoryField& base, Vec2 shift) {
    TrajectoryField out = base;
    const int steps = base.steps();
    for (int y = 0; y < base.height(); ++y)
        for (int x = 0; x < base.width(); ++x) {
            auto p = out.pixel(y, x);
            switch (base.mode()) {
            case ConstraintMode::Linear:
                p[0] += shift.x;
                p[1] += shift.y;
                break;
            case ConstraintMode::BdLinear:
            case ConstraintMode::Quadratic:
                p[0] += shift.x;
                p[1] += shift.y;
                p[2] -= shift.x;
                p[3] -= shift.y;
                break;
            case ConstraintMode::Zero:
                for (int n = 0; n < steps; ++n) {
                    const double u = step_time(n, steps);
                    p[2 * n] -= u * shift.x;
                    p[2 * n + 1] -= u * shift.y;
                }
                break;
            }
        }
    return out;
}

// Per pixel, keeps the candidate shift of `base` with the lowest windowed
// reblur error. Candidates are tried in order; ties keep the earlier one.
TrajectoryField candidate_search(const Image& blurry, const Image& sharp,
                                 const TrajectoryField& base, const std::vector<Vec2>& candidates,
                                 const RecoveryConfig& cfg) {
    const int h = sharp.height();
    const int w = sharp.width();
    TrajectoryField best = base;
    std::vector<double> best_err(static_cast<std::size_t>(h) * w,
                                 std::numeric_limits<double>::infinity());
    for (const Vec2 cand : candidates) {
        const TrajectoryField t = shifted(base, cand);
        const std::vector<double> err =
            window_error(reblur(sharp, t, cfg.steps, cfg.boundary), blurry);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const std::size_t i = static_cast<std::size_t>(y) * w + x;
                if (err[i] < best_err[i]) {
                    best_err[i] = err[i];
                    const auto src = t.pixel(y, x);
                    std::copy(src.begin(), src.end(), best.pixel(y, x).begin());
                }
            }
    }
    return best;
}

// Reverses the time direction of every pixel's curve, which leaves its blur
// unchanged.
void reverse_time(ConstraintMode mode, int steps, std::span<double> p) {
    switch (mode) {
    case ConstraintMode::Linear:
        p[0] = -p[0];
        p[1] = -p[1];
        break;
    case ConstraintMode::BdLinear:
    case ConstraintMode::Quadratic:
        std::swap(p[0], p[2]);
        std::swap(p[1], p[3]);
        break;
    case ConstraintMode::Zero:
        for (int a = 0, b = steps - 1; a < b; ++a, --b) {
            std::swap(p[2 * a], p[2 * b]);
            std::swap(p[2 * a + 1], p[2 * b + 1]);
        }
        break;
    }
}

// Picks, per pixel, the time direction whose endpoint flow points along the
// principal axis of all endpoint flows, so neighbouring pixels agree in sign.
void align_directions(TrajectoryField& traj) {
    const FlowMap flow = endpoint_flow(traj);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (int y = 0; y < flow.height(); ++y)
        for (int x = 0; x < flow.width(); ++x) {
            const Vec2 f = flow.at(y, x);
            sxx += f.x * f.x;
            sxy += f.x * f.y;
            syy += f.y * f.y;
        }
    const double angle = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
    const Vec2 axis{std::cos(angle), std::sin(angle)};
    for (int y = 0; y < flow.height(); ++y)
        for (int x = 0; x < flow.width(); ++x) {
            const Vec2 f = flow.at(y, x);
            if (f.x * axis.x + f.y * axis.y < 0.0) {
                reverse_time(traj.mode(), traj.steps(), traj.pixel(y, x));
            }
        }
}

// Local shifts tried after each upsampling, zero first.
std::vector<Vec2> refine_candidates() {
    std::vector<Vec2> out{{0.0, 0.0}};
    for (int j = -2; j <= 2; ++j)
        for (int i = -2; i <= 2; ++i)
            if (i != 0 || j != 0) out.push_back({0.25 * i, 0.25 * j});
    return out;
}

// Converts a Linear field into `mode` with an identical expansion.
TrajectoryField from_linear(const TrajectoryField& lin, ConstraintMode mode, int steps) {
    if (mode == ConstraintMode::Linear) {
        return lin;
    }
    if (mode == ConstraintMode::Zero) {
        return TrajectoryField::from_offsets(expand(lin, steps));
    }
    TrajectoryField out(mode, steps, lin.height(), lin.width());
    for (int y = 0; y < lin.height(); ++y)
        for (int x = 0; x < lin.width(); ++x) {
            const auto s = lin.pixel(y, x);
            auto d = out.pixel(y, x);
            d[0] = s[0];
            d[1] = s[1];
            d[2] = -s[0];
            d[3] = -s[1];
        }
    return out;
}

TotalLoss evaluate(const Image& sharp, const Image& blurry, const TrajectoryField& traj,
                   const RecoveryConfig& cfg) {
    TotalLossOptions opts;
    opts.weights = cfg.weights;
    opts.boundary = cfg.boundary;
    opts.ssim_scales = cfg.ssim_scales;
    opts.ssim_gradient = cfg.ssim_gradient;
    TotalLoss loss = total_loss(sharp, blurry, traj, cfg.steps, opts);
    if (!std::isfinite(loss.value)) {
        throw NonFiniteLoss("objective became non-finite");
    }
    return loss;
}

// Adam with linear decay. A step that would raise the loss is rejected and
// the step scale halved; accepted steps let it grow back toward 1. The trace
// therefore never increases within a level.
void adam_level(const Image& sharp, const Image& blurry, TrajectoryField& traj,
                const RecoveryConfig& cfg, std::vector<double>& trace) {
    const std::size_t count = traj.params().size();
    std::vector<double> m(count, 0.0);
    std::vector<double> v(count, 0.0);
    std::vector<double> m_next(count);
    std::vector<double> v_next(count);
    const int chunks = std::max(1, traj.height());
    const std::size_t per_chunk = (count + chunks - 1) / chunks;
    TotalLoss current = evaluate(sharp, blurry, traj, cfg);
    TrajectoryField candidate = traj;
    double scale = 1.0;
    int accepted = 0;
    for (int t = 0; t < cfg.iterations; ++t) {
        trace.push_back(current.value);
        // Coordinate-wise steepest descent slope: a parameter tied to a
        // neighbour only moves if its smooth gradient beats the TV slope.
        auto g = current.grad.params();
        const auto kink = current.tv_kink.params();
        for (std::size_t i = 0; i < count; ++i) {
            const double mag = std::abs(g[i]) - kink[i];
            g[i] = mag > 0.0 ? std::copysign(mag, g[i]) : 0.0;
        }
        const double lr =
            scale * cfg.step_size * (1.0 - static_cast<double>(t) / cfg.iterations);
        const double c1 = 1.0 - std::pow(cfg.beta1, accepted + 1);
        const double c2 = 1.0 - std::pow(cfg.beta2, accepted + 1);
        const auto params = traj.params();
        auto next = candidate.params();
        parallel_for(0, chunks, [&](int k) {
            const std::size_t lo = static_cast<std::size_t>(k) * per_chunk;
            const std::size_t hi = std::min(count, lo + per_chunk);
            for (std::size_t i = lo; i < hi; ++i) {
                m_next[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
                v_next[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
                const double mh = m_next[i] / c1;
                const double vh = v_next[i] / c2;
                next[i] = params[i] - lr * mh / (std::sqrt(vh) + cfg.epsilon);
            }
        });
        TotalLoss trial = evaluate(sharp, blurry, candidate, cfg);
        if (trial.value <= current.value) {
            std::swap(traj, candidate);
            m.swap(m_next);
            v.swap(v_next);
            current = std::move(trial);
            ++accepted;
            scale = std::min(1.0, scale * 1.25);
        } else {
            scale *= 0.5;
        }
    }
}

}  // namespace

std::pair<TrajectoryField, RecoveryReport> recover(const Image& blurry, const Image& sharp,
                                                   const RecoveryConfig& cfg) {
    validate(blurry, sharp, cfg);
    const int levels = usable_levels(sharp.height(), sharp.width(), cfg.pyramid_levels);
    std::vector<Image> sharp_pyr{sharp};
    std::vector<Image> blurry_pyr{blurry};
    for (int l = 1; l < levels; ++l) {
        sharp_pyr.push_back(downsample2(sharp_pyr.back()));
        blurry_pyr.push_back(downsample2(blurry_pyr.back()));
    }

    const Image& coarse_sharp = sharp_pyr.back();
    const Image& coarse_blurry = blurry_pyr.back();
    const double radius = cfg.search_radius / std::ldexp(1.0, levels - 1);
    TrajectoryField lin(ConstraintMode::Linear, cfg.steps, coarse_sharp.height(),
                        coarse_sharp.width());
    if (radius >= 0.125) {
        lin = candidate_search(coarse_blurry, coarse_sharp, lin, search_candidates(radius, 0.125),
                               cfg);
        align_directions(lin);
    }
    TrajectoryField traj = from_linear(lin, cfg.mode, cfg.steps);

    RecoveryReport report;
    for (int l = levels - 1; l >= 0; --l) {
        if (l != levels - 1) {
            traj = upsample_params(traj, sharp_pyr[l].height(), sharp_pyr[l].width(), 2.0);
            if (cfg.search_radius > 0.0) {
                traj = candidate_search(blurry_pyr[l], sharp_pyr[l], traj, refine_candidates(), cfg);
                align_directions(traj);
            }
        }
        report.level_starts.push_back(static_cast<int>(report.loss_trace.size()));
        adam_level(sharp_pyr[l], blurry_pyr[l], traj, cfg, report.loss_trace);
        report.iterations_run += cfg.iterations;
    }

    const TotalLoss last = evaluate(sharp, blurry, traj, cfg);
    report.final_loss = last.value;
    report.reblur_psnr = psnr(last.reblurred, blurry);
    report.reblur_ssim = std::min(sharp.height(), sharp.width()) >= kSsimWindow
                             ? ssim(last.reblurred, blurry)
                             : std::numeric_limits<double>::quiet_NaN();
    return {std::move(traj), std::move(report)};
}

std::string format_number(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    std::string s(buf, res.ptr);
    if (std::isfinite(v) && s.find_first_of(".eE") == std::string::npos) {
        s += ".0";
    }
    return s;
}

void write_report(const RecoveryReport& report, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write report " + path.string());
    }
    out << "final_loss: " << format_number(report.final_loss) << '\n'
        << "reblur_psnr: " << format_number(report.reblur_psnr) << '\n'
        << "reblur_ssim: " << format_number(report.reblur_ssim) << '\n'
        << "iterations_run: " << report.iterations_run << '\n';
    for (double v : report.loss_trace) {
        out << format_number(v) << '\n';
    }
    if (!out) {
        throw IoError("failed writing report " + path.string());
    }
}

}  // namespace etraj
