#include "etraj/trajectory.hpp"

#include <cmath>
#include <string>

#include "etraj/errors.hpp"
#include "etraj/parallel.hpp"

namespace etraj {

std::string_view to_string(ConstraintMode mode) {
    switch (mode) {
        case ConstraintMode::Zero:
            return "zero";
        case ConstraintMode::Linear:
            return "linear";
        case ConstraintMode::BdLinear:
            return "bd-linear";
        case ConstraintMode::Quadratic:
            return "quadratic";
    }
    return "unknown";
}

ConstraintMode parse_constraint_mode(std::string_view name) {
    if (name == "zero") return ConstraintMode::Zero;
    if (name == "linear") return ConstraintMode::Linear;
    if (name == "bd-linear") return ConstraintMode::BdLinear;
    if (name == "quadratic") return ConstraintMode::Quadratic;
    throw ArgumentError("unknown constraint mode '" + std::string(name) + "'");
}

int params_per_pixel(ConstraintMode mode, int steps) {
    switch (mode) {
        case ConstraintMode::Zero:
            return 2 * steps;
        case ConstraintMode::Linear:
            return 2;
        case ConstraintMode::BdLinear:
        case ConstraintMode::Quadratic:
            return 4;
    }
    return 0;
}

void require_odd_steps(int steps) {
    if (steps < 3 || steps % 2 == 0) {
        throw EvenStepCount(steps);
    }
}

TrajectoryField::TrajectoryField(ConstraintMode mode, int steps, int height, int width)
    : mode_(mode), steps_(steps), height_(height), width_(width),
      stride_(params_per_pixel(mode, steps)) {
    require_odd_steps(steps);
    if (height < 1 || width < 1) {
        throw DimensionError("trajectory field must have positive extent");
    }
    params_.assign(static_cast<std::size_t>(height) * width * stride_, 0.0);
}

TrajectoryField TrajectoryField::from_offsets(const OffsetField& offsets) {
    TrajectoryField traj(ConstraintMode::Zero, offsets.steps(), offsets.height(), offsets.width());
    for (int y = 0; y < offsets.height(); ++y) {
        for (int x = 0; x < offsets.width(); ++x) {
            auto p = traj.pixel(y, x);
            for (int n = 0; n < offsets.steps(); ++n) {
                const Vec2 v = offsets.at(n, y, x);
                p[2 * n] = v.x;
                p[2 * n + 1] = v.y;
            }
        }
    }
    return traj;
}

double step_time(int n, int steps) {
    return static_cast<double>(2 * n) / static_cast<double>(steps - 1) - 1.0;
}

Vec2 curve_point(ConstraintMode mode, std::span<const double> params, double u) {
    switch (mode) {
        case ConstraintMode::Linear:
            return (-u) * Vec2{params[0], params[1]};
        case ConstraintMode::BdLinear:
            if (u <= 0.0) {
                return (-u) * Vec2{params[0], params[1]};
            }
            return u * Vec2{params[2], params[3]};
        case ConstraintMode::Quadratic: {
            const Vec2 p1{params[0], params[1]};
            const Vec2 p2{params[2], params[3]};
            // The curve passes through p1 and p2 at the ends; return them
            // unrounded.
            if (u == -1.0) return p1;
            if (u == 1.0) return p2;
            const Vec2 half_sum = 0.5 * (p1 + p2);
            const Vec2 half_diff = 0.5 * (p2 - p1);
            return (u * u) * half_sum + u * half_diff;
        }
        case ConstraintMode::Zero:
            break;
    }
    throw UnsupportedMode("zero-constraint trajectories have no closed-form curve");
}

namespace {

OffsetField evaluate_curve(const TrajectoryField& traj, int steps) {
    OffsetField out(steps, traj.height(), traj.width());
    std::vector<double> times(static_cast<std::size_t>(steps));
    for (int n = 0; n < steps; ++n) {
        times[static_cast<std::size_t>(n)] = step_time(n, steps);
    }
    parallel_for(0, traj.height(), [&](int y) {
        for (int x = 0; x < traj.width(); ++x) {
            const auto p = traj.pixel(y, x);
            for (int n = 0; n < steps; ++n) {
                out.set(n, y, x, curve_point(traj.mode(), p, times[static_cast<std::size_t>(n)]));
            }
        }
    });
    return out;
}

}  // namespace

OffsetField expand(const TrajectoryField& traj, int steps) {
    require_odd_steps(steps);
    if (traj.mode() != ConstraintMode::Zero) {
        return evaluate_curve(traj, steps);
    }
    if (steps != traj.steps()) {
        throw StepMismatch("zero-constraint field has " + std::to_string(traj.steps()) +
                           " steps, requested " + std::to_string(steps));
    }
    OffsetField out(steps, traj.height(), traj.width());
    for (int y = 0; y < traj.height(); ++y) {
        for (int x = 0; x < traj.width(); ++x) {
            const auto p = traj.pixel(y, x);
            for (int n = 0; n < steps; ++n) {
                out.set(n, y, x, {p[2 * n], p[2 * n + 1]});
            }
        }
    }
    return out;
}

OffsetField resample(const TrajectoryField& traj, int steps) {
    if (traj.mode() == ConstraintMode::Zero) {
        throw UnsupportedMode("cannot resample a zero-constraint trajectory");
    }
    require_odd_steps(steps);
    return evaluate_curve(traj, steps);
}

FlowMap endpoint_flow(const TrajectoryField& traj) {
    FlowMap flow(traj.height(), traj.width());
    for (int y = 0; y < traj.height(); ++y) {
        for (int x = 0; x < traj.width(); ++x) {
            const auto p = traj.pixel(y, x);
            if (traj.mode() == ConstraintMode::Zero) {
                const int last = 2 * (traj.steps() - 1);
                flow.set(y, x, Vec2{p[0], p[1]} - Vec2{p[last], p[last + 1]});
            } else {
                flow.set(y, x, curve_point(traj.mode(), p, -1.0) - curve_point(traj.mode(), p, 1.0));
            }
        }
    }
    return flow;
}

namespace {

double magnitude(double c, bool absolute) { return absolute ? std::abs(c) : c; }

void jacobian_apply(ConstraintMode mode, int steps, std::span<const double> grad_offsets,
                    std::span<double> out, bool absolute) {
    require_odd_steps(steps);
    if (grad_offsets.size() != static_cast<std::size_t>(2 * steps) ||
        out.size() != static_cast<std::size_t>(params_per_pixel(mode, steps))) {
        throw DimensionError("param_jacobian_apply: buffer sizes do not match mode and steps");
    }
    if (mode == ConstraintMode::Zero) {
        std::copy(grad_offsets.begin(), grad_offsets.end(), out.begin());
        return;
    }
    std::fill(out.begin(), out.end(), 0.0);
    for (int n = 0; n < steps; ++n) {
        const double u = step_time(n, steps);
        const double gx = grad_offsets[static_cast<std::size_t>(2 * n)];
        const double gy = grad_offsets[static_cast<std::size_t>(2 * n + 1)];
        switch (mode) {
            case ConstraintMode::Linear:
                out[0] += magnitude(-u, absolute) * gx;
                out[1] += magnitude(-u, absolute) * gy;
                break;
            case ConstraintMode::BdLinear:
                if (u <= 0.0) {
                    out[0] += -u * gx;
                    out[1] += -u * gy;
                } else {
                    out[2] += u * gx;
                    out[3] += u * gy;
                }
                break;
            case ConstraintMode::Quadratic: {
                const double c1 = magnitude(0.5 * (u * u - u), absolute);
                const double c2 = magnitude(0.5 * (u * u + u), absolute);
                out[0] += c1 * gx;
                out[1] += c1 * gy;
                out[2] += c2 * gx;
                out[3] += c2 * gy;
                break;
            }
            case ConstraintMode::Zero:
                break;
        }
    }
}

}  // namespace

void param_jacobian_apply(ConstraintMode mode, int steps, std::span<const double> grad_offsets,
                          std::span<double> out) {
    jacobian_apply(mode, steps, grad_offsets, out, false);
}

namespace {

TrajectoryField field_jacobian_apply(const TrajectoryField& like, const OffsetField& grad_offsets,
                                     bool absolute) {
    if (grad_offsets.height() != like.height() || grad_offsets.width() != like.width()) {
        throw DimensionError("param_jacobian_apply: gradient field size mismatch");
    }
    const int steps = grad_offsets.steps();
    require_odd_steps(steps);
    if (like.mode() == ConstraintMode::Zero && steps != like.steps()) {
        throw StepMismatch("param_jacobian_apply: step count mismatch for zero-constraint field");
    }
    TrajectoryField out(like.mode(), like.mode() == ConstraintMode::Zero ? steps : like.steps(),
                        like.height(), like.width());
    parallel_for(0, like.height(), [&](int y) {
        std::vector<double> g(static_cast<std::size_t>(2 * steps));
        for (int x = 0; x < like.width(); ++x) {
            for (int n = 0; n < steps; ++n) {
                const Vec2 v = grad_offsets.at(n, y, x);
                g[static_cast<std::size_t>(2 * n)] = v.x;
                g[static_cast<std::size_t>(2 * n + 1)] = v.y;
            }
            jacobian_apply(like.mode(), steps, g, out.pixel(y, x), absolute);
        }
    });
    return out;
}

}  // namespace

TrajectoryField param_jacobian_apply(const TrajectoryField& like, const OffsetField& grad_offsets) {
    return field_jacobian_apply(like, grad_offsets, false);
}

TrajectoryField param_jacobian_abs_apply(const TrajectoryField& like, const OffsetField& weights) {
    return field_jacobian_apply(like, weights, true);
}

}  // namespace etraj
