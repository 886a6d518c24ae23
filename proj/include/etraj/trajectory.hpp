#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "etraj/image.hpp"

namespace etraj {

enum class ConstraintMode { Zero, Linear, BdLinear, Quadratic };

std::string_view to_string(ConstraintMode mode);
// Accepts "zero", "linear", "bd-linear", "quadratic".
ConstraintMode parse_constraint_mode(std::string_view name);

// Parameters per pixel: 2*N for Zero, 2 for Linear, 4 for BdLinear/Quadratic.
int params_per_pixel(ConstraintMode mode, int steps);

/// Compact per-pixel trajectory parameters plus the constraint family.
///
/// Linear stores the offset at the first step (dx, dy). BdLinear and Quadratic
/// store the first and last offsets (dx1, dy1, dx2, dy2). Zero stores the whole
/// N-step offset sequence. `steps` is the nominal step count; it is binding only
/// for Zero, which cannot be resampled.
class TrajectoryField {
public:
    TrajectoryField() = default;
    TrajectoryField(ConstraintMode mode, int steps, int height, int width);

    static TrajectoryField from_offsets(const OffsetField& offsets);

    ConstraintMode mode() const { return mode_; }
    int steps() const { return steps_; }
    int height() const { return height_; }
    int width() const { return width_; }
    int stride() const { return stride_; }

    std::span<double> pixel(int y, int x) {
        return {params_.data() + offset(y, x), static_cast<std::size_t>(stride_)};
    }
    std::span<const double> pixel(int y, int x) const {
        return {params_.data() + offset(y, x), static_cast<std::size_t>(stride_)};
    }

    std::span<double> params() { return params_; }
    std::span<const double> params() const { return params_; }

    friend bool operator==(const TrajectoryField&, const TrajectoryField&) = default;

private:
    std::size_t offset(int y, int x) const {
        return (static_cast<std::size_t>(y) * width_ + x) * stride_;
    }

    ConstraintMode mode_ = ConstraintMode::Linear;
    int steps_ = 0;
    int height_ = 0;
    int width_ = 0;
    int stride_ = 0;
    std::vector<double> params_;
};

// Normalized time of step n out of `steps`: u = 2n/(steps-1) - 1, in [-1, 1].
double step_time(int n, int steps);

// Offset of one pixel's constrained curve at normalized time u. `params` holds
// the pixel's parameter block. Not defined for Zero.
Vec2 curve_point(ConstraintMode mode, std::span<const double> params, double u);

/// Expand to an N-step offset field.
///
///   Linear     (1 - 2n/(N-1)) dp
///   BdLinear   (1 - 2n/(N-1)) dp1 up to the mid step, (2n/(N-1) - 1) dp2 after it
///   Quadratic  (dp1 + dp2)/2 u^2 + (dp2 - dp1)/2 u, u = 2n/(N-1) - 1
///
/// Throws EvenStepCount for even or too small N, StepMismatch when a Zero
/// field is expanded to a step count other than its own.
OffsetField expand(const TrajectoryField& traj, int steps);

// Evaluates the closed-form curve at `steps` equispaced times. Throws
// UnsupportedMode for Zero.
OffsetField resample(const TrajectoryField& traj, int steps);

// First-minus-last offset per pixel.
FlowMap endpoint_flow(const TrajectoryField& traj);

/// Adjoint of `expand` for one pixel: maps per-step offset gradients
/// (2 * steps values, [n][dx, dy]) to the gradient of that pixel's parameters.
/// Writes params_per_pixel(mode, steps) values into `out`.
void param_jacobian_apply(ConstraintMode mode, int steps, std::span<const double> grad_offsets,
                          std::span<double> out);

// Whole-field adjoint of `expand`.
TrajectoryField param_jacobian_apply(const TrajectoryField& like, const OffsetField& grad_offsets);

// Same as the whole-field adjoint but with every coefficient replaced by its
// absolute value. Maps per-offset nonnegative weights to per-parameter ones.
TrajectoryField param_jacobian_abs_apply(const TrajectoryField& like, const OffsetField& weights);

// Throws EvenStepCount unless steps is odd and >= 3.
void require_odd_steps(int steps);

}  // namespace etraj
