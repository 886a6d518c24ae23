#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace etraj {

// Displacement in pixel units; x grows rightward along columns, y downward along rows.
struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
    friend bool operator==(Vec2 a, Vec2 b) = default;
};

enum class BoundaryMode { ClampToEdge, ZeroOutside };

/// Row-major, channel-interleaved raster of doubles.
///
/// Photographs carry 1 or 3 channels with samples in [0,1]; feature maps used by
/// motion-aware convolution may carry any channel count and range. Height and
/// width are at least 2 so every bilinear sample has a full 2x2 neighborhood.
class Image {
public:
    Image() = default;
    Image(int height, int width, int channels, double fill = 0.0);

    int height() const { return height_; }
    int width() const { return width_; }
    int channels() const { return channels_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& at(int y, int x, int c) { return data_[index(y, x, c)]; }
    double at(int y, int x, int c) const { return data_[index(y, x, c)]; }

    std::span<double> data() { return data_; }
    std::span<const double> data() const { return data_; }

    bool same_shape(const Image& other) const {
        return height_ == other.height_ && width_ == other.width_ && channels_ == other.channels_;
    }

    friend bool operator==(const Image&, const Image&) = default;

private:
    std::size_t index(int y, int x, int c) const {
        return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
    }

    int height_ = 0;
    int width_ = 0;
    int channels_ = 0;
    std::vector<double> data_;
};

/// Sampled exposure trajectory: one displacement per step, row and column.
/// Layout is [step][row][col][dx, dy]. The step count is odd.
class OffsetField {
public:
    OffsetField() = default;
    OffsetField(int steps, int height, int width);

    int steps() const { return steps_; }
    int height() const { return height_; }
    int width() const { return width_; }
    std::size_t size() const { return data_.size(); }

    Vec2 at(int n, int y, int x) const {
        const auto i = index(n, y, x);
        return {data_[i], data_[i + 1]};
    }
    void set(int n, int y, int x, Vec2 v) {
        const auto i = index(n, y, x);
        data_[i] = v.x;
        data_[i + 1] = v.y;
    }

    std::span<double> data() { return data_; }
    std::span<const double> data() const { return data_; }

    bool same_shape(const OffsetField& other) const {
        return steps_ == other.steps_ && height_ == other.height_ && width_ == other.width_;
    }

    friend bool operator==(const OffsetField&, const OffsetField&) = default;

private:
    std::size_t index(int n, int y, int x) const {
        return ((static_cast<std::size_t>(n) * height_ + y) * width_ + x) * 2;
    }

    int steps_ = 0;
    int height_ = 0;
    int width_ = 0;
    std::vector<double> data_;
};

/// A single motion vector per pixel.
class FlowMap {
public:
    FlowMap() = default;
    FlowMap(int height, int width);

    int height() const { return height_; }
    int width() const { return width_; }

    Vec2 at(int y, int x) const {
        const auto i = index(y, x);
        return {data_[i], data_[i + 1]};
    }
    void set(int y, int x, Vec2 v) {
        const auto i = index(y, x);
        data_[i] = v.x;
        data_[i + 1] = v.y;
    }

    std::span<double> data() { return data_; }
    std::span<const double> data() const { return data_; }

    bool same_shape(const FlowMap& other) const {
        return height_ == other.height_ && width_ == other.width_;
    }

    friend bool operator==(const FlowMap&, const FlowMap&) = default;

private:
    std::size_t index(int y, int x) const {
        return (static_cast<std::size_t>(y) * width_ + x) * 2;
    }

    int height_ = 0;
    int width_ = 0;
    std::vector<double> data_;
};

// Throws DimensionError with `what` when the shapes differ.
void require_same_shape(const Image& a, const Image& b, const char* what);

}  // namespace etraj
