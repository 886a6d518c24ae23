#include "etraj/image.hpp"

#include <string>

#include "etraj/errors.hpp"

namespace etraj {

Image::Image(int height, int width, int channels, double fill)
    : height_(height), width_(width), channels_(channels) {
    if (height < 2 || width < 2) {
        throw TooSmall("image must be at least 2x2, got " + std::to_string(height) + "x" +
                       std::to_string(width));
    }
    if (channels < 1) {
        throw DimensionError("image needs at least one channel");
    }
    data_.assign(static_cast<std::size_t>(height) * width * channels, fill);
}

OffsetField::OffsetField(int steps, int height, int width)
    : steps_(steps), height_(height), width_(width) {
    if (steps < 1 || steps % 2 == 0) {
        throw DimensionError("offset field step count must be odd, got " + std::to_string(steps));
    }
    if (height < 1 || width < 1) {
        throw DimensionError("offset field must have positive extent");
    }
    data_.assign(static_cast<std::size_t>(steps) * height * width * 2, 0.0);
}

FlowMap::FlowMap(int height, int width) : height_(height), width_(width) {
    if (height < 1 || width < 1) {
        throw DimensionError("flow map must have positive extent");
    }
    data_.assign(static_cast<std::size_t>(height) * width * 2, 0.0);
}

void require_same_shape(const Image& a, const Image& b, const char* what) {
    if (!a.same_shape(b)) {
        throw DimensionError(std::string(what) + ": image shapes differ (" +
                             std::to_string(a.height()) + "x" + std::to_string(a.width()) + "x" +
                             std::to_string(a.channels()) + " vs " + std::to_string(b.height()) +
                             "x" + std::to_string(b.width()) + "x" + std::to_string(b.channels()) +
                             ")");
    }
}

}  // namespace etraj
