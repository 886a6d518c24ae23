#pragma once

#include <cstdint>
#include <filesystem>
#include <variant>

#include "etraj/image.hpp"
#include "etraj/trajectory.hpp"

namespace etraj {

/// Reads an 8-bit grayscale or RGB PNG; samples become byte / 255.
/// Throws IoError, FormatError (other bit depths, palettes, alpha) or TooSmall.
Image load_image(const std::filesystem::path& path);

/// Writes 1- or 3-channel images as 8-bit PNG. Samples are clamped to [0,1],
/// scaled by 255 and rounded half away from zero.
void save_image(const Image& img, const std::filesystem::path& path);

// The byte save_image writes for one sample.
std::uint8_t quantize_sample(double v);

// Rounds every sample to what a save/load round trip would produce.
Image quantize(const Image& img);

/// ETRF container (little-endian):
///   "ETRF" | u32 version = 1 | u8 mode | 3 pad bytes | u32 N | u32 H | u32 W | f32 payload
/// Mode 0 holds a raw N x H x W x 2 offset field, modes 1-3 a linear,
/// bd-linear or quadratic trajectory field (2 or 4 values per pixel).
/// Values are stored as f32; doubles are rounded on write.
using EtrfContent = std::variant<OffsetField, TrajectoryField>;

EtrfContent read_offsets(const std::filesystem::path& path);
void write_offsets(const OffsetField& field, const std::filesystem::path& path);
void write_offsets(const TrajectoryField& field, const std::filesystem::path& path);

// Reads any ETRF file as a trajectory; raw offset fields become Zero mode.
TrajectoryField read_trajectory(const std::filesystem::path& path);

}  // namespace etraj
