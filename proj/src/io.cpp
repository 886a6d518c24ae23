#include "etraj/io.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <memory>
#include <string>
#include <vector>

#include "etraj/errors.hpp"

namespace etraj {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

struct DecodedPng {
    int height = 0;
    int width = 0;
    int channels = 0;
    std::string problem;
    std::vector<unsigned char> pixels;
    std::vector<png_bytep> rows;
};

// Runs the libpng read sequence; errors longjmp back into load_image. All state
// that must survive the jump lives in `out`.
void decode_png(png_structp png, png_infop info, std::FILE* file, int sig_bytes, DecodedPng& out) {
    png_init_io(png, file);
    png_set_sig_bytes(png, sig_bytes);
    png_read_info(png, info);
    const int depth = png_get_bit_depth(png, info);
    const int color = png_get_color_type(png, info);
    out.height = static_cast<int>(png_get_image_height(png, info));
    out.width = static_cast<int>(png_get_image_width(png, info));
    if (depth != 8) {
        out.problem = "unsupported bit depth " + std::to_string(depth);
        return;
    }
    if (color == PNG_COLOR_TYPE_GRAY) {
        out.channels = 1;
    } else if (color == PNG_COLOR_TYPE_RGB) {
        out.channels = 3;
    } else {
        out.problem = "unsupported color type " + std::to_string(color);
        return;
    }
    const std::size_t stride = static_cast<std::size_t>(out.width) * out.channels;
    out.pixels.resize(stride * out.height);
    out.rows.resize(static_cast<std::size_t>(out.height));
    for (int y = 0; y < out.height; ++y) {
        out.rows[static_cast<std::size_t>(y)] = out.pixels.data() + stride * y;
    }
    png_read_image(png, out.rows.data());
    png_read_end(png, nullptr);
}

}  // namespace

Image load_image(const std::filesystem::path& path) {
    FilePtr file(std::fopen(path.c_str(), "rb"));
    if (!file) {
        throw IoError("cannot open " + path.string());
    }
    std::array<unsigned char, 8> sig{};
    if (std::fread(sig.data(), 1, sig.size(), file.get()) != sig.size() ||
        png_sig_cmp(sig.data(), 0, sig.size()) != 0) {
        throw FormatError(path.string() + " is not a PNG file");
    }

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("libpng initialization failed");
    }
    auto decoded = std::make_unique<DecodedPng>();
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw FormatError("failed to decode " + path.string());
    }
    decode_png(png, info, file.get(), static_cast<int>(sig.size()), *decoded);
    png_destroy_read_struct(&png, &info, nullptr);
    if (!decoded->problem.empty()) {
        throw FormatError(path.string() + ": " + decoded->problem);
    }

    Image img(decoded->height, decoded->width, decoded->channels);  // TooSmall below 2x2
    auto data = img.data();
    for (std::size_t i = 0; i < decoded->pixels.size(); ++i) {
        data[i] = decoded->pixels[i] / 255.0;
    }
    return img;
}

std::uint8_t quantize_sample(double v) {
    const double c = std::clamp(v, 0.0, 1.0) * 255.0;
    return static_cast<std::uint8_t>(std::round(c));
}

Image quantize(const Image& img) {
    Image out = img;
    for (double& v : out.data()) {
        v = quantize_sample(v) / 255.0;
    }
    return out;
}

void save_image(const Image& img, const std::filesystem::path& path) {
    if (img.channels() != 1 && img.channels() != 3) {
        throw FormatError("only 1- or 3-channel images can be saved");
    }
    std::vector<unsigned char> bytes(img.size());
    const auto data = img.data();
    for (std::size_t i = 0; i < bytes.size(); ++i) {
        bytes[i] = quantize_sample(data[i]);
    }
    png_image desc;
    std::memset(&desc, 0, sizeof(desc));
    desc.version = PNG_IMAGE_VERSION;
    desc.width = static_cast<png_uint_32>(img.width());
    desc.height = static_cast<png_uint_32>(img.height());
    desc.format = img.channels() == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
    if (!png_image_write_to_file(&desc, path.c_str(), 0, bytes.data(), 0, nullptr)) {
        const std::string msg = desc.message;
        png_image_free(&desc);
        throw IoError("cannot write " + path.string() + ": " + msg);
    }
}

namespace {

static_assert(std::endian::native == std::endian::little, "ETRF I/O assumes a little-endian host");

constexpr std::array<char, 4> kMagic = {'E', 'T', 'R', 'F'};
constexpr std::uint32_t kVersion = 1;
constexpr std::size_t kHeaderBytes = 24;

std::uint8_t mode_code(ConstraintMode mode) {
    switch (mode) {
        case ConstraintMode::Zero:
            return 0;
        case ConstraintMode::Linear:
            return 1;
        case ConstraintMode::BdLinear:
            return 2;
        case ConstraintMode::Quadratic:
            return 3;
    }
    return 0;
}

template <typename T>
void put(std::vector<char>& out, T value) {
    const auto* p = reinterpret_cast<const char*>(&value);
    out.insert(out.end(), p, p + sizeof(T));
}

template <typename T>
T get(const std::vector<char>& in, std::size_t pos) {
    T value;
    std::memcpy(&value, in.data() + pos, sizeof(T));
    return value;
}

void write_file(const std::vector<char>& bytes, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw IoError("failed writing " + path.string());
    }
}

std::vector<char> header(std::uint8_t mode, int steps, int height, int width) {
    std::vector<char> out(kMagic.begin(), kMagic.end());
    put(out, kVersion);
    put(out, mode);
    out.insert(out.end(), 3, '\0');
    put(out, static_cast<std::uint32_t>(steps));
    put(out, static_cast<std::uint32_t>(height));
    put(out, static_cast<std::uint32_t>(width));
    return out;
}

}  // namespace

void write_offsets(const OffsetField& field, const std::filesystem::path& path) {
    auto bytes = header(0, field.steps(), field.height(), field.width());
    bytes.reserve(bytes.size() + field.size() * sizeof(float));
    for (double v : field.data()) {
        put(bytes, static_cast<float>(v));
    }
    write_file(bytes, path);
}

void write_offsets(const TrajectoryField& field, const std::filesystem::path& path) {
    if (field.mode() == ConstraintMode::Zero) {
        write_offsets(expand(field, field.steps()), path);
        return;
    }
    auto bytes = header(mode_code(field.mode()), field.steps(), field.height(), field.width());
    for (double v : field.params()) {
        put(bytes, static_cast<float>(v));
    }
    write_file(bytes, path);
}

EtrfContent read_offsets(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    const std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
    if (bytes.size() < kHeaderBytes) {
        throw FormatError(path.string() + ": truncated ETRF header");
    }
    if (std::memcmp(bytes.data(), kMagic.data(), kMagic.size()) != 0) {
        throw FormatError(path.string() + ": bad ETRF magic");
    }
    if (get<std::uint32_t>(bytes, 4) != kVersion) {
        throw FormatError(path.string() + ": unsupported ETRF version");
    }
    const auto mode = get<std::uint8_t>(bytes, 8);
    if (mode > 3) {
        throw FormatError(path.string() + ": unknown ETRF mode " + std::to_string(mode));
    }
    const auto steps = get<std::uint32_t>(bytes, 12);
    const auto height = get<std::uint32_t>(bytes, 16);
    const auto width = get<std::uint32_t>(bytes, 20);
    const std::uint32_t min_steps = mode == 0 ? 1 : 3;
    if (steps % 2 == 0 || steps < min_steps || steps > (1u << 16)) {
        throw DimensionError(path.string() + ": step count must be odd, got " +
                             std::to_string(steps));
    }
    if (height == 0 || width == 0 || height > (1u << 16) || width > (1u << 16)) {
        throw DimensionError(path.string() + ": bad ETRF extent");
    }
    const std::size_t per_pixel = mode == 0 ? 2u * steps : (mode == 1 ? 2u : 4u);
    const std::size_t values = per_pixel * height * width;
    const std::size_t expected = kHeaderBytes + values * sizeof(float);
    if (bytes.size() < expected) {
        throw FormatError(path.string() + ": truncated ETRF payload");
    }
    if (bytes.size() != expected) {
        throw DimensionError(path.string() + ": ETRF payload size does not match header");
    }
    auto value_at = [&](std::size_t i) {
        return static_cast<double>(get<float>(bytes, kHeaderBytes + i * sizeof(float)));
    };
    if (mode == 0) {
        OffsetField field(static_cast<int>(steps), static_cast<int>(height), static_cast<int>(width));
        auto data = field.data();
        for (std::size_t i = 0; i < values; ++i) data[i] = value_at(i);
        return field;
    }
    const ConstraintMode cm = mode == 1 ? ConstraintMode::Linear
                              : mode == 2 ? ConstraintMode::BdLinear
                                          : ConstraintMode::Quadratic;
    TrajectoryField traj(cm, static_cast<int>(steps), static_cast<int>(height),
                         static_cast<int>(width));
    auto data = traj.params();
    for (std::size_t i = 0; i < values; ++i) data[i] = value_at(i);
    return traj;
}

TrajectoryField read_trajectory(const std::filesystem::path& path) {
    EtrfContent content = read_offsets(path);
    if (auto* raw = std::get_if<OffsetField>(&content)) {
        return TrajectoryField::from_offsets(*raw);
    }
    return std::get<TrajectoryField>(std::move(content));
}

}  // namespace etraj
