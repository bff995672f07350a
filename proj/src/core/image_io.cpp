#include "gsrelight/core/image_io.hpp"

#include "gsrelight/core/error.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <regex>
#include <sstream>

namespace gsr {

void write_png(const std::filesystem::path& path, const Image& image) {
    const int c = image.channels();
    require(c == 1 || c == 3 || c == 4, ErrorCode::ShapeMismatch, "PNG needs 1, 3 or 4 channels");
    std::vector<std::uint8_t> bytes(image.size());
    for (std::size_t i = 0; i < image.size(); ++i) {
        bytes[i] = static_cast<std::uint8_t>(std::lround(std::clamp(image[i], 0.0, 1.0) * 255.0));
    }
    png_image png;
    std::memset(&png, 0, sizeof(png));
    png.version = PNG_IMAGE_VERSION;
    png.width = static_cast<png_uint_32>(image.width());
    png.height = static_cast<png_uint_32>(image.height());
    png.format = c == 1 ? PNG_FORMAT_GRAY : (c == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_RGBA);
    if (!png_image_write_to_file(&png, path.c_str(), 0, bytes.data(), 0, nullptr)) {
        const std::string msg = png.message;
        png_image_free(&png);
        fail(ErrorCode::IoFailure, "cannot write PNG " + path.string() + ": " + msg);
    }
}

Image read_png(const std::filesystem::path& path, int channels) {
    require(channels == 1 || channels == 3, ErrorCode::ShapeMismatch, "read_png supports 1 or 3 channels");
    png_image png;
    std::memset(&png, 0, sizeof(png));
    png.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&png, path.c_str())) {
        fail(ErrorCode::MalformedFile, "cannot read PNG " + path.string() + ": " + png.message);
    }
    png.format = channels == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
    std::vector<std::uint8_t> bytes(PNG_IMAGE_SIZE(png));
    if (!png_image_finish_read(&png, nullptr, bytes.data(), 0, nullptr)) {
        const std::string msg = png.message;
        png_image_free(&png);
        fail(ErrorCode::MalformedFile, "cannot decode PNG " + path.string() + ": " + msg);
    }
    Image out(static_cast<int>(png.height), static_cast<int>(png.width), channels);
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = bytes[i] / 255.0;
    }
    return out;
}

void write_npy(const std::filesystem::path& path, const Image& image) {
    std::ostringstream dict;
    dict << "{'descr': '<f4', 'fortran_order': False, 'shape': (" << image.height() << ", " << image.width()
         << ", " << image.channels() << "), }";
    std::string header = dict.str();
    // magic(6) + version(2) + header_len(2) + header, padded to a multiple of 64 with a trailing newline
    const std::size_t total = 10 + header.size() + 1;
    header.append((64 - total % 64) % 64, ' ');
    header.push_back('\n');

    std::ofstream out(path, std::ios::binary);
    require(static_cast<bool>(out), ErrorCode::IoFailure, "cannot open " + path.string());
    out.write("\x93NUMPY\x01\x00", 8);
    const auto len = static_cast<std::uint16_t>(header.size());
    const char len_bytes[2] = {static_cast<char>(len & 0xFF), static_cast<char>(len >> 8)};
    out.write(len_bytes, 2);
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    std::vector<float> values(image.data().begin(), image.data().end());
    out.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(float)));
    require(static_cast<bool>(out), ErrorCode::IoFailure, "write failed for " + path.string());
}

Image read_npy(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), ErrorCode::IoFailure, "cannot open " + path.string());
    char magic[10];
    in.read(magic, 10);
    require(in && std::memcmp(magic, "\x93NUMPY\x01\x00", 8) == 0, ErrorCode::MalformedFile, "not an npy v1 file");
    const std::size_t len = static_cast<unsigned char>(magic[8]) | (static_cast<unsigned char>(magic[9]) << 8);
    std::string header(len, '\0');
    in.read(header.data(), static_cast<std::streamsize>(len));
    require(header.find("'<f4'") != std::string::npos && header.find("False") != std::string::npos,
            ErrorCode::MalformedFile, "npy must be little-endian float32, C order");
    std::smatch m;
    static const std::regex shape_re(R"(\((\d+),\s*(\d+),\s*(\d+)\))");
    require(std::regex_search(header, m, shape_re), ErrorCode::MalformedFile, "npy shape must be (H, W, C)");
    Image out(std::stoi(m[1]), std::stoi(m[2]), std::stoi(m[3]));
    std::vector<float> values(out.size());
    in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(float)));
    require(static_cast<bool>(in), ErrorCode::MalformedFile, "truncated npy payload");
    std::copy(values.begin(), values.end(), out.data().begin());
    return out;
}

Image tile_horizontally(const std::vector<Image>& tiles) {
    require(!tiles.empty(), ErrorCode::ShapeMismatch, "no tiles");
    const Image& first = tiles.front();
    Image out(first.height(), first.width() * static_cast<int>(tiles.size()), first.channels());
    for (std::size_t t = 0; t < tiles.size(); ++t) {
        require_same_shape(first, tiles[t], "tile");
        for (int y = 0; y < first.height(); ++y) {
            for (int x = 0; x < first.width(); ++x) {
                for (int c = 0; c < first.channels(); ++c) {
                    out.at(y, static_cast<int>(t) * first.width() + x, c) = tiles[t].at(y, x, c);
                }
            }
        }
    }
    return out;
}

} // namespace gsr
