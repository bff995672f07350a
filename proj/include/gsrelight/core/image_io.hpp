#pragma once

#include "gsrelight/core/image.hpp"

#include <filesystem>

namespace gsr {

/// 8-bit PNG. Values are clamped to [0,1] and rounded; 1, 3 or 4 channels.
void write_png(const std::filesystem::path& path, const Image& image);
/// Reads as gray (channels = 1) or RGB (channels = 3), values in [0,1].
[[nodiscard]] Image read_png(const std::filesystem::path& path, int channels = 3);

/// Lossless float32 array in NumPy .npy layout, shape (H, W, C).
void write_npy(const std::filesystem::path& path, const Image& image);
[[nodiscard]] Image read_npy(const std::filesystem::path& path);

/// Places equally sized tiles left to right.
[[nodiscard]] Image tile_horizontally(const std::vector<Image>& tiles);

} // namespace gsr
