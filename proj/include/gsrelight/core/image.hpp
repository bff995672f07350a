#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace gsr {

/// Dense row-major H x W x C array of doubles. Used for rendered images,
/// masks (C = 1), and diffusion latents.
class Image {
public:
    Image() = default;
    Image(int height, int width, int channels, double fill = 0.0);

    [[nodiscard]] int height() const noexcept { return height_; }
    [[nodiscard]] int width() const noexcept { return width_; }
    [[nodiscard]] int channels() const noexcept { return channels_; }
    [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
    [[nodiscard]] bool empty() const noexcept { return data_.empty(); }

    [[nodiscard]] double& at(int y, int x, int c = 0) {
        return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
    }
    [[nodiscard]] double at(int y, int x, int c = 0) const {
        return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
    }
    [[nodiscard]] double& operator[](std::size_t i) { return data_[i]; }
    [[nodiscard]] double operator[](std::size_t i) const { return data_[i]; }

    [[nodiscard]] std::span<double> data() noexcept { return data_; }
    [[nodiscard]] std::span<const double> data() const noexcept { return data_; }

    [[nodiscard]] bool same_shape(const Image& other) const noexcept {
        return height_ == other.height_ && width_ == other.width_ && channels_ == other.channels_;
    }

    bool operator==(const Image& other) const = default;

private:
    int height_ = 0;
    int width_ = 0;
    int channels_ = 0;
    std::vector<double> data_;
};

// Throws ShapeMismatch with `what` in the message when shapes differ.
void require_same_shape(const Image& a, const Image& b, const char* what);

[[nodiscard]] Image operator+(const Image& a, const Image& b);
[[nodiscard]] Image operator-(const Image& a, const Image& b);
[[nodiscard]] Image operator*(double s, const Image& a);

[[nodiscard]] double l2_norm(const Image& a);
[[nodiscard]] double max_abs_diff(const Image& a, const Image& b);

/// Copy with values clamped to [lo, hi].
[[nodiscard]] Image clamped(const Image& a, double lo, double hi);

} // namespace gsr
