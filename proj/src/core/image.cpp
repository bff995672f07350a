#include "gsrelight/core/image.hpp"

#include "gsrelight/core/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace gsr {

Image::Image(int height, int width, int channels, double fill)
    : height_(height),
      width_(width),
      channels_(channels) {
    require(height >= 0 && width >= 0 && channels >= 0, ErrorCode::ShapeMismatch,
            "negative image dimensions");
    data_.assign(static_cast<std::size_t>(height) * width * channels, fill);
}

void require_same_shape(const Image& a, const Image& b, const char* what) {
    if (!a.same_shape(b)) {
        fail(ErrorCode::ShapeMismatch,
             std::string(what) + ": " + std::to_string(a.height()) + "x" + std::to_string(a.width()) + "x" +
                 std::to_string(a.channels()) + " vs " + std::to_string(b.height()) + "x" +
                 std::to_string(b.width()) + "x" + std::to_string(b.channels()));
    }
}

Image operator+(const Image& a, const Image& b) {
    require_same_shape(a, b, "image add");
    Image out = a;
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] += b[i];
    }
    return out;
}

Image operator-(const Image& a, const Image& b) {
    require_same_shape(a, b, "image subtract");
    Image out = a;
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] -= b[i];
    }
    return out;
}

Image operator*(double s, const Image& a) {
    Image out = a;
    for (auto& v : out.data()) {
        v *= s;
    }
    return out;
}

double l2_norm(const Image& a) {
    double sum = 0.0;
    for (double v : a.data()) {
        sum += v * v;
    }
    return std::sqrt(sum);
}

double max_abs_diff(const Image& a, const Image& b) {
    require_same_shape(a, b, "max_abs_diff");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        m = std::max(m, std::abs(a[i] - b[i]));
    }
    return m;
}

Image clamped(const Image& a, double lo, double hi) {
    Image out = a;
    for (auto& v : out.data()) {
        v = std::clamp(v, lo, hi);
    }
    return out;
}

} // namespace gsr
