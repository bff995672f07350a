#include "gsrelight/metrics/metrics.hpp"

#include "gsrelight/core/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>

namespace gsr {
namespace {

std::array<double, kSsimWindow> gaussian_taps() {
    std::array<double, kSsimWindow> taps{};
    double sum = 0.0;
    for (int k = 0; k < kSsimWindow; ++k) {
        const double d = k - kSsimWindow / 2;
        taps[k] = std::exp(-d * d / (2.0 * kSsimSigma * kSsimSigma));
        sum += taps[k];
    }
    for (double& t : taps) {
        t /= sum;
    }
    return taps;
}

// Separable window sum of f at every valid position.
Image filter_valid(const Image& f) {
    static const auto taps = gaussian_taps();
    const int h = f.height() - kSsimWindow + 1;
    const int w = f.width() - kSsimWindow + 1;
    Image rows(f.height(), w, 1);
    for (int y = 0; y < f.height(); ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int k = 0; k < kSsimWindow; ++k) {
                acc += taps[k] * f.at(y, x + k);
            }
            rows.at(y, x) = acc;
        }
    }
    Image out(h, w, 1);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int k = 0; k < kSsimWindow; ++k) {
                acc += taps[k] * rows.at(y + k, x);
            }
            out.at(y, x) = acc;
        }
    }
    return out;
}

Image channel(const Image& img, int c) {
    Image out(img.height(), img.width(), 1);
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            out.at(y, x) = img.at(y, x, c);
        }
    }
    return out;
}

Image product(const Image& a, const Image& b) {
    Image out = a;
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] *= b[i];
    }
    return out;
}

} // namespace

double psnr_part(const Image& pred, const Image& gt, const Image& mask) {
    require_same_shape(pred, gt, "psnr_part");
    require(mask.height() == pred.height() && mask.width() == pred.width() && mask.channels() == 1,
            ErrorCode::ShapeMismatch, "psnr_part mask must be H x W x 1");
    double sse = 0.0;
    std::size_t count = 0;
    for (int y = 0; y < pred.height(); ++y) {
        for (int x = 0; x < pred.width(); ++x) {
            if (mask.at(y, x) < 0.5) {
                continue;
            }
            for (int c = 0; c < pred.channels(); ++c) {
                const double d = pred.at(y, x, c) - gt.at(y, x, c);
                sse += d * d;
                ++count;
            }
        }
    }
    require(count > 0, ErrorCode::EmptyMask, "psnr_part mask selects no pixels");
    const double mse = sse / static_cast<double>(count);
    if (mse == 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    return 10.0 * std::log10(1.0 / mse);
}

double ssim(const Image& a, const Image& b) {
    require_same_shape(a, b, "ssim");
    require(a.height() >= kSsimWindow && a.width() >= kSsimWindow, ErrorCode::BoxTooSmall,
            "ssim needs at least 11 x 11 pixels");
    constexpr double c1 = 0.01 * 0.01;
    constexpr double c2 = 0.03 * 0.03;
    double total = 0.0;
    for (int c = 0; c < a.channels(); ++c) {
        const Image x = channel(a, c);
        const Image y = channel(b, c);
        const Image mx = filter_valid(x);
        const Image my = filter_valid(y);
        const Image mxx = filter_valid(product(x, x));
        const Image myy = filter_valid(product(y, y));
        const Image mxy = filter_valid(product(x, y));
        double acc = 0.0;
        for (std::size_t i = 0; i < mx.size(); ++i) {
            const double vx = mxx[i] - mx[i] * mx[i];
            const double vy = myy[i] - my[i] * my[i];
            const double cxy = mxy[i] - mx[i] * my[i];
            acc += ((2.0 * mx[i] * my[i] + c1) * (2.0 * cxy + c2)) /
                   ((mx[i] * mx[i] + my[i] * my[i] + c1) * (vx + vy + c2));
        }
        total += acc / static_cast<double>(mx.size());
    }
    return total / a.channels();
}

Image crop(const Image& image, const BBox& box) {
    require(box.y0 >= 0 && box.x0 >= 0 && box.y1 < image.height() && box.x1 < image.width() && box.y0 <= box.y1 &&
                box.x0 <= box.x1,
            ErrorCode::ShapeMismatch, "box outside the image");
    Image out(box.height(), box.width(), image.channels());
    for (int y = 0; y < out.height(); ++y) {
        for (int x = 0; x < out.width(); ++x) {
            for (int c = 0; c < image.channels(); ++c) {
                out.at(y, x, c) = image.at(box.y0 + y, box.x0 + x, c);
            }
        }
    }
    return out;
}

double ssim_part(const Image& pred, const Image& gt, const BBox& box) {
    require_same_shape(pred, gt, "ssim_part");
    require(box.height() >= kSsimWindow && box.width() >= kSsimWindow, ErrorCode::BoxTooSmall,
            "ssim box is " + std::to_string(box.height()) + "x" + std::to_string(box.width()) + ", needs 11x11");
    return ssim(crop(pred, box), crop(gt, box));
}

BBox bbox_from_mask(const Image& mask) {
    require(mask.channels() == 1, ErrorCode::ShapeMismatch, "mask must be single-channel");
    BBox box{mask.height(), mask.width(), -1, -1};
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            if (mask.at(y, x) >= 0.5) {
                box.y0 = std::min(box.y0, y);
                box.x0 = std::min(box.x0, x);
                box.y1 = std::max(box.y1, y);
                box.x1 = std::max(box.x1, x);
            }
        }
    }
    require(box.y1 >= 0, ErrorCode::EmptyMask, "mask selects no pixels");
    return box;
}

BBox expand_box(const BBox& box, int min_size, int height, int width) {
    require(height >= min_size && width >= min_size, ErrorCode::BoxTooSmall, "image smaller than the minimum box");
    auto grow = [min_size](int lo, int hi, int limit) {
        int need = min_size - (hi - lo + 1);
        if (need > 0) {
            lo -= need / 2;
            hi += need - need / 2;
            if (lo < 0) {
                hi -= lo;
                lo = 0;
            }
            if (hi > limit - 1) {
                lo -= hi - (limit - 1);
                hi = limit - 1;
            }
        }
        return std::pair{lo, hi};
    };
    const auto [y0, y1] = grow(box.y0, box.y1, height);
    const auto [x0, x1] = grow(box.x0, box.x1, width);
    return {y0, x0, y1, x1};
}

double similarity01(const std::vector<double>& a, const std::vector<double>& b) {
    require(a.size() == b.size() && !a.empty(), ErrorCode::ShapeMismatch, "embeddings differ in dimension");
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    require(na > 0.0 && nb > 0.0, ErrorCode::InvariantViolation, "zero embedding vector");
    const double cos = std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0);
    return 0.5 * (cos + 1.0);
}

double ctis(const Image& image, const std::string& prompt, Embedder& embedder) {
    return similarity01(embedder.embed_text(prompt), embedder.embed_image(image));
}

double dtis(const Image& image_tgt, const Image& image_init, Embedder& embedder) {
    return similarity01(embedder.embed_image(image_tgt), embedder.embed_image(image_init));
}

std::string format_metric(double v, int digits) {
    if (std::isinf(v) && v > 0) {
        return "inf";
    }
    if (std::isnan(v)) {
        return "nan";
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

} // namespace gsr
