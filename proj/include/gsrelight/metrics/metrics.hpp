#pragma once

#include "gsrelight/core/image.hpp"
#include "gsrelight/guidance/services.hpp"

#include <string>
#include <vector>

namespace gsr {

/// Reference CTIS/DTIS averages printed next to measured ones.
inline constexpr double kReferenceCtis = 0.627;
inline constexpr double kReferenceDtis = 0.509;

/// Inclusive pixel box.
struct BBox {
    int y0 = 0;
    int x0 = 0;
    int y1 = 0;
    int x1 = 0;

    [[nodiscard]] int height() const noexcept { return y1 - y0 + 1; }
    [[nodiscard]] int width() const noexcept { return x1 - x0 + 1; }
    bool operator==(const BBox&) const = default;
};

inline constexpr int kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;

/// 10 log10(1 / MSE) over pixels with mask >= 0.5; +inf when MSE is zero.
[[nodiscard]] double psnr_part(const Image& pred, const Image& gt, const Image& mask);

/// Mean SSIM over the valid (fully covered) window positions of the images,
/// averaged over channels. Gaussian 11 x 11 window, sigma 1.5, C1 = 0.01^2,
/// C2 = 0.03^2, data range 1.
[[nodiscard]] double ssim(const Image& a, const Image& b);
/// ssim over the crop; throws BoxTooSmall below 11 x 11.
[[nodiscard]] double ssim_part(const Image& pred, const Image& gt, const BBox& box);

[[nodiscard]] Image crop(const Image& image, const BBox& box);

/// Tight box of pixels with mask >= 0.5.
[[nodiscard]] BBox bbox_from_mask(const Image& mask);
/// Grows `box` symmetrically to at least min_size per side, staying inside the image.
[[nodiscard]] BBox expand_box(const BBox& box, int min_size, int height, int width);

/// (cos + 1) / 2
[[nodiscard]] double similarity01(const std::vector<double>& a, const std::vector<double>& b);
[[nodiscard]] double ctis(const Image& image, const std::string& prompt, Embedder& embedder);
[[nodiscard]] double dtis(const Image& image_tgt, const Image& image_init, Embedder& embedder);

/// "inf" for +inf, otherwise fixed with `digits` decimals.
[[nodiscard]] std::string format_metric(double v, int digits = 4);

} // namespace gsr
