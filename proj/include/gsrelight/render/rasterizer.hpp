#pragma once

#include "gsrelight/core/image.hpp"
#include "gsrelight/model/gaussian_cloud.hpp"
#include "gsrelight/render/camera.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace gsr {

/// Added to the diagonal of every projected 2D covariance (pixels^2).
inline constexpr double kCovarianceDilation = 0.3;
inline constexpr double kMaxSplatAlpha = 0.99;
inline constexpr double kMinSplatAlpha = 1.0 / 255.0;

struct RenderOptions {
    /// Gaussians that are not drawn at all.
    std::optional<IndexRange> excluded;
    /// Gaussians whose SH evaluation is capped at `limited_degree`.
    std::optional<IndexRange> degree_limited;
    int limited_degree = 0;
};

/// One Gaussian's contribution at one pixel.
struct SplatEntry {
    std::uint32_t gaussian;
    double alpha;
    double weight;
};

/// Output of a forward pass. Per-pixel contributions are stored front to back
/// in CSR form. Weights do not depend on colors, so color gradients need
/// nothing else.
struct RenderBundle {
    Image rgb;
    Image alpha;
    Image depth;
    std::vector<std::size_t> pixel_offsets;
    std::vector<SplatEntry> entries;
    /// Per Gaussian: 0.5 + sum c Y before clamping, and the SH degree used
    /// (-1 when the Gaussian was culled or excluded).
    std::vector<Eigen::Vector3d> radiance;
    std::vector<std::int8_t> sh_degree;
    Eigen::Vector3d background = Eigen::Vector3d::Zero();
    double covariance_dilation = kCovarianceDilation;

    [[nodiscard]] std::span<const SplatEntry> pixel(int y, int x) const {
        const std::size_t p = static_cast<std::size_t>(y) * rgb.width() + x;
        return {entries.data() + pixel_offsets[p], entries.data() + pixel_offsets[p + 1]};
    }
};

/// EWA splatting with a global front-to-back depth sort (ties by index).
[[nodiscard]] RenderBundle render(const GaussianCloud& cloud, const Camera& cam, const Eigen::Vector3d& background,
                                  const RenderOptions& options = {});

/// Recomputes per-Gaussian colors and the rgb image from the frozen weights.
/// Matches a fresh render bit-for-bit when geometry and camera are unchanged.
void recolor(RenderBundle& bundle, const GaussianCloud& cloud, const Camera& cam, const RenderOptions& options = {});

/// mask(p) = sum of weights of Gaussians in `indices` at p.
[[nodiscard]] Image mask_from_bundle(const RenderBundle& bundle, std::span<const std::size_t> indices);
[[nodiscard]] Image mask_from_bundle(const RenderBundle& bundle, IndexRange range);
[[nodiscard]] Image render_mask(const GaussianCloud& cloud, const Camera& cam, std::span<const std::size_t> indices);

/// Gradient w.r.t. SH coefficients, laid out like GaussianCloud::sh.
struct ColorGrad {
    std::vector<double> d_sh;

    [[nodiscard]] std::span<const double, kShFloats> of(std::size_t i) const {
        return std::span<const double, kShFloats>(d_sh.data() + i * kShFloats, kShFloats);
    }
};

/// Gradient of sum_p <dL_drgb(p), rgb(p)> with weights held fixed. Channels
/// whose color was clamped receive zero gradient.
[[nodiscard]] ColorGrad backprop_color(const RenderBundle& bundle, const GaussianCloud& cloud, const Camera& cam,
                                       const Image& dL_drgb);

} // namespace gsr
