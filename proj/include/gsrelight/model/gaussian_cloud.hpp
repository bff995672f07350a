#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace gsr {

inline constexpr int kMaxShDegree = 3;
inline constexpr int kShCoeffs = (kMaxShDegree + 1) * (kMaxShDegree + 1);
inline constexpr int kShFloats = kShCoeffs * 3;

[[nodiscard]] constexpr int sh_coeff_count(int degree) noexcept { return (degree + 1) * (degree + 1); }

/// Half-open range of Gaussian indices [begin, end).
struct IndexRange {
    std::size_t begin = 0;
    std::size_t end = 0;

    [[nodiscard]] std::size_t size() const noexcept { return end - begin; }
    [[nodiscard]] bool empty() const noexcept { return end <= begin; }
    [[nodiscard]] bool contains(std::size_t i) const noexcept { return i >= begin && i < end; }
    [[nodiscard]] std::vector<std::size_t> indices() const;

    bool operator==(const IndexRange&) const = default;
};

[[nodiscard]] double sigmoid(double x) noexcept;
[[nodiscard]] double logit(double p) noexcept;

/// 3DGS parametrization, stored as the standard exports store it: log-scales,
/// opacity logits and (w, x, y, z) quaternions. Linear values are exposed
/// through the accessors. SH coefficients are laid out [gaussian][coeff][rgb];
/// coefficient 0 is the view-independent base color.
struct GaussianCloud {
    std::vector<Eigen::Vector3f> means;
    std::vector<Eigen::Vector3f> log_scales;
    std::vector<Eigen::Vector4f> rotations;
    std::vector<float> opacity_logits;
    std::vector<float> sh;
    int active_sh_degree = kMaxShDegree;

    [[nodiscard]] std::size_t size() const noexcept { return means.size(); }
    [[nodiscard]] bool empty() const noexcept { return means.empty(); }

    [[nodiscard]] Eigen::Vector3d scale(std::size_t i) const;
    [[nodiscard]] double opacity(std::size_t i) const;
    [[nodiscard]] Eigen::Quaterniond rotation(std::size_t i) const;

    [[nodiscard]] std::span<float, kShFloats> sh_of(std::size_t i) {
        return std::span<float, kShFloats>(sh.data() + i * kShFloats, kShFloats);
    }
    [[nodiscard]] std::span<const float, kShFloats> sh_of(std::size_t i) const {
        return std::span<const float, kShFloats>(sh.data() + i * kShFloats, kShFloats);
    }
    [[nodiscard]] float& sh_at(std::size_t i, int coeff, int channel) {
        return sh[i * kShFloats + static_cast<std::size_t>(coeff) * 3 + channel];
    }
    [[nodiscard]] float sh_at(std::size_t i, int coeff, int channel) const {
        return sh[i * kShFloats + static_cast<std::size_t>(coeff) * 3 + channel];
    }

    /// Appends one Gaussian given linear scale and opacity. `sh_coeffs` may be
    /// shorter than kShFloats; missing coefficients are zero.
    void push_back(const Eigen::Vector3f& mean, const Eigen::Vector3f& scale, const Eigen::Vector4f& rotation_wxyz,
                   float opacity, std::span<const float> sh_coeffs = {});
    void append(const GaussianCloud& other);
    [[nodiscard]] GaussianCloud without(IndexRange range) const;

    /// Throws InvariantViolation when any documented invariant fails.
    void validate() const;

    bool operator==(const GaussianCloud&) const = default;
};

} // namespace gsr
