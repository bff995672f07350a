#include "gsrelight/model/gaussian_cloud.hpp"

#include "gsrelight/core/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace gsr {

std::vector<std::size_t> IndexRange::indices() const {
    std::vector<std::size_t> out;
    for (std::size_t i = begin; i < end; ++i) {
        out.push_back(i);
    }
    return out;
}

double sigmoid(double x) noexcept {
    return 1.0 / (1.0 + std::exp(-x));
}

double logit(double p) noexcept {
    // Saturate so 0 and 1 stay finite; sigmoid(+-88) is 1 / ~6e-39 in float.
    constexpr double kLimit = 88.0;
    if (p <= 0.0) {
        return -kLimit;
    }
    if (p >= 1.0) {
        return kLimit;
    }
    return std::clamp(std::log(p / (1.0 - p)), -kLimit, kLimit);
}

Eigen::Vector3d GaussianCloud::scale(std::size_t i) const {
    const Eigen::Vector3f& s = log_scales[i];
    return {std::exp(static_cast<double>(s.x())), std::exp(static_cast<double>(s.y())),
            std::exp(static_cast<double>(s.z()))};
}

double GaussianCloud::opacity(std::size_t i) const {
    return sigmoid(opacity_logits[i]);
}

Eigen::Quaterniond GaussianCloud::rotation(std::size_t i) const {
    const Eigen::Vector4f& q = rotations[i];
    return {q[0], q[1], q[2], q[3]};
}

void GaussianCloud::push_back(const Eigen::Vector3f& mean, const Eigen::Vector3f& scale,
                              const Eigen::Vector4f& rotation_wxyz, float opacity, std::span<const float> sh_coeffs) {
    require(sh_coeffs.size() <= static_cast<std::size_t>(kShFloats), ErrorCode::InvariantViolation,
            "too many SH coefficients");
    means.push_back(mean);
    log_scales.emplace_back(std::log(scale.x()), std::log(scale.y()), std::log(scale.z()));
    rotations.push_back(rotation_wxyz);
    opacity_logits.push_back(static_cast<float>(logit(opacity)));
    const std::size_t base = sh.size();
    sh.resize(base + kShFloats, 0.0f);
    std::copy(sh_coeffs.begin(), sh_coeffs.end(), sh.begin() + static_cast<std::ptrdiff_t>(base));
}

void GaussianCloud::append(const GaussianCloud& other) {
    means.insert(means.end(), other.means.begin(), other.means.end());
    log_scales.insert(log_scales.end(), other.log_scales.begin(), other.log_scales.end());
    rotations.insert(rotations.end(), other.rotations.begin(), other.rotations.end());
    opacity_logits.insert(opacity_logits.end(), other.opacity_logits.begin(), other.opacity_logits.end());
    sh.insert(sh.end(), other.sh.begin(), other.sh.end());
}

GaussianCloud GaussianCloud::without(IndexRange range) const {
    GaussianCloud out;
    out.active_sh_degree = active_sh_degree;
    for (std::size_t i = 0; i < size(); ++i) {
        if (range.contains(i)) {
            continue;
        }
        out.means.push_back(means[i]);
        out.log_scales.push_back(log_scales[i]);
        out.rotations.push_back(rotations[i]);
        out.opacity_logits.push_back(opacity_logits[i]);
        const auto coeffs = sh_of(i);
        out.sh.insert(out.sh.end(), coeffs.begin(), coeffs.end());
    }
    return out;
}

void GaussianCloud::validate() const {
    const std::size_t n = means.size();
    require(log_scales.size() == n && rotations.size() == n && opacity_logits.size() == n &&
                sh.size() == n * kShFloats,
            ErrorCode::InvariantViolation, "attribute arrays have inconsistent lengths");
    require(active_sh_degree >= 0 && active_sh_degree <= kMaxShDegree, ErrorCode::InvariantViolation,
            "active_sh_degree out of range: " + std::to_string(active_sh_degree));
    for (std::size_t i = 0; i < n; ++i) {
        const bool finite = means[i].allFinite() && log_scales[i].allFinite() && rotations[i].allFinite() &&
                            std::isfinite(opacity_logits[i]);
        require(finite, ErrorCode::InvariantViolation, "non-finite attribute at gaussian " + std::to_string(i));
        const double norm = rotations[i].cast<double>().norm();
        require(std::abs(norm - 1.0) <= 1e-6, ErrorCode::InvariantViolation,
                "quaternion not unit at gaussian " + std::to_string(i));
    }
    for (float v : sh) {
        require(std::isfinite(v), ErrorCode::InvariantViolation, "non-finite SH coefficient");
    }
}

} // namespace gsr
