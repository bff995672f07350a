#include "gsrelight/render/spherical_harmonics.hpp"

#include "gsrelight/core/error.hpp"

#include <algorithm>
#include <cmath>

namespace gsr {
namespace {

constexpr double kC1 = 0.4886025119029199;
constexpr double kC2[] = {1.0925484305920792, -1.0925484305920792, 0.31539156525252005, -1.0925484305920792,
                          0.5462742152960396};
constexpr double kC3[] = {-0.5900435899266435, 2.890611442640554, -0.4570457994644658, 0.3731763325901154,
                          -0.4570457994644658, 1.445305721320277,  -0.5900435899266435};

} // namespace

std::array<double, kShCoeffs> sh_basis(const Eigen::Vector3d& dir, int degree) {
    std::array<double, kShCoeffs> y{};
    const double x = dir.x();
    const double yy = dir.y();
    const double z = dir.z();
    y[0] = kShC0;
    if (degree >= 1) {
        y[1] = -kC1 * yy;
        y[2] = kC1 * z;
        y[3] = -kC1 * x;
    }
    if (degree >= 2) {
        const double xx = x * x, y2 = yy * yy, zz = z * z;
        y[4] = kC2[0] * x * yy;
        y[5] = kC2[1] * yy * z;
        y[6] = kC2[2] * (2.0 * zz - xx - y2);
        y[7] = kC2[3] * x * z;
        y[8] = kC2[4] * (xx - y2);
    }
    if (degree >= 3) {
        const double xx = x * x, y2 = yy * yy, zz = z * z;
        y[9] = kC3[0] * yy * (3.0 * xx - y2);
        y[10] = kC3[1] * x * yy * z;
        y[11] = kC3[2] * yy * (4.0 * zz - xx - y2);
        y[12] = kC3[3] * z * (2.0 * zz - 3.0 * xx - 3.0 * y2);
        y[13] = kC3[4] * x * (4.0 * zz - xx - y2);
        y[14] = kC3[5] * z * (xx - y2);
        y[15] = kC3[6] * x * (xx - 3.0 * y2);
    }
    return y;
}

Eigen::Vector3d sh_radiance(std::span<const float> coeffs, const Eigen::Vector3d& dir, int degree) {
    require(degree >= 0 && degree <= kMaxShDegree, ErrorCode::InvariantViolation, "SH degree out of range");
    const int n = sh_coeff_count(degree);
    require(coeffs.size() >= static_cast<std::size_t>(3 * n), ErrorCode::ShapeMismatch, "too few SH coefficients");
    const auto basis = sh_basis(dir, degree);
    Eigen::Vector3d out = Eigen::Vector3d::Constant(0.5);
    for (int k = 0; k < n; ++k) {
        for (int c = 0; c < 3; ++c) {
            out[c] += basis[k] * coeffs[static_cast<std::size_t>(k) * 3 + c];
        }
    }
    return out;
}

Eigen::Vector3d eval_sh(std::span<const float> coeffs, const Eigen::Vector3d& dir, int degree) {
    return sh_radiance(coeffs, dir, degree).cwiseMax(0.0).cwiseMin(1.0);
}

} // namespace gsr
