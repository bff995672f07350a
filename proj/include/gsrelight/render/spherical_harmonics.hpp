#pragma once

#include "gsrelight/model/gaussian_cloud.hpp"

#include <Eigen/Core>

#include <array>
#include <span>

namespace gsr {

inline constexpr double kShC0 = 0.28209479177387814;

/// Real SH basis values Y_k(dir) for k < (degree+1)^2, in the ordering and
/// sign convention of the standard 3DGS exports. Remaining entries are zero.
[[nodiscard]] std::array<double, kShCoeffs> sh_basis(const Eigen::Vector3d& dir, int degree);

/// Unclamped 0.5 + sum_k c_k Y_k(dir) per channel. `coeffs` is [coeff][rgb].
[[nodiscard]] Eigen::Vector3d sh_radiance(std::span<const float> coeffs, const Eigen::Vector3d& dir, int degree);

/// clamp(0.5 + sum_k c_k Y_k(dir), 0, 1) per channel; dir must be unit length.
[[nodiscard]] Eigen::Vector3d eval_sh(std::span<const float> coeffs, const Eigen::Vector3d& dir, int degree);

} // namespace gsr
