#pragma once

#include "gsrelight/model/gaussian_cloud.hpp"

#include <filesystem>
#include <vector>

namespace gsr {

/// How activated attributes are encoded in the file.
///  Standard: the usual 3DGS export (opacity as a logit, scale_* as log-scales).
///  Linear:   opacity and scale_* stored already activated; the header carries
///            `comment storage linear`. Values are range-checked on load.
enum class CloudStorage { Standard, Linear };

/// Binary little-endian PLY point-attribute file with x,y,z, nx,ny,nz,
/// f_dc_0..2, f_rest_*, opacity, scale_0..2, rot_0..3.
/// The number of f_rest_* properties (0, 9, 24 or 45) sets active_sh_degree.
[[nodiscard]] GaussianCloud load_cloud(const std::filesystem::path& path);
void save_cloud(const GaussianCloud& cloud, const std::filesystem::path& path,
                CloudStorage storage = CloudStorage::Standard);

/// Positions-only variant of the same file format (x, y, z per record).
void save_points(const std::filesystem::path& path, const std::vector<Eigen::Vector3d>& points);
[[nodiscard]] std::vector<Eigen::Vector3d> load_points(const std::filesystem::path& path);

} // namespace gsr
