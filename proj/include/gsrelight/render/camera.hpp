#pragma once

#include <Eigen/Core>

#include <json.hpp>

#include <filesystem>
#include <map>
#include <string>

namespace gsr {

/// Pinhole camera, OpenCV axes (x right, y down, z forward). A point p maps
/// to pixel coordinates u = fx x/z + cx, v = fy y/z + cy; pixel (row, col)
/// has its center at (col + 0.5, row + 0.5).
struct Camera {
    Eigen::Matrix4d world_to_cam = Eigen::Matrix4d::Identity();
    double fx = 1.0;
    double fy = 1.0;
    double cx = 0.0;
    double cy = 0.0;
    int width = 1;
    int height = 1;
    double near_clip = 0.01;
    double far_clip = 100.0;

    void validate() const;
    [[nodiscard]] Eigen::Vector3d center() const;
    [[nodiscard]] Eigen::Matrix3d rotation() const { return world_to_cam.topLeftCorner<3, 3>(); }
    [[nodiscard]] Eigen::Vector3d translation() const { return world_to_cam.topRightCorner<3, 1>(); }

    /// Camera at `eye` looking at `target`; `up` is the world up direction.
    /// Focal length from the horizontal field of view; principal point centered.
    [[nodiscard]] static Camera look_at(const Eigen::Vector3d& eye, const Eigen::Vector3d& target,
                                        const Eigen::Vector3d& up, double fov_x_radians, int width, int height);
};

/// {fx, fy, cx, cy, width, height, world_to_cam: 16 numbers row-major, near, far}
[[nodiscard]] Camera camera_from_json(const nlohmann::json& j);
[[nodiscard]] nlohmann::json to_json(const Camera& cam);

/// A cameras.json file: an object mapping camera ids to camera documents.
[[nodiscard]] std::map<std::string, Camera> load_cameras(const std::filesystem::path& path);
void save_cameras(const std::filesystem::path& path, const std::map<std::string, Camera>& cameras);

} // namespace gsr
