#include "gsrelight/render/camera.hpp"

#include "gsrelight/core/error.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <fstream>

namespace gsr {

void Camera::validate() const {
    require(fx > 0.0 && fy > 0.0, ErrorCode::InvariantViolation, "focal lengths must be positive");
    require(near_clip > 0.0 && near_clip < far_clip, ErrorCode::InvariantViolation, "need 0 < near < far");
    require(width > 0 && height > 0, ErrorCode::InvariantViolation, "image size must be positive");
    require(world_to_cam.allFinite(), ErrorCode::InvariantViolation, "world_to_cam must be finite");
    const Eigen::Matrix3d r = rotation();
    require((r * r.transpose() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-6,
            ErrorCode::InvariantViolation, "world_to_cam rotation is not orthonormal");
}

Eigen::Vector3d Camera::center() const {
    return -rotation().transpose() * translation();
}

Camera Camera::look_at(const Eigen::Vector3d& eye, const Eigen::Vector3d& target, const Eigen::Vector3d& up,
                       double fov_x_radians, int width, int height) {
    const Eigen::Vector3d forward = (target - eye).normalized();
    Eigen::Vector3d right = forward.cross(up);
    if (right.norm() < 1e-9) {
        right = forward.unitOrthogonal();
    }
    right.normalize();
    const Eigen::Vector3d down = forward.cross(right);

    Camera cam;
    Eigen::Matrix3d r;
    r.row(0) = right.transpose();
    r.row(1) = down.transpose();
    r.row(2) = forward.transpose();
    cam.world_to_cam.setIdentity();
    cam.world_to_cam.topLeftCorner<3, 3>() = r;
    cam.world_to_cam.topRightCorner<3, 1>() = -r * eye;
    cam.width = width;
    cam.height = height;
    cam.fx = 0.5 * width / std::tan(0.5 * fov_x_radians);
    cam.fy = cam.fx;
    cam.cx = 0.5 * width;
    cam.cy = 0.5 * height;
    return cam;
}

Camera camera_from_json(const nlohmann::json& j) {
    Camera cam;
    try {
        cam.fx = j.at("fx").get<double>();
        cam.fy = j.at("fy").get<double>();
        cam.cx = j.at("cx").get<double>();
        cam.cy = j.at("cy").get<double>();
        cam.width = j.at("width").get<int>();
        cam.height = j.at("height").get<int>();
        cam.near_clip = j.value("near", 0.01);
        cam.far_clip = j.value("far", 100.0);
        const auto& m = j.at("world_to_cam");
        require(m.is_array() && m.size() == 16, ErrorCode::MalformedFile, "world_to_cam needs 16 numbers");
        for (int r = 0; r < 4; ++r) {
            for (int c = 0; c < 4; ++c) {
                cam.world_to_cam(r, c) = m[static_cast<std::size_t>(r * 4 + c)].get<double>();
            }
        }
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::MalformedFile, std::string("camera: ") + e.what());
    }
    cam.validate();
    return cam;
}

nlohmann::json to_json(const Camera& cam) {
    nlohmann::json m = nlohmann::json::array();
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) {
            m.push_back(cam.world_to_cam(r, c));
        }
    }
    return {{"fx", cam.fx},       {"fy", cam.fy},         {"cx", cam.cx},           {"cy", cam.cy},
            {"width", cam.width}, {"height", cam.height}, {"near", cam.near_clip},  {"far", cam.far_clip},
            {"world_to_cam", m}};
}

std::map<std::string, Camera> load_cameras(const std::filesystem::path& path) {
    std::ifstream in(path);
    require(static_cast<bool>(in), ErrorCode::IoFailure, "cannot open " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::MalformedFile, path.string() + ": " + e.what());
    }
    require(j.is_object(), ErrorCode::MalformedFile, path.string() + ": expected an object of cameras");
    std::map<std::string, Camera> out;
    for (const auto& [id, doc] : j.items()) {
        out.emplace(id, camera_from_json(doc));
    }
    return out;
}

void save_cameras(const std::filesystem::path& path, const std::map<std::string, Camera>& cameras) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [id, cam] : cameras) {
        j[id] = to_json(cam);
    }
    std::ofstream out(path);
    require(static_cast<bool>(out), ErrorCode::IoFailure, "cannot write " + path.string());
    out << j.dump(2) << "\n";
}

} // namespace gsr
