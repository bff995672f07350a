#include "gsrelight/model/insertion.hpp"

#include "gsrelight/core/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace gsr {

void InsertionSpec::validate() const {
    require(std::abs(rotation.coeffs().norm() - 1.0) <= 1e-6, ErrorCode::InvariantViolation,
            "insertion rotation is not a unit quaternion");
    require(uniform_scale > 0.0 && std::isfinite(uniform_scale), ErrorCode::InvariantViolation,
            "uniform_scale must be positive");
    require(translation.allFinite(), ErrorCode::InvariantViolation, "translation must be finite");
}

InsertionSpec compose(const InsertionSpec& outer, const InsertionSpec& inner) {
    InsertionSpec out;
    out.rotation = outer.rotation * inner.rotation;
    out.uniform_scale = outer.uniform_scale * inner.uniform_scale;
    out.translation = outer.rotation * (outer.uniform_scale * inner.translation) + outer.translation;
    out.object_range = inner.object_range;
    return out;
}

void transform_gaussians(GaussianCloud& cloud, IndexRange range, const InsertionSpec& spec) {
    spec.validate();
    require(range.end <= cloud.size(), ErrorCode::InvariantViolation, "range exceeds cloud size");
    const Eigen::Matrix3d r = spec.rotation.toRotationMatrix();
    const double log_scale = std::log(spec.uniform_scale);
    for (std::size_t i = range.begin; i < range.end; ++i) {
        const Eigen::Vector3d mean = r * (spec.uniform_scale * cloud.means[i].cast<double>()) + spec.translation;
        cloud.means[i] = mean.cast<float>();

        const Eigen::Quaterniond q = spec.rotation * cloud.rotation(i);
        cloud.rotations[i] = Eigen::Vector4f(static_cast<float>(q.w()), static_cast<float>(q.x()),
                                             static_cast<float>(q.y()), static_cast<float>(q.z()));
        for (int a = 0; a < 3; ++a) {
            cloud.log_scales[i][a] = static_cast<float>(cloud.log_scales[i][a] + log_scale);
        }
    }
}

std::pair<GaussianCloud, InsertionSpec> insert_object(const GaussianCloud& scene, const GaussianCloud& object,
                                                      const InsertionSpec& spec, ShOnInsert sh_mode) {
    scene.validate();
    object.validate();
    spec.validate();

    GaussianCloud merged = scene;
    merged.append(object);
    const IndexRange range{scene.size(), merged.size()};
    transform_gaussians(merged, range, spec);
    if (sh_mode == ShOnInsert::Reset) {
        for (std::size_t i = range.begin; i < range.end; ++i) {
            auto coeffs = merged.sh_of(i);
            std::fill(coeffs.begin() + 3, coeffs.end(), 0.0f);
        }
    }
    if (scene.empty()) {
        merged.active_sh_degree = object.active_sh_degree;
    }

    InsertionSpec out = spec;
    out.object_range = range;
    return {std::move(merged), out};
}

GaussianCloud init_object_appearance(GaussianCloud cloud, IndexRange range) {
    require(!range.empty(), ErrorCode::EmptyRange, "object range is empty");
    require(range.end <= cloud.size(), ErrorCode::InvariantViolation, "range exceeds cloud size");
    double sum[3] = {0.0, 0.0, 0.0};
    for (std::size_t i = range.begin; i < range.end; ++i) {
        for (int c = 0; c < 3; ++c) {
            sum[c] += cloud.sh_at(i, 0, c);
        }
    }
    const double n = static_cast<double>(range.size());
    for (std::size_t i = range.begin; i < range.end; ++i) {
        auto coeffs = cloud.sh_of(i);
        for (int c = 0; c < 3; ++c) {
            coeffs[c] = static_cast<float>(sum[c] / n);
        }
        std::fill(coeffs.begin() + 3, coeffs.end(), 0.0f);
    }
    return cloud;
}

int active_degree_at(long step, const ShScheduleConfig& cfg, int max_degree) {
    require(cfg.sh_degree_interval > 0, ErrorCode::InvariantViolation, "sh_degree_interval must be positive");
    require(step >= 0, ErrorCode::InvariantViolation, "step must be non-negative");
    return static_cast<int>(std::min<long>(max_degree, step / cfg.sh_degree_interval));
}

InsertionSpec insertion_spec_from_json(const nlohmann::json& j) {
    InsertionSpec spec;
    try {
        const auto& t = j.at("translation");
        const auto& q = j.at("rotation_wxyz");
        require(t.size() == 3 && q.size() == 4, ErrorCode::MalformedFile, "translation needs 3 and rotation_wxyz 4 numbers");
        spec.translation = {t[0].get<double>(), t[1].get<double>(), t[2].get<double>()};
        spec.rotation = Eigen::Quaterniond(q[0].get<double>(), q[1].get<double>(), q[2].get<double>(), q[3].get<double>());
        spec.uniform_scale = j.value("scale", 1.0);
        if (j.contains("object_range")) {
            const auto& r = j.at("object_range");
            require(r.size() == 2, ErrorCode::MalformedFile, "object_range needs [begin, end]");
            spec.object_range = {r[0].get<std::size_t>(), r[1].get<std::size_t>()};
            require(spec.object_range.begin <= spec.object_range.end, ErrorCode::MalformedFile,
                    "object_range begin exceeds end");
        }
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::MalformedFile, std::string("insertion spec: ") + e.what());
    }
    spec.validate();
    return spec;
}

nlohmann::json to_json(const InsertionSpec& spec) {
    nlohmann::json j;
    j["translation"] = {spec.translation.x(), spec.translation.y(), spec.translation.z()};
    j["rotation_wxyz"] = {spec.rotation.w(), spec.rotation.x(), spec.rotation.y(), spec.rotation.z()};
    j["scale"] = spec.uniform_scale;
    if (!spec.object_range.empty()) {
        j["object_range"] = {spec.object_range.begin, spec.object_range.end};
    }
    return j;
}

InsertionSpec load_insertion_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    require(static_cast<bool>(in), ErrorCode::IoFailure, "cannot open " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::MalformedFile, path.string() + ": " + e.what());
    }
    return insertion_spec_from_json(j);
}

} // namespace gsr
