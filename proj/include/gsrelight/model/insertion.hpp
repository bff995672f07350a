#pragma once

#include "gsrelight/model/gaussian_cloud.hpp"

#include <json.hpp>

#include <filesystem>
#include <utility>

namespace gsr {

/// Similarity transform placing an object in a scene: x -> R (s x) + t.
struct InsertionSpec {
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();
    Eigen::Quaterniond rotation = Eigen::Quaterniond::Identity();
    double uniform_scale = 1.0;
    /// Indices of the object Gaussians inside the merged cloud (output only).
    IndexRange object_range;

    void validate() const;
};

/// Transform equal to applying `inner` first, then `outer`.
[[nodiscard]] InsertionSpec compose(const InsertionSpec& outer, const InsertionSpec& inner);

enum class ShOnInsert {
    /// Degrees >= 1 are zeroed; the relighting stage re-learns them.
    Reset,
    /// Keeps the original coefficients unrotated. View-dependent color is then
    /// expressed in the object's frame, so it is wrong by the insertion rotation.
    RawPreview,
};

/// Applies the similarity transform to Gaussians in `range`, in place:
/// means scaled/rotated/translated, quaternions left-multiplied by the spec
/// rotation, log-scales shifted by log(uniform_scale). Opacity and SH untouched.
void transform_gaussians(GaussianCloud& cloud, IndexRange range, const InsertionSpec& spec);

/// Scene Gaussians first (bit-identical), transformed object Gaussians after.
/// Returns the merged cloud and `spec` with object_range filled in.
[[nodiscard]] std::pair<GaussianCloud, InsertionSpec> insert_object(const GaussianCloud& scene,
                                                                    const GaussianCloud& object,
                                                                    const InsertionSpec& spec,
                                                                    ShOnInsert sh_mode = ShOnInsert::Reset);

/// Sets every object Gaussian's base color to the per-channel mean of the
/// object's base colors and zeroes all higher SH coefficients.
[[nodiscard]] GaussianCloud init_object_appearance(GaussianCloud cloud, IndexRange range);

struct ShScheduleConfig {
    int sh_degree_interval = 5000;
};

/// min(max_degree, step / interval).
[[nodiscard]] int active_degree_at(long step, const ShScheduleConfig& cfg, int max_degree = kMaxShDegree);

/// {translation:[3], rotation_wxyz:[4], scale: number}
[[nodiscard]] InsertionSpec insertion_spec_from_json(const nlohmann::json& j);
[[nodiscard]] nlohmann::json to_json(const InsertionSpec& spec);
[[nodiscard]] InsertionSpec load_insertion_spec(const std::filesystem::path& path);

} // namespace gsr
