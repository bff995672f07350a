#pragma once

#include "gsrelight/mesh/mesh.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace gsr {

enum class SampleStrategy { SurfaceArea, UniformTriangle, Bbox };

[[nodiscard]] SampleStrategy sample_strategy_from_string(const std::string& s);
[[nodiscard]] const char* to_string(SampleStrategy s) noexcept;

/// Default point counts of the object, object+scene and scene presets.
inline constexpr int kObjectPresetCount = 10000;
inline constexpr int kObjectScenePresetCount = 5000;
inline constexpr int kScenePresetCount = 50000;

struct SampleConfig {
    SampleStrategy strategy = SampleStrategy::SurfaceArea;
    int count = kObjectPresetCount;
    std::uint64_t rng_seed = 0;

    void validate() const;
};

struct MeshSample {
    Eigen::Vector3d point;
    int object = 0;
    int triangle = 0;
};

/// (1 - u) A + u (1 - r2) B + u r2 C with u = sqrt(r1).
[[nodiscard]] Eigen::Vector3d sample_in_triangle(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                                                 const Eigen::Vector3d& c, double r1, double r2);

/// surface_area: object ~ volume^(2/3), triangle ~ area. uniform_triangle:
/// object and triangle uniform. bbox: uniform point in the scene box moved
/// onto a uniform point of its nearest triangle. Samples are drawn in chunks
/// of 4096 with per-chunk streams derived from rng_seed.
[[nodiscard]] std::vector<MeshSample> sample_mesh(const MeshScene& scene, const SampleConfig& cfg);
[[nodiscard]] std::vector<Eigen::Vector3d> sample_points(const MeshScene& scene, const SampleConfig& cfg);

} // namespace gsr
