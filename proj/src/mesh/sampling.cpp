#include "gsrelight/mesh/sampling.hpp"

#include "gsrelight/core/error.hpp"
#include "gsrelight/core/rng.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <random>

namespace gsr {
namespace {

constexpr int kChunk = 4096;

} // namespace

SampleStrategy sample_strategy_from_string(const std::string& s) {
    if (s == "surface_area") {
        return SampleStrategy::SurfaceArea;
    }
    if (s == "uniform_triangle") {
        return SampleStrategy::UniformTriangle;
    }
    if (s == "bbox") {
        return SampleStrategy::Bbox;
    }
    fail(ErrorCode::Usage, "unknown strategy '" + s + "' (surface_area, uniform_triangle, bbox)");
}

const char* to_string(SampleStrategy s) noexcept {
    switch (s) {
    case SampleStrategy::SurfaceArea: return "surface_area";
    case SampleStrategy::UniformTriangle: return "uniform_triangle";
    case SampleStrategy::Bbox: return "bbox";
    }
    return "unknown";
}

void SampleConfig::validate() const {
    require(count > 0, ErrorCode::InvariantViolation, "sample count must be positive");
}

Eigen::Vector3d sample_in_triangle(const Eigen::Vector3d& a, const Eigen::Vector3d& b, const Eigen::Vector3d& c,
                                   double r1, double r2) {
    const double u = std::sqrt(r1);
    return (1.0 - u) * a + u * (1.0 - r2) * b + u * r2 * c;
}

std::vector<MeshSample> sample_mesh(const MeshScene& scene, const SampleConfig& cfg) {
    cfg.validate();
    scene.validate();
    require(scene.triangle_count() > 0, ErrorCode::EmptyMesh, "mesh scene has no triangles");
    const int n_obj = static_cast<int>(scene.objects.size());

    std::vector<double> object_weights(n_obj, 1.0);
    std::vector<std::discrete_distribution<int>> by_area(n_obj);
    if (cfg.strategy == SampleStrategy::SurfaceArea) {
        double total = 0.0;
        for (int o = 0; o < n_obj; ++o) {
            object_weights[o] = std::pow(mesh_volume(scene.objects[o]), 2.0 / 3.0);
            total += object_weights[o];
            std::vector<double> areas;
            for (const auto& t : scene.objects[o].triangles) {
                const auto& v = scene.objects[o].vertices;
                areas.push_back(triangle_area(v[t[0]], v[t[1]], v[t[2]]));
            }
            by_area[o] = std::discrete_distribution<int>(areas.begin(), areas.end());
        }
        require(total > 0.0, ErrorCode::ZeroVolumeAll, "every object has zero volume");
    }
    for (int o = 0; o < n_obj; ++o) {
        if (scene.objects[o].triangles.empty()) {
            object_weights[o] = 0.0;
        }
    }
    std::discrete_distribution<int> pick_object(object_weights.begin(), object_weights.end());

    Eigen::Vector3d lo = Eigen::Vector3d::Constant(std::numeric_limits<double>::infinity());
    Eigen::Vector3d hi = -lo;
    for (const auto& obj : scene.objects) {
        for (const auto& v : obj.vertices) {
            lo = lo.cwiseMin(v);
            hi = hi.cwiseMax(v);
        }
    }
    std::optional<AabbTree> tree;
    if (cfg.strategy == SampleStrategy::Bbox) {
        tree.emplace(scene);
    }

    std::vector<MeshSample> out;
    out.reserve(static_cast<std::size_t>(cfg.count));
    for (int chunk = 0; chunk * kChunk < cfg.count; ++chunk) {
        Rng rng = make_rng(cfg.rng_seed, {static_cast<std::uint64_t>(chunk)});
        const int n = std::min(kChunk, cfg.count - chunk * kChunk);
        for (int k = 0; k < n; ++k) {
            MeshSample s;
            switch (cfg.strategy) {
            case SampleStrategy::SurfaceArea:
                s.object = pick_object(rng);
                s.triangle = by_area[s.object](rng);
                break;
            case SampleStrategy::UniformTriangle:
                s.object = pick_object(rng);
                s.triangle = static_cast<int>(
                    uniform_int(rng, 0, static_cast<std::int64_t>(scene.objects[s.object].triangles.size()) - 1));
                break;
            case SampleStrategy::Bbox: {
                Eigen::Vector3d p;
                for (int a = 0; a < 3; ++a) {
                    p[a] = lo[a] + (hi[a] - lo[a]) * uniform01(rng);
                }
                const NearestHit hit = tree->nearest(p);
                s.object = hit.object;
                s.triangle = hit.triangle;
                break;
            }
            }
            const auto& obj = scene.objects[s.object];
            const auto& t = obj.triangles[s.triangle];
            const double r1 = uniform01(rng);
            const double r2 = uniform01(rng);
            s.point = sample_in_triangle(obj.vertices[t[0]], obj.vertices[t[1]], obj.vertices[t[2]], r1, r2);
            out.push_back(s);
        }
    }
    return out;
}

std::vector<Eigen::Vector3d> sample_points(const MeshScene& scene, const SampleConfig& cfg) {
    std::vector<Eigen::Vector3d> points;
    for (const auto& s : sample_mesh(scene, cfg)) {
        points.push_back(s.point);
    }
    return points;
}

} // namespace gsr
