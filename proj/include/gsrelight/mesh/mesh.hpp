#pragma once

#include <Eigen/Core>

#include <array>
#include <string>
#include <vector>

namespace gsr {

struct MeshObject {
    std::string name;
    std::vector<Eigen::Vector3d> vertices;
    std::vector<std::array<int, 3>> triangles;
};

struct MeshScene {
    std::vector<MeshObject> objects;

    [[nodiscard]] std::size_t triangle_count() const;
    /// Throws InvariantViolation on out-of-range triangle indices.
    void validate() const;
};

[[nodiscard]] double triangle_area(const Eigen::Vector3d& a, const Eigen::Vector3d& b, const Eigen::Vector3d& c);
/// Sum of triangle areas.
[[nodiscard]] double mesh_area(const MeshObject& object);
/// |sum of signed tetrahedron volumes a . (b x c) / 6|; exact for closed, consistently oriented meshes.
[[nodiscard]] double mesh_volume(const MeshObject& object);

/// Closest point on triangle abc to p.
[[nodiscard]] Eigen::Vector3d closest_point_on_triangle(const Eigen::Vector3d& p, const Eigen::Vector3d& a,
                                                        const Eigen::Vector3d& b, const Eigen::Vector3d& c);

struct NearestHit {
    int object = -1;
    int triangle = -1;
    double distance = 0.0;
    Eigen::Vector3d point = Eigen::Vector3d::Zero();
};

/// Exhaustive scan; ties go to the lowest (object, triangle).
[[nodiscard]] NearestHit nearest_triangle_bruteforce(const Eigen::Vector3d& p, const MeshScene& scene);

/// Bounding-volume hierarchy over all triangles of a scene. Same result and
/// tie rule as the exhaustive scan.
class AabbTree {
public:
    explicit AabbTree(const MeshScene& scene);

    [[nodiscard]] NearestHit nearest(const Eigen::Vector3d& p) const;

private:
    struct Node {
        Eigen::Vector3d lo;
        Eigen::Vector3d hi;
        int left = -1;   // child index, or -1 for a leaf
        int right = -1;
        int begin = 0;   // leaf range into refs_
        int end = 0;
    };
    struct Ref {
        int object;
        int triangle;
        Eigen::Vector3d a, b, c;
    };

    int build(int begin, int end);

    std::vector<Node> nodes_;
    std::vector<Ref> refs_;
};

/// Builds a tree for a single query; prefer AabbTree for many queries.
[[nodiscard]] NearestHit nearest_triangle(const Eigen::Vector3d& p, const MeshScene& scene);

} // namespace gsr
