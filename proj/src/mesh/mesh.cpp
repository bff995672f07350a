#include "gsrelight/mesh/mesh.hpp"

#include "gsrelight/core/error.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <limits>

namespace gsr {
namespace {

bool better(double d, int obj, int tri, const NearestHit& best) {
    return d < best.distance || (d == best.distance && (obj < best.object || (obj == best.object && tri < best.triangle)));
}

double box_distance(const Eigen::Vector3d& p, const Eigen::Vector3d& lo, const Eigen::Vector3d& hi) {
    const Eigen::Vector3d d = (lo - p).cwiseMax(p - hi).cwiseMax(0.0);
    return d.norm();
}

} // namespace

std::size_t MeshScene::triangle_count() const {
    std::size_t n = 0;
    for (const auto& o : objects) {
        n += o.triangles.size();
    }
    return n;
}

void MeshScene::validate() const {
    for (const auto& o : objects) {
        for (const auto& t : o.triangles) {
            for (int v : t) {
                require(v >= 0 && static_cast<std::size_t>(v) < o.vertices.size(), ErrorCode::InvariantViolation,
                        "object '" + o.name + "' has a triangle index out of range");
            }
        }
    }
}

double triangle_area(const Eigen::Vector3d& a, const Eigen::Vector3d& b, const Eigen::Vector3d& c) {
    return 0.5 * (b - a).cross(c - a).norm();
}

double mesh_area(const MeshObject& object) {
    double area = 0.0;
    for (const auto& t : object.triangles) {
        area += triangle_area(object.vertices[t[0]], object.vertices[t[1]], object.vertices[t[2]]);
    }
    return area;
}

double mesh_volume(const MeshObject& object) {
    double volume = 0.0;
    for (const auto& t : object.triangles) {
        const auto& a = object.vertices[t[0]];
        const auto& b = object.vertices[t[1]];
        const auto& c = object.vertices[t[2]];
        volume += a.dot(b.cross(c)) / 6.0;
    }
    return std::abs(volume);
}

Eigen::Vector3d closest_point_on_triangle(const Eigen::Vector3d& p, const Eigen::Vector3d& a,
                                         const Eigen::Vector3d& b, const Eigen::Vector3d& c) {
    const Eigen::Vector3d ab = b - a;
    const Eigen::Vector3d ac = c - a;
    const Eigen::Vector3d ap = p - a;
    const double d1 = ab.dot(ap);
    const double d2 = ac.dot(ap);
    if (d1 <= 0.0 && d2 <= 0.0) {
        return a;
    }
    const Eigen::Vector3d bp = p - b;
    const double d3 = ab.dot(bp);
    const double d4 = ac.dot(bp);
    if (d3 >= 0.0 && d4 <= d3) {
        return b;
    }
    const double vc = d1 * d4 - d3 * d2;
    if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
        const double denom = d1 - d3;
        return denom > 0.0 ? Eigen::Vector3d(a + (d1 / denom) * ab) : a;
    }
    const Eigen::Vector3d cp = p - c;
    const double d5 = ab.dot(cp);
    const double d6 = ac.dot(cp);
    if (d6 >= 0.0 && d5 <= d6) {
        return c;
    }
    const double vb = d5 * d2 - d1 * d6;
    if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
        const double denom = d2 - d6;
        return denom > 0.0 ? Eigen::Vector3d(a + (d2 / denom) * ac) : a;
    }
    const double va = d3 * d6 - d5 * d4;
    if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
        const double denom = (d4 - d3) + (d5 - d6);
        return denom > 0.0 ? Eigen::Vector3d(b + ((d4 - d3) / denom) * (c - b)) : b;
    }
    const double sum = va + vb + vc;
    if (!(sum > 0.0)) {
        // Degenerate triangle: fall back to the closest of its three edges.
        auto seg = [&](const Eigen::Vector3d& s0, const Eigen::Vector3d& s1) {
            const Eigen::Vector3d d = s1 - s0;
            const double len2 = d.squaredNorm();
            const double u = len2 > 0.0 ? std::clamp((p - s0).dot(d) / len2, 0.0, 1.0) : 0.0;
            return Eigen::Vector3d(s0 + u * d);
        };
        Eigen::Vector3d best = seg(a, b);
        for (const Eigen::Vector3d& q : {seg(b, c), seg(c, a)}) {
            if ((q - p).squaredNorm() < (best - p).squaredNorm()) {
                best = q;
            }
        }
        return best;
    }
    const double v = vb / sum;
    const double w = vc / sum;
    return a + ab * v + ac * w;
}

NearestHit nearest_triangle_bruteforce(const Eigen::Vector3d& p, const MeshScene& scene) {
    require(scene.triangle_count() > 0, ErrorCode::EmptyMesh, "mesh scene has no triangles");
    NearestHit best;
    best.distance = std::numeric_limits<double>::infinity();
    for (int o = 0; o < static_cast<int>(scene.objects.size()); ++o) {
        const auto& obj = scene.objects[o];
        for (int t = 0; t < static_cast<int>(obj.triangles.size()); ++t) {
            const auto& tri = obj.triangles[t];
            const Eigen::Vector3d q =
                closest_point_on_triangle(p, obj.vertices[tri[0]], obj.vertices[tri[1]], obj.vertices[tri[2]]);
            const double d = (q - p).norm();
            if (better(d, o, t, best)) {
                best = {o, t, d, q};
            }
        }
    }
    return best;
}

AabbTree::AabbTree(const MeshScene& scene) {
    scene.validate();
    require(scene.triangle_count() > 0, ErrorCode::EmptyMesh, "mesh scene has no triangles");
    refs_.reserve(scene.triangle_count());
    for (int o = 0; o < static_cast<int>(scene.objects.size()); ++o) {
        const auto& obj = scene.objects[o];
        for (int t = 0; t < static_cast<int>(obj.triangles.size()); ++t) {
            const auto& tri = obj.triangles[t];
            refs_.push_back({o, t, obj.vertices[tri[0]], obj.vertices[tri[1]], obj.vertices[tri[2]]});
        }
    }
    nodes_.reserve(2 * refs_.size());
    build(0, static_cast<int>(refs_.size()));
}

int AabbTree::build(int begin, int end) {
    Node node;
    node.lo = Eigen::Vector3d::Constant(std::numeric_limits<double>::infinity());
    node.hi = -node.lo;
    Eigen::Vector3d clo = node.lo;
    Eigen::Vector3d chi = node.hi;
    for (int i = begin; i < end; ++i) {
        const Ref& r = refs_[i];
        node.lo = node.lo.cwiseMin(r.a).cwiseMin(r.b).cwiseMin(r.c);
        node.hi = node.hi.cwiseMax(r.a).cwiseMax(r.b).cwiseMax(r.c);
        const Eigen::Vector3d centroid = (r.a + r.b + r.c) / 3.0;
        clo = clo.cwiseMin(centroid);
        chi = chi.cwiseMax(centroid);
    }
    const int index = static_cast<int>(nodes_.size());
    nodes_.push_back(node);
    if (end - begin <= 4) {
        nodes_[index].begin = begin;
        nodes_[index].end = end;
        return index;
    }
    int axis = 0;
    (chi - clo).maxCoeff(&axis);
    const int mid = (begin + end) / 2;
    std::nth_element(refs_.begin() + begin, refs_.begin() + mid, refs_.begin() + end,
                     [axis](const Ref& x, const Ref& y) {
                         return (x.a[axis] + x.b[axis] + x.c[axis]) < (y.a[axis] + y.b[axis] + y.c[axis]);
                     });
    const int left = build(begin, mid);
    const int right = build(mid, end);
    nodes_[index].left = left;
    nodes_[index].right = right;
    return index;
}

NearestHit AabbTree::nearest(const Eigen::Vector3d& p) const {
    NearestHit best;
    best.distance = std::numeric_limits<double>::infinity();
    std::vector<int> stack{0};
    while (!stack.empty()) {
        const Node& node = nodes_[stack.back()];
        stack.pop_back();
        if (box_distance(p, node.lo, node.hi) > best.distance) {
            continue;
        }
        if (node.left < 0) {
            for (int i = node.begin; i < node.end; ++i) {
                const Ref& r = refs_[i];
                const Eigen::Vector3d q = closest_point_on_triangle(p, r.a, r.b, r.c);
                const double d = (q - p).norm();
                if (better(d, r.object, r.triangle, best)) {
                    best = {r.object, r.triangle, d, q};
                }
            }
            continue;
        }
        const double dl = box_distance(p, nodes_[node.left].lo, nodes_[node.left].hi);
        const double dr = box_distance(p, nodes_[node.right].lo, nodes_[node.right].hi);
        // Nearer child on top of the stack.
        if (dl <= dr) {
            stack.push_back(node.right);
            stack.push_back(node.left);
        } else {
            stack.push_back(node.left);
            stack.push_back(node.right);
        }
    }
    return best;
}

NearestHit nearest_triangle(const Eigen::Vector3d& p, const MeshScene& scene) {
    return AabbTree(scene).nearest(p);
}

} // namespace gsr
