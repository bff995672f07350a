#include "gsrelight/render/rasterizer.hpp"

#include "gsrelight/core/error.hpp"
#include "gsrelight/render/spherical_harmonics.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace gsr {
namespace {

struct Projected {
    std::uint32_t index;
    double depth;
    Eigen::Vector2d center;
    double conic_a, conic_b, conic_c;
    double radius;
    double opacity;
};

int degree_for(std::size_t i, const GaussianCloud& cloud, const RenderOptions& options) {
    int degree = cloud.active_sh_degree;
    if (options.degree_limited && options.degree_limited->contains(i)) {
        degree = std::min(degree, options.limited_degree);
    }
    return degree;
}

Eigen::Vector3d view_direction(const GaussianCloud& cloud, std::size_t i, const Eigen::Vector3d& cam_center) {
    return (cloud.means[i].cast<double>() - cam_center).normalized();
}

void shade(RenderBundle& bundle, const GaussianCloud& cloud, const Camera& cam, const RenderOptions& options) {
    const Eigen::Vector3d cam_center = cam.center();
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        if (bundle.sh_degree[i] < 0) {
            continue;
        }
        const int degree = degree_for(i, cloud, options);
        bundle.sh_degree[i] = static_cast<std::int8_t>(degree);
        bundle.radiance[i] = sh_radiance(cloud.sh_of(i), view_direction(cloud, i, cam_center), degree);
    }
}

void composite_rgb(RenderBundle& bundle) {
    const int h = bundle.rgb.height();
    const int w = bundle.rgb.width();
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            Eigen::Vector3d acc = Eigen::Vector3d::Zero();
            for (const SplatEntry& e : bundle.pixel(y, x)) {
                const Eigen::Vector3d color = bundle.radiance[e.gaussian].cwiseMax(0.0).cwiseMin(1.0);
                acc += e.weight * color;
            }
            const double residual = 1.0 - bundle.alpha.at(y, x);
            for (int c = 0; c < 3; ++c) {
                bundle.rgb.at(y, x, c) = acc[c] + residual * bundle.background[c];
            }
        }
    }
}

std::vector<Projected> project(const GaussianCloud& cloud, const Camera& cam, const RenderOptions& options) {
    const Eigen::Matrix3d w = cam.rotation();
    const Eigen::Vector3d tvec = cam.translation();
    const double lim_x = 1.3 * (0.5 * cam.width / cam.fx);
    const double lim_y = 1.3 * (0.5 * cam.height / cam.fy);

    std::vector<Projected> out;
    out.reserve(cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        if (options.excluded && options.excluded->contains(i)) {
            continue;
        }
        const Eigen::Vector3d t = w * cloud.means[i].cast<double>() + tvec;
        if (t.z() <= cam.near_clip || t.z() > cam.far_clip) {
            continue;
        }

        const Eigen::Matrix3d rot = cloud.rotation(i).normalized().toRotationMatrix();
        const Eigen::Matrix3d m = rot * cloud.scale(i).asDiagonal();
        const Eigen::Matrix3d cov3 = m * m.transpose();

        const double inv_z = 1.0 / t.z();
        const double tx = std::clamp(t.x() * inv_z, -lim_x, lim_x) * t.z();
        const double ty = std::clamp(t.y() * inv_z, -lim_y, lim_y) * t.z();
        Eigen::Matrix<double, 2, 3> j;
        j << cam.fx * inv_z, 0.0, -cam.fx * tx * inv_z * inv_z, 0.0, cam.fy * inv_z, -cam.fy * ty * inv_z * inv_z;
        const Eigen::Matrix<double, 2, 3> jw = j * w;
        Eigen::Matrix2d cov2 = jw * cov3 * jw.transpose();
        cov2(0, 0) += kCovarianceDilation;
        cov2(1, 1) += kCovarianceDilation;

        const double det = cov2.determinant();
        if (!(det > 0.0) || !std::isfinite(det)) {
            fail(ErrorCode::DegenerateCovariance, "2D covariance of gaussian " + std::to_string(i) +
                                                      " is not invertible (det " + std::to_string(det) + ")");
        }
        const double mid = 0.5 * (cov2(0, 0) + cov2(1, 1));
        const double lambda_max = mid + std::sqrt(std::max(0.1, mid * mid - det));

        Projected p;
        p.index = static_cast<std::uint32_t>(i);
        p.depth = t.z();
        p.center = {cam.fx * t.x() * inv_z + cam.cx, cam.fy * t.y() * inv_z + cam.cy};
        p.conic_a = cov2(1, 1) / det;
        p.conic_b = -cov2(0, 1) / det;
        p.conic_c = cov2(0, 0) / det;
        p.radius = std::ceil(3.0 * std::sqrt(lambda_max));
        p.opacity = cloud.opacity(i);
        out.push_back(p);
    }
    std::sort(out.begin(), out.end(), [](const Projected& a, const Projected& b) {
        return a.depth < b.depth || (a.depth == b.depth && a.index < b.index);
    });
    return out;
}

} // namespace

RenderBundle render(const GaussianCloud& cloud, const Camera& cam, const Eigen::Vector3d& background,
                    const RenderOptions& options) {
    cam.validate();
    const int h = cam.height;
    const int w = cam.width;
    const std::size_t npix = static_cast<std::size_t>(h) * w;

    RenderBundle bundle;
    bundle.background = background;
    bundle.rgb = Image(h, w, 3);
    bundle.alpha = Image(h, w, 1);
    bundle.depth = Image(h, w, 1);
    bundle.radiance.assign(cloud.size(), Eigen::Vector3d::Zero());
    bundle.sh_degree.assign(cloud.size(), -1);

    const std::vector<Projected> splats = project(cloud, cam, options);
    for (const Projected& p : splats) {
        bundle.sh_degree[p.index] = 0;
    }

    std::vector<std::vector<SplatEntry>> per_pixel(npix);
    std::vector<double> transmittance(npix, 1.0);
    std::vector<double> depth_acc(npix, 0.0);
    for (const Projected& p : splats) {
        const int x0 = std::max(0, static_cast<int>(std::ceil(p.center.x() - p.radius - 0.5)));
        const int x1 = std::min(w - 1, static_cast<int>(std::floor(p.center.x() + p.radius - 0.5)));
        const int y0 = std::max(0, static_cast<int>(std::ceil(p.center.y() - p.radius - 0.5)));
        const int y1 = std::min(h - 1, static_cast<int>(std::floor(p.center.y() + p.radius - 0.5)));
        for (int y = y0; y <= y1; ++y) {
            const double dy = (y + 0.5) - p.center.y();
            for (int x = x0; x <= x1; ++x) {
                const double dx = (x + 0.5) - p.center.x();
                const double power = -0.5 * (p.conic_a * dx * dx + p.conic_c * dy * dy) - p.conic_b * dx * dy;
                if (power > 0.0) {
                    continue;
                }
                const double alpha = std::min(kMaxSplatAlpha, p.opacity * std::exp(power));
                if (alpha < kMinSplatAlpha) {
                    continue;
                }
                const std::size_t pix = static_cast<std::size_t>(y) * w + x;
                const double weight = alpha * transmittance[pix];
                per_pixel[pix].push_back({p.index, alpha, weight});
                depth_acc[pix] += weight * p.depth;
                transmittance[pix] *= 1.0 - alpha;
            }
        }
    }

    bundle.pixel_offsets.resize(npix + 1);
    std::size_t total = 0;
    for (std::size_t pix = 0; pix < npix; ++pix) {
        bundle.pixel_offsets[pix] = total;
        total += per_pixel[pix].size();
    }
    bundle.pixel_offsets[npix] = total;
    bundle.entries.reserve(total);
    for (std::size_t pix = 0; pix < npix; ++pix) {
        double acc = 0.0;
        for (const SplatEntry& e : per_pixel[pix]) {
            acc += e.weight;
            bundle.entries.push_back(e);
        }
        bundle.alpha[pix] = acc;
        bundle.depth[pix] = acc > 0.0 ? depth_acc[pix] / acc : 0.0;
    }

    shade(bundle, cloud, cam, options);
    composite_rgb(bundle);
    return bundle;
}

void recolor(RenderBundle& bundle, const GaussianCloud& cloud, const Camera& cam, const RenderOptions& options) {
    require(bundle.radiance.size() == cloud.size(), ErrorCode::ShapeMismatch, "bundle was rendered from another cloud");
    shade(bundle, cloud, cam, options);
    composite_rgb(bundle);
}

Image mask_from_bundle(const RenderBundle& bundle, std::span<const std::size_t> indices) {
    std::vector<char> member(bundle.radiance.size(), 0);
    for (std::size_t i : indices) {
        require(i < member.size(), ErrorCode::InvariantViolation, "mask index out of range");
        member[i] = 1;
    }
    Image mask(bundle.rgb.height(), bundle.rgb.width(), 1);
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            double acc = 0.0;
            for (const SplatEntry& e : bundle.pixel(y, x)) {
                if (member[e.gaussian]) {
                    acc += e.weight;
                }
            }
            mask.at(y, x) = acc;
        }
    }
    return mask;
}

Image mask_from_bundle(const RenderBundle& bundle, IndexRange range) {
    const auto idx = range.indices();
    return mask_from_bundle(bundle, idx);
}

Image render_mask(const GaussianCloud& cloud, const Camera& cam, std::span<const std::size_t> indices) {
    return mask_from_bundle(render(cloud, cam, Eigen::Vector3d::Zero()), indices);
}

ColorGrad backprop_color(const RenderBundle& bundle, const GaussianCloud& cloud, const Camera& cam,
                         const Image& dL_drgb) {
    require(dL_drgb.height() == bundle.rgb.height() && dL_drgb.width() == bundle.rgb.width() &&
                dL_drgb.channels() == 3,
            ErrorCode::ShapeMismatch, "dL/drgb must be H x W x 3 matching the render");
    require(bundle.radiance.size() == cloud.size(), ErrorCode::ShapeMismatch, "bundle was rendered from another cloud");

    std::vector<Eigen::Vector3d> acc(cloud.size(), Eigen::Vector3d::Zero());
    for (int y = 0; y < dL_drgb.height(); ++y) {
        for (int x = 0; x < dL_drgb.width(); ++x) {
            const Eigen::Vector3d g(dL_drgb.at(y, x, 0), dL_drgb.at(y, x, 1), dL_drgb.at(y, x, 2));
            for (const SplatEntry& e : bundle.pixel(y, x)) {
                acc[e.gaussian] += e.weight * g;
            }
        }
    }

    ColorGrad grad;
    grad.d_sh.assign(cloud.size() * kShFloats, 0.0);
    const Eigen::Vector3d cam_center = cam.center();
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const int degree = bundle.sh_degree[i];
        if (degree < 0 || acc[i].isZero(0.0)) {
            continue;
        }
        const auto basis = sh_basis(view_direction(cloud, i, cam_center), degree);
        for (int c = 0; c < 3; ++c) {
            const double v = bundle.radiance[i][c];
            if (v < 0.0 || v > 1.0) {
                continue;
            }
            for (int k = 0; k < sh_coeff_count(degree); ++k) {
                grad.d_sh[i * kShFloats + static_cast<std::size_t>(k) * 3 + c] = acc[i][c] * basis[k];
            }
        }
    }
    return grad;
}

} // namespace gsr
