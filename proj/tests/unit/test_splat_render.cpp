#include "scenes.hpp"

#include "gsrelight/core/error.hpp"
#include "gsrelight/core/rng.hpp"
#include "gsrelight/render/rasterizer.hpp"
#include "gsrelight/render/spherical_harmonics.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace gsr;

namespace {

Camera identity_camera(int w, int h, double f) {
    Camera cam;
    cam.fx = cam.fy = f;
    cam.cx = 0.5 * w;
    cam.cy = 0.5 * h;
    cam.width = w;
    cam.height = h;
    return cam;
}

// Base-color coefficient that yields `color` after the 0.5 offset.
float dc_for(double color) {
    return static_cast<float>((color - 0.5) / kShC0);
}

void push_flat(GaussianCloud& c, const Eigen::Vector3f& mean, float scale, float opacity, const Eigen::Vector3d& rgb) {
    std::vector<float> sh(3);
    for (int k = 0; k < 3; ++k) {
        sh[k] = dc_for(rgb[k]);
    }
    c.push_back(mean, Eigen::Vector3f::Constant(scale), Eigen::Vector4f(1, 0, 0, 0), opacity, sh);
}

} // namespace

TEST(ShBasis, DegreeZeroConstant) {
    const auto b = sh_basis(Eigen::Vector3d(0.3, -0.2, 0.9).normalized(), 3);
    EXPECT_DOUBLE_EQ(b[0], kShC0);
}

TEST(ShBasis, UnitSphereOrthonormality) {
    // Monte Carlo check of int Y_i Y_j = delta_ij over the sphere.
    Rng rng = make_rng(3, {});
    const int n = 200000;
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(kShCoeffs, kShCoeffs);
    for (int s = 0; s < n; ++s) {
        Eigen::Vector3d d(standard_normal(rng), standard_normal(rng), standard_normal(rng));
        const auto b = sh_basis(d.normalized(), 3);
        for (int i = 0; i < kShCoeffs; ++i) {
            for (int j = 0; j < kShCoeffs; ++j) {
                gram(i, j) += b[i] * b[j];
            }
        }
    }
    gram *= 4.0 * M_PI / n;
    EXPECT_LT((gram - Eigen::MatrixXd::Identity(kShCoeffs, kShCoeffs)).cwiseAbs().maxCoeff(), 0.03);
}

TEST(Render, SingleGaussianCenterPixel) {
    GaussianCloud c;
    push_flat(c, Eigen::Vector3f(0, 0, 5), 0.3f, 0.6f, Eigen::Vector3d(0.9, 0.2, 0.4));
    const Camera cam = identity_camera(9, 9, 10.0);
    const RenderBundle b = render(c, cam, Eigen::Vector3d(0.1, 0.1, 0.1));
    EXPECT_NEAR(b.alpha.at(4, 4), 0.6, 1e-6);
    EXPECT_NEAR(b.rgb.at(4, 4, 0), 0.6 * 0.9 + 0.4 * 0.1, 1e-6);
    EXPECT_NEAR(b.depth.at(4, 4), 5.0, 1e-6);
    // Symmetric falloff around the center.
    EXPECT_NEAR(b.alpha.at(4, 3), b.alpha.at(4, 5), 1e-12);
    EXPECT_LT(b.alpha.at(4, 3), b.alpha.at(4, 4));
}

TEST(Render, OrderIsByDepthThenIndex) {
    GaussianCloud c;
    push_flat(c, Eigen::Vector3f(0, 0, 6), 0.3f, 0.5f, Eigen::Vector3d(1, 0, 0));
    push_flat(c, Eigen::Vector3f(0, 0, 4), 0.3f, 0.5f, Eigen::Vector3d(0, 1, 0));
    push_flat(c, Eigen::Vector3f(0, 0, 4), 0.3f, 0.5f, Eigen::Vector3d(0, 0, 1));
    const RenderBundle b = render(c, identity_camera(5, 5, 5.0), Eigen::Vector3d::Zero());
    const auto px = b.pixel(2, 2);
    ASSERT_EQ(px.size(), 3u);
    EXPECT_EQ(px[0].gaussian, 1u);
    EXPECT_EQ(px[1].gaussian, 2u);
    EXPECT_EQ(px[2].gaussian, 0u);
}

TEST(Render, CullsBehindCamera) {
    GaussianCloud c;
    push_flat(c, Eigen::Vector3f(0, 0, -3), 0.3f, 0.9f, Eigen::Vector3d(1, 1, 1));
    const RenderBundle b = render(c, identity_camera(5, 5, 5.0), Eigen::Vector3d(0.2, 0.3, 0.4));
    EXPECT_EQ(b.sh_degree[0], -1);
    EXPECT_TRUE(b.entries.empty());
    EXPECT_DOUBLE_EQ(b.rgb.at(2, 2, 2), 0.4);
}

TEST(Render, AlphaWithinUnitIntervalAndWeightsSum) {
    const GaussianCloud c = fixture::random_cloud(40, 21);
    const RenderBundle b = render(c, fixture::front_camera(16, 12), Eigen::Vector3d::Zero());
    for (int y = 0; y < 12; ++y) {
        for (int x = 0; x < 16; ++x) {
            double sum = 0;
            for (const auto& e : b.pixel(y, x)) {
                EXPECT_GE(e.alpha, 1.0 / 255.0);
                EXPECT_LE(e.alpha, kMaxSplatAlpha);
                sum += e.weight;
            }
            EXPECT_NEAR(sum, b.alpha.at(y, x), 1e-12);
            EXPECT_GE(b.alpha.at(y, x), 0.0);
            EXPECT_LT(b.alpha.at(y, x), 1.0);
            for (int ch = 0; ch < 3; ++ch) {
                EXPECT_GE(b.rgb.at(y, x, ch), 0.0);
                EXPECT_LE(b.rgb.at(y, x, ch), 1.0);
            }
        }
    }
}

TEST(Render, RecolorMatchesFreshRender) {
    GaussianCloud c = fixture::random_cloud(30, 22);
    const Camera cam = fixture::front_camera(10, 10);
    RenderBundle b = render(c, cam, Eigen::Vector3d(0.2, 0.5, 0.7));
    for (std::size_t i = 0; i < c.size(); ++i) {
        c.sh_at(i, 0, 1) += 0.1f;
        c.sh_at(i, 2, 0) -= 0.05f;
    }
    recolor(b, c, cam);
    const RenderBundle fresh = render(c, cam, Eigen::Vector3d(0.2, 0.5, 0.7));
    EXPECT_EQ(b.rgb, fresh.rgb);
}

TEST(Render, ExcludedRangeEqualsRemovedGaussians) {
    const GaussianCloud c = fixture::random_cloud(30, 23);
    const Camera cam = fixture::front_camera(10, 10);
    RenderOptions opts;
    opts.excluded = IndexRange{10, 20};
    const RenderBundle with_excl = render(c, cam, Eigen::Vector3d(0.3, 0.3, 0.3), opts);
    const RenderBundle removed = render(c.without(IndexRange{10, 20}), cam, Eigen::Vector3d(0.3, 0.3, 0.3));
    EXPECT_EQ(with_excl.rgb, removed.rgb);
    EXPECT_EQ(with_excl.alpha, removed.alpha);
}

TEST(Render, DegreeLimitedIgnoresHigherBands) {
    GaussianCloud c = fixture::random_cloud(10, 24);
    const Camera cam = fixture::front_camera(8, 8);
    RenderOptions opts;
    opts.degree_limited = IndexRange{0, c.size()};
    opts.limited_degree = 0;
    const RenderBundle limited = render(c, cam, Eigen::Vector3d::Zero(), opts);
    GaussianCloud flat = c;
    for (std::size_t i = 0; i < flat.size(); ++i) {
        std::fill(flat.sh_of(i).begin() + 3, flat.sh_of(i).end(), 0.0f);
    }
    const RenderBundle expect = render(flat, cam, Eigen::Vector3d::Zero());
    EXPECT_LT(max_abs_diff(limited.rgb, expect.rgb), 1e-12);
}

TEST(Render, MaskSumsObjectWeights) {
    const GaussianCloud c = fixture::random_cloud(20, 25);
    const Camera cam = fixture::front_camera(8, 8);
    const RenderBundle b = render(c, cam, Eigen::Vector3d::Zero());
    const Image all = mask_from_bundle(b, IndexRange{0, c.size()});
    EXPECT_LT(max_abs_diff(all, b.alpha), 1e-12);
    const Image a = mask_from_bundle(b, IndexRange{0, 7});
    const Image rest = mask_from_bundle(b, IndexRange{7, c.size()});
    EXPECT_LT(max_abs_diff(a + rest, b.alpha), 1e-12);
    const auto idx = IndexRange{0, 7}.indices();
    EXPECT_EQ(render_mask(c, cam, idx), a);
}

TEST(Render, VanishingScaleStaysInvertible) {
    GaussianCloud c;
    push_flat(c, Eigen::Vector3f(0, 0, 5), 0.3f, 0.5f, Eigen::Vector3d(0.5, 0.5, 0.5));
    c.log_scales[0] = Eigen::Vector3f::Constant(-200.0f);
    Camera cam = identity_camera(5, 5, 5.0);
    // The 0.3 px dilation keeps a vanishing Gaussian invertible.
    EXPECT_NO_THROW((void)render(c, cam, Eigen::Vector3d::Zero()));
}

TEST(Backprop, ShapeChecked) {
    const GaussianCloud c = fixture::random_cloud(5, 26);
    const Camera cam = fixture::front_camera(6, 6);
    const RenderBundle b = render(c, cam, Eigen::Vector3d::Zero());
    try {
        (void)backprop_color(b, c, cam, Image(6, 6, 1));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ShapeMismatch);
    }
}

TEST(Backprop, MatchesFiniteDifferences) {
    GaussianCloud c = fixture::random_cloud(8, 27);
    const Camera cam = fixture::front_camera(8, 8);
    const Eigen::Vector3d bg(0.1, 0.2, 0.3);
    Rng rng = make_rng(27, {1});
    Image dl(8, 8, 3);
    fill_standard_normal(dl, rng);
    const RenderBundle b = render(c, cam, bg);
    const ColorGrad g = backprop_color(b, c, cam, dl);
    auto loss = [&](const GaussianCloud& cc) {
        const RenderBundle r = render(cc, cam, bg);
        double s = 0;
        for (std::size_t k = 0; k < r.rgb.size(); ++k) {
            s += r.rgb[k] * dl[k];
        }
        return s;
    };
    const double h = 1e-3;
    double err = 0, ref = 0;
    for (std::size_t k = 0; k < c.sh.size(); ++k) {
        GaussianCloud p = c, m = c;
        p.sh[k] += static_cast<float>(h);
        m.sh[k] -= static_cast<float>(h);
        const double fd = (loss(p) - loss(m)) / (static_cast<double>(p.sh[k]) - m.sh[k]);
        err += (fd - g.d_sh[k]) * (fd - g.d_sh[k]);
        ref += g.d_sh[k] * g.d_sh[k];
    }
    ASSERT_GT(ref, 0.0);
    EXPECT_LT(std::sqrt(err / ref), 1e-3);
}

TEST(Backprop, ClampedChannelHasZeroGradient) {
    GaussianCloud c;
    push_flat(c, Eigen::Vector3f(0, 0, 5), 0.3f, 0.6f, Eigen::Vector3d(1.4, 0.5, -0.3));
    const Camera cam = identity_camera(5, 5, 5.0);
    const RenderBundle b = render(c, cam, Eigen::Vector3d::Zero());
    const ColorGrad g = backprop_color(b, c, cam, Image(5, 5, 3, 1.0));
    EXPECT_EQ(g.of(0)[0], 0.0);
    EXPECT_GT(g.of(0)[1], 0.0);
    EXPECT_EQ(g.of(0)[2], 0.0);
}
