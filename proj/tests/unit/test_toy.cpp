#include "gsrelight/core/error.hpp"
#include "gsrelight/core/rng.hpp"
#include "gsrelight/guidance/guidance.hpp"
#include "gsrelight/guidance/toy_models.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace gsr;

namespace {

Image random_image(int h, int w, int c, std::uint64_t seed) {
    Image img(h, w, c);
    Rng rng = make_rng(seed, {0x70});
    fill_standard_normal(img, rng);
    return img;
}

} // namespace

TEST(ToyDenoiser, PointMassClosedForm) {
    const DiffusionSchedule sched = make_schedule(1000);
    const Image z = random_image(2, 2, 3, 1);
    const ToyCondition cond{Image(1, 1, 3, 0.4), 0.0};
    for (int t : {1, 100, 500, 1000}) {
        const Image eps = toy_denoiser_predict(z, t, sched, cond);
        for (std::size_t i = 0; i < z.size(); ++i) {
            EXPECT_NEAR(eps[i], (z[i] - sched.alpha_at(t) * 0.4) / sched.sigma_at(t), 1e-12);
        }
    }
}

TEST(ToyDenoiser, GaussianPosteriorMean) {
    const DiffusionSchedule sched = make_schedule(1000);
    const double s = 0.7, mu = -0.2;
    const int t = 300;
    const double a = sched.alpha_at(t), sg = sched.sigma_at(t);
    const Image z(1, 1, 1, 0.9);
    const double x0 = (a * s * s * 0.9 + sg * sg * mu) / (a * a * s * s + sg * sg);
    const Image eps = toy_denoiser_predict(z, t, sched, ToyCondition{Image(1, 1, 1, mu), s});
    EXPECT_NEAR(eps[0], (0.9 - a * x0) / sg, 1e-12);
    // Tweedie: x0 = (z - sigma eps) / alpha.
    EXPECT_NEAR((0.9 - sg * eps[0]) / a, x0, 1e-12);
}

TEST(ToyDenoiser, SigmaZeroRejected) {
    DiffusionSchedule sched = make_schedule(10);
    sched.sigma[0] = 0.0;
    sched.alpha[0] = 1.0;
    try {
        (void)toy_denoiser_predict(Image(1, 1, 1), 1, sched, ToyCondition{Image(1, 1, 1), 0.0});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::SigmaZero);
    }
}

TEST(ToyDenoiser, PromptLookupAndUnconditional) {
    ToyDenoiser toy(make_schedule(1000));
    toy.set_prompt("a cat", ToyCondition{Image(1, 1, 2, 0.5), 0.0});
    const Image z = random_image(2, 2, 2, 3);
    const DenoiserCondition cond{"a cat"};
    EXPECT_EQ(toy.predict_noise(z, 50, cond, true), toy.predict_noise(z, 50, cond, false));
    toy.set_unconditional(ToyCondition{Image(1, 1, 2, 0.0), 0.0});
    EXPECT_NE(toy.predict_noise(z, 50, cond, true), toy.predict_noise(z, 50, cond, false));
    EXPECT_EQ(toy.calls(), 4u);
    try {
        (void)toy.predict_noise(z, 50, DenoiserCondition{"a dog"}, false);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DenoiserFailure);
    }
}

TEST(ToyCodec, EncodeDecodeIsIdentityOnLatents) {
    ToyCodec codec;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Image z = random_image(3 + static_cast<int>(seed), 4, 3, seed);
        EXPECT_LT(max_abs_diff(codec.encode(codec.decode(z)), z), 1e-12);
    }
}

TEST(ToyCodec, DecodeEncodeIsProjection) {
    ToyCodec codec;
    const Image img = random_image(6, 8, 3, 9);
    const Image once = codec.decode(codec.encode(img));
    const Image twice = codec.decode(codec.encode(once));
    EXPECT_LT(max_abs_diff(once, twice), 1e-12);
    const Image flat(4, 4, 3, 0.25);
    EXPECT_LT(max_abs_diff(codec.decode(codec.encode(flat)), flat), 1e-15);
}

TEST(ToyCodec, OddDimensionsRejected) {
    ToyCodec codec;
    try {
        (void)codec.encode(Image(3, 4, 3));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::OddDimensions);
    }
}

TEST(ToyDistillation, ScalarSdsDescentConverges) {
    const DiffusionSchedule sched = make_schedule(1000);
    ToyDenoiser toy(sched);
    const double mu = 0.37;
    toy.set_prompt("p", ToyCondition{Image(1, 1, 1, mu), 0.0});
    Image x(1, 1, 1, -1.5);
    for (int k = 0; k < 500; ++k) {
        const GuidanceSample s = draw_sample(derive_seed(4, {static_cast<std::uint64_t>(k)}), 1, 1, 1,
                                             TimestepRange::trimmed(1000));
        x = x - 0.05 * sds_grad(x, s, sched, toy, DenoiserCondition{"p"}, 7.5);
    }
    EXPECT_LT(std::abs(x[0] - mu), 1e-2);
}
