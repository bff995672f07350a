#include "scenes.hpp"

#include "gsrelight/core/error.hpp"
#include "gsrelight/core/rng.hpp"
#include "gsrelight/guidance/toy_models.hpp"
#include "gsrelight/optim/adam.hpp"
#include "gsrelight/optim/checkpoint.hpp"
#include "gsrelight/optim/config.hpp"
#include "gsrelight/optim/image_2d.hpp"
#include "gsrelight/optim/two_step_dds.hpp"
#include "gsrelight/render/rasterizer.hpp"

#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <fstream>
#include <sstream>

using namespace gsr;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct ToyRig {
    fixture::FixtureScene scene = fixture::fixture_scene();
    ToyDenoiser denoiser{make_schedule(1000)};
    ToyCodec codec;

    ToyRig() {
        denoiser.set_prompt("a mug in a kitchen", ToyCondition{Image(1, 1, 3, 1.0), 0.0});
        denoiser.set_prompt("a kitchen", ToyCondition{Image(1, 1, 3, 0.0), 0.0});
    }

    RelightJob job(int num_iters, int steps_image, int steps_latent) {
        RelightJob j;
        j.cloud = scene.cloud;
        j.object_range = scene.object_range;
        j.prompt_tgt = target_prompt("mug", "kitchen");
        j.prompt_init = init_prompt("kitchen");
        j.config.num_iters = num_iters;
        j.config.steps_image = steps_image;
        j.config.steps_latent = steps_latent;
        j.config.checkpoint_every = steps_image;
        j.config.rng_seed = 99;
        j.config.camera_pool = scene.cameras;
        j.denoiser = &denoiser;
        j.codec = &codec;
        return j;
    }
};

} // namespace

TEST(Adam, FirstStepMovesByLearningRate) {
    AdamState s(3);
    std::vector<double> p = {1.0, -2.0, 0.5};
    const std::vector<double> g = {0.3, -5.0, 0.0};
    adam_step(s, p, g, 0.01);
    EXPECT_NEAR(p[0], 1.0 - 0.01, 1e-9);
    EXPECT_NEAR(p[1], -2.0 + 0.01, 1e-9);
    EXPECT_EQ(p[2], 0.5);
    EXPECT_EQ(s.step, 1);
    EXPECT_NEAR(s.m[0], 0.03, 1e-15);
    EXPECT_NEAR(s.v[1], 0.025, 1e-15);
}

TEST(Adam, MinimizesQuadratic) {
    AdamState s(2);
    std::vector<double> p = {3.0, -4.0};
    for (int k = 0; k < 3000; ++k) {
        const std::vector<double> g = {2 * (p[0] - 1.0), 2 * (p[1] + 0.5)};
        adam_step(s, p, g, 0.01);
    }
    EXPECT_NEAR(p[0], 1.0, 1e-3);
    EXPECT_NEAR(p[1], -0.5, 1e-3);
}

TEST(Adam, ShapeMismatch) {
    AdamState s(2);
    std::vector<double> p(3);
    std::vector<double> g(3);
    try {
        adam_step(s, p, g, 0.1);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ShapeMismatch);
    }
}

TEST(Config, DefaultsAndDerivedValues) {
    const OptimizationConfig c;
    EXPECT_EQ(c.outer_iterations(), 79);
    EXPECT_NEAR(c.color_lr_at(c.num_iters), c.color_lr * c.lr_final_ratio, 1e-15);
    EXPECT_DOUBLE_EQ(c.color_lr_at(0), 0.0025);
    EXPECT_NO_THROW(c.validate());
}

TEST(Config, JsonRoundTripAndOverrides) {
    OptimizationConfig c;
    c.num_iters = 512;
    c.background = Eigen::Vector3d(0.1, 0.2, 0.3);
    c.camera_pool = fixture::fixture_scene().cameras;
    const OptimizationConfig r = optimization_config_from_json(to_json(c));
    EXPECT_EQ(to_json(r), to_json(c));
    const OptimizationConfig o = optimization_config_from_json({{"steps_latent", 4}});
    EXPECT_EQ(o.steps_latent, 4);
    EXPECT_EQ(o.steps_image, 256);
    EXPECT_THROW((void)optimization_config_from_json({{"num_iters", "many"}}), Error);
    EXPECT_THROW((void)optimization_config_from_json(nlohmann::json::array()), Error);
    OptimizationConfig bad;
    bad.steps_image = 0;
    EXPECT_THROW(bad.validate(), Error);
}

TEST(Checkpoint, RoundTripIsExact) {
    const auto dir = fixture::temp_dir("ckpt");
    RelightCheckpoint c;
    c.cloud = fixture::random_cloud(5, 3);
    c.adam_color = AdamState(6);
    c.adam_color.m[2] = 1.0 / 3.0;
    c.adam_color.v[5] = 1e-300;
    c.adam_color.step = 77;
    c.adam_sh = AdamState(4);
    c.next_outer = 3;
    c.image_step = 768;
    c.rng_seed = 0xFFFFFFFFFFFFFFFFull;
    EXPECT_FALSE(has_checkpoint(dir));
    save_checkpoint(dir, c);
    EXPECT_TRUE(has_checkpoint(dir));
    const RelightCheckpoint r = load_checkpoint(dir);
    EXPECT_EQ(r.cloud, c.cloud);
    EXPECT_EQ(r.adam_color, c.adam_color);
    EXPECT_EQ(r.adam_sh, c.adam_sh);
    EXPECT_EQ(r.next_outer, 3);
    EXPECT_EQ(r.image_step, 768);
    EXPECT_EQ(r.rng_seed, c.rng_seed);
}

TEST(DepthCondition, NearIsOne) {
    Image depth(1, 3, 1);
    depth[0] = 2.0;
    depth[1] = 4.0;
    depth[2] = 9.0;
    Image alpha(1, 3, 1, 1.0);
    alpha[2] = 0.0;
    const Image d = depth_condition(depth, alpha);
    EXPECT_DOUBLE_EQ(d[0], 1.0);
    EXPECT_DOUBLE_EQ(d[1], 0.0);
    EXPECT_DOUBLE_EQ(d[2], 0.0);
}

TEST(TwoStepDds, OnlyObjectColorsChange) {
    ToyRig rig;
    const RelightJob job = rig.job(64, 16, 4);
    const RelightResult r = two_step_dds(job);
    ASSERT_EQ(r.log.size(), 4u);
    EXPECT_EQ(r.log.back().image_step, 64);
    const GaussianCloud& a = job.cloud;
    const GaussianCloud& b = r.cloud;
    EXPECT_EQ(a.means, b.means);
    EXPECT_EQ(a.log_scales, b.log_scales);
    EXPECT_EQ(a.rotations, b.rotations);
    EXPECT_EQ(a.opacity_logits, b.opacity_logits);
    bool object_changed = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const auto sa = a.sh_of(i);
        const auto sb = b.sh_of(i);
        const bool same = std::equal(sa.begin(), sa.end(), sb.begin());
        if (job.object_range.contains(i)) {
            object_changed |= !same;
        } else {
            EXPECT_TRUE(same) << "scene gaussian " << i;
        }
    }
    EXPECT_TRUE(object_changed);
}

TEST(TwoStepDds, TruncatesLastOuterIteration) {
    ToyRig rig;
    const RelightResult r = two_step_dds(rig.job(40, 16, 2));
    ASSERT_EQ(r.log.size(), 3u);
    EXPECT_EQ(r.log[0].image_step, 16);
    EXPECT_EQ(r.log[2].image_step, 40);
}

TEST(TwoStepDds, ConstantDenoiserLeavesLatentAtRender) {
    ToyRig rig;
    ConstantDenoiser d;
    RelightJob job = rig.job(32, 16, 4);
    job.denoiser = &d;
    const RelightResult r = two_step_dds(job);
    for (const auto& row : r.log) {
        EXPECT_EQ(row.dds_grad_norm, 0.0);
    }
}

TEST(TwoStepDds, WritesMetricsAndResumesBitExactly) {
    ToyRig rig;
    const RelightJob job = rig.job(96, 16, 4);
    const auto full_dir = fixture::temp_dir("relight-full");
    const RelightResult full = two_step_dds(job, RelightHooks{full_dir, {}, {}, nullptr, std::nullopt});

    const auto part_dir = fixture::temp_dir("relight-part");
    RelightHooks stop{part_dir, {}, {}, nullptr, 2};
    try {
        (void)two_step_dds(job, stop);
        FAIL() << "expected a stop";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::Interrupted);
    }
    EXPECT_EQ(load_checkpoint(part_dir).next_outer, 2);
    const RelightResult resumed = resume_two_step_dds(job, RelightHooks{part_dir, {}, {}, nullptr, std::nullopt});
    EXPECT_EQ(resumed.cloud, full.cloud);
    const std::string csv = slurp(full_dir / "metrics.csv");
    EXPECT_EQ(slurp(part_dir / "metrics.csv"), csv);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "outer_iter,dds_grad_norm,l1_loss,lr");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 7);
}

TEST(TwoStepDds, StopFlagCheckpoints) {
    ToyRig rig;
    const auto dir = fixture::temp_dir("relight-stop");
    std::atomic<bool> flag{true};
    try {
        (void)two_step_dds(rig.job(64, 16, 2), RelightHooks{dir, {}, {}, &flag, std::nullopt});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::Interrupted);
    }
    EXPECT_EQ(load_checkpoint(dir).next_outer, 1);
}

TEST(TwoStepDds, ResumeRejectsSeedMismatch) {
    ToyRig rig;
    const auto dir = fixture::temp_dir("relight-seed");
    RelightJob job = rig.job(64, 16, 2);
    EXPECT_THROW((void)two_step_dds(job, RelightHooks{dir, {}, {}, nullptr, 1}), Error);
    job.config.rng_seed = 100;
    EXPECT_THROW((void)resume_two_step_dds(job, RelightHooks{dir, {}, {}, nullptr, std::nullopt}), Error);
}

TEST(TwoStepDds, BridgeFailureCheckpointsFirst) {
    struct Failing : Denoiser {
        Image predict_noise(const Image&, int, const DenoiserCondition&, bool) override {
            throw Error(ErrorCode::Timeout, "no answer");
        }
    } failing;
    ToyRig rig;
    RelightJob job = rig.job(32, 16, 2);
    job.denoiser = &failing;
    const auto dir = fixture::temp_dir("relight-fail");
    try {
        (void)two_step_dds(job, RelightHooks{dir, {}, {}, nullptr, std::nullopt});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DenoiserFailure);
    }
    EXPECT_TRUE(has_checkpoint(dir));
}

TEST(TwoStepDds, ValidateRejectsBadJobs) {
    ToyRig rig;
    RelightJob job = rig.job(32, 16, 2);
    job.prompt_tgt.clear();
    EXPECT_THROW(job.validate(), Error);
    job = rig.job(32, 16, 2);
    job.config.camera_pool.clear();
    EXPECT_THROW(job.validate(), Error);
    job = rig.job(32, 16, 2);
    job.object_range = IndexRange{5, 5};
    EXPECT_THROW(job.validate(), Error);
}

TEST(Image2d, DdsEditKeepsUnmaskedPixels) {
    const DiffusionSchedule sched = make_schedule(1000);
    ToyDenoiser toy(sched);
    toy.set_prompt("tgt", ToyCondition{Image(1, 1, 3, 0.9), 0.0});
    toy.set_prompt("init", ToyCondition{Image(1, 1, 3, 0.2), 0.0});
    ToyCodec codec;
    Image base(8, 8, 3, 0.2);
    Image mask(8, 8, 1, 0.0);
    for (int y = 2; y < 6; ++y) {
        for (int x = 2; x < 6; ++x) {
            mask.at(y, x) = 1.0;
        }
    }
    Edit2dConfig cfg;
    cfg.n_steps = 100;
    const Image out = dds_edit_2d(base, base, "tgt", "init", mask, std::nullopt, cfg, sched, toy, codec);
    EXPECT_EQ(out.at(0, 0, 0), 0.2);
    EXPECT_GT(out.at(4, 4, 0), 0.5);
    const Image again = dds_edit_2d(base, base, "tgt", "init", mask, std::nullopt, cfg, sched, toy, codec);
    EXPECT_EQ(out, again);
}

TEST(Image2d, TwoStepSdsReachesToyMean) {
    const DiffusionSchedule sched = make_schedule(1000);
    ToyDenoiser toy(sched);
    toy.set_prompt("p", ToyCondition{Image(1, 1, 3, 0.6), 0.0});
    ToyCodec codec;
    Sds2dConfig cfg;
    cfg.n_steps = 160;
    const Image out = two_step_sds_2d("p", 8, 8, cfg, sched, toy, codec);
    EXPECT_LT(max_abs_diff(out, Image(8, 8, 3, 0.6)), 0.05);
}
