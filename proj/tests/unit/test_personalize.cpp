#include "scenes.hpp"

#include "gsrelight/bridge/fixtures.hpp"
#include "gsrelight/core/error.hpp"
#include "gsrelight/personalize/dataset.hpp"
#include "gsrelight/personalize/plan.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

using namespace gsr;

namespace {

PersonalizationPlan small_plan() {
    PersonalizationPlan p;
    p.object_desc = "mug";
    p.n_views = 4;
    p.n_class_images = 6;
    p.image_size = 16;
    return p;
}

struct CountingRelighter : Relighter {
    int calls = 0;
    int fail_at = -1;
    Image relight(const Image& img, const std::string& fg, const std::string& bg, LightDirection d) override {
        if (calls++ == fail_at) {
            throw Error(ErrorCode::Timeout, "relighter unreachable");
        }
        return RampRelighter().relight(img, fg, bg, d);
    }
};

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST(Plan, DefaultsEchoTrainingRecipe) {
    const PersonalizationPlan p;
    EXPECT_EQ(p.n_views, 32);
    EXPECT_EQ(p.n_class_images, 200);
    EXPECT_DOUBLE_EQ(p.instance_probability, 0.7);
    EXPECT_EQ(p.train.iters, 500);
    EXPECT_EQ(p.train.batch, 4);
    EXPECT_DOUBLE_EQ(p.train.lr, 5e-6);
    EXPECT_DOUBLE_EQ(p.train.weight_decay, 1e-2);
    EXPECT_EQ(p.train.scheduler, "constant");
    EXPECT_EQ(p.backgrounds.size(), 20u);
    EXPECT_EQ(p.instance_prompt(), "a <ktn> object");
    EXPECT_EQ(p.class_prompt(), "a object");
}

TEST(Plan, JsonRoundTripAndValidation) {
    PersonalizationPlan p = small_plan();
    p.directions = {LightDirection::Right};
    const PersonalizationPlan r = plan_from_json(to_json(p));
    EXPECT_EQ(to_json(r), to_json(p));
    p.backgrounds.clear();
    try {
        p.validate();
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InvariantViolation);
    }
    EXPECT_THROW((void)plan_from_json({{"n_views", "thirty"}}), Error);
}

TEST(Orbit, ViewsLookAtObjectFromPlanDistance) {
    const PersonalizationPlan p;
    const Eigen::Vector3d center(0.3, -0.2, 1.0);
    Rng rng = make_rng(1, {});
    for (int k = 0; k < 100; ++k) {
        const OrbitView v = sample_orbit_view(center, 0.8, p, rng);
        EXPECT_NEAR((v.camera.center() - center).norm(), 2.0, 1e-9);
        EXPECT_GE(v.elevation_deg, -10.0);
        EXPECT_LE(v.elevation_deg, 40.0);
        EXPECT_GE(v.azimuth_deg, 0.0);
        EXPECT_LT(v.azimuth_deg, 360.0);
        const Eigen::Vector3d c = v.camera.world_to_cam.topLeftCorner<3, 3>() * center + v.camera.translation();
        EXPECT_NEAR(c.x(), 0.0, 1e-9);
        EXPECT_NEAR(c.y(), 0.0, 1e-9);
        EXPECT_GT(c.z(), 0.0);
    }
}

TEST(Dataset, BuildsSortedManifestDeterministically) {
    const GaussianCloud object = fixture::random_cloud(30, 41);
    const auto a = fixture::temp_dir("ds");
    const auto b = fixture::temp_dir("ds");
    RampRelighter relighter;
    HashImageSampler sampler;
    const DatasetManifest m = build_dataset(object, small_plan(), 5, relighter, sampler, a);
    (void)build_dataset(object, small_plan(), 5, relighter, sampler, b);
    ASSERT_EQ(m.records.size(), 10u);
    EXPECT_TRUE(std::is_sorted(m.records.begin(), m.records.end(),
                               [](const auto& x, const auto& y) { return x.id < y.id; }));
    EXPECT_EQ(m.records.front().id, "class_0000");
    EXPECT_EQ(m.records.back().id, "iclight_0003");
    EXPECT_EQ(m.records.back().prompt, "a <ktn> mug");
    EXPECT_EQ(m.records.front().prompt, "a mug");
    EXPECT_EQ(slurp(a / "manifest.jsonl"), slurp(b / "manifest.jsonl"));
    for (const auto& r : m.records) {
        EXPECT_EQ(slurp(a / r.image), slurp(b / r.image)) << r.id;
    }
    const DatasetManifest back = read_manifest(a / "manifest.jsonl");
    EXPECT_EQ(back.records, m.records);
    EXPECT_EQ(back.rng_seed, 5u);
    EXPECT_FALSE(std::filesystem::exists(a / "manifest.partial.jsonl"));
}

TEST(Dataset, ResumesAfterBridgeFailure) {
    const GaussianCloud object = fixture::random_cloud(30, 42);
    const auto fresh = fixture::temp_dir("ds");
    const auto dir = fixture::temp_dir("ds");
    RampRelighter ramp;
    HashImageSampler sampler;
    (void)build_dataset(object, small_plan(), 6, ramp, sampler, fresh);

    CountingRelighter flaky;
    flaky.fail_at = 2;
    try {
        (void)build_dataset(object, small_plan(), 6, flaky, sampler, dir);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::BridgeFailure);
    }
    EXPECT_EQ(read_manifest(dir / "manifest.partial.jsonl").records.size(), 2u);
    CountingRelighter steady;
    (void)build_dataset(object, small_plan(), 6, steady, sampler, dir);
    EXPECT_EQ(steady.calls, 2);
    EXPECT_EQ(slurp(dir / "manifest.jsonl"), slurp(fresh / "manifest.jsonl"));
}

TEST(Dataset, TrainingMixFollowsProbability) {
    DatasetManifest m;
    m.plan = to_json(PersonalizationPlan{});
    for (int k = 0; k < 5; ++k) {
        m.records.push_back({"iclight_" + std::to_string(k), "x.png", "i", RecordSource::IcLight});
        m.records.push_back({"class_" + std::to_string(k), "y.png", "c", RecordSource::Class});
    }
    Rng rng = make_rng(3, {});
    const auto mix = sample_training_mix(m, 20000, rng);
    const auto inst = std::count_if(mix.begin(), mix.end(),
                                    [](const ManifestRecord& r) { return r.source == RecordSource::IcLight; });
    EXPECT_NEAR(static_cast<double>(inst) / 20000.0, 0.7, 0.015);

    DatasetManifest only_instance = m;
    std::erase_if(only_instance.records, [](const ManifestRecord& r) { return r.source == RecordSource::Class; });
    try {
        (void)sample_training_mix(only_instance, 10, rng);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::MissingSource);
    }
}

TEST(Dataset, FinetuneJobCarriesRecipe) {
    DatasetManifest m;
    m.plan = to_json(small_plan());
    m.rng_seed = 9;
    m.records.push_back({"class_0000", "images/class_0000.png", "a mug", RecordSource::Class});
    const nlohmann::json job = finetune_job(m);
    EXPECT_EQ(job.at("train").at("iters"), 500);
    EXPECT_EQ(job.at("train").at("batch"), 4);
    EXPECT_EQ(job.at("instance_prompt"), "a <ktn> mug");
    EXPECT_EQ(job.at("records").size(), 1u);
    EXPECT_EQ(job.at("records")[0].at("source"), "class");
    FixtureFinetune ft;
    const std::string id = ft.submit_finetune(job);
    EXPECT_EQ(ft.poll_finetune(id).status, "completed");
}
