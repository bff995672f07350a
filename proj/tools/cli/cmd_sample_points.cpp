#include "cli/cli_app.hpp"

#include "gsrelight/mesh/obj_io.hpp"
#include "gsrelight/mesh/sampling.hpp"
#include "gsrelight/model/cloud_io.hpp"

#include <fmt/format.h>

#include <fstream>
#include <optional>

namespace gsr::cli {
namespace {

struct SampleArgs {
    std::string mesh;
    std::string strategy = "surface_area";
    std::optional<int> count;
    std::string preset = "object";
    bool xyz = false;
};

int preset_count(const std::string& preset) {
    if (preset == "object_scene") {
        return kObjectScenePresetCount;
    }
    if (preset == "scene") {
        return kScenePresetCount;
    }
    return kObjectPresetCount;
}

void run_sample(const Context& ctx, const SampleArgs& a) {
    SampleConfig cfg;
    cfg.strategy = sample_strategy_from_string(a.strategy);
    cfg.count = a.count.value_or(preset_count(a.preset));
    cfg.rng_seed = ctx.global.seed;
    cfg.validate();
    require_file(a.mesh, "mesh");

    const MeshScene scene = load_obj(a.mesh);
    const auto points = sample_points(scene, cfg);

    const auto dir = run_dir(ctx.global, "sample-points");
    write_config_snapshot(dir, "sample-points", ctx.global,
                          {{"mesh", a.mesh},
                           {"strategy", to_string(cfg.strategy)},
                           {"count", cfg.count},
                           {"preset", a.preset},
                           {"xyz", a.xyz}});
    save_points(dir / "points.ply", points);
    if (a.xyz) {
        std::ofstream out(dir / "points.xyz");
        for (const auto& p : points) {
            out << fmt::format("{:.9g} {:.9g} {:.9g}\n", p.x(), p.y(), p.z());
        }
    }
    *ctx.out << (dir / "points.ply").string() << " (" << points.size() << " points)\n";
}

} // namespace

void register_sample_points(CLI::App& app, Context& ctx) {
    auto args = std::make_shared<SampleArgs>();
    auto* sub = app.add_subcommand("sample-points", "Sample an initial point cloud from an OBJ mesh");
    sub->add_option("--mesh", args->mesh, "Input mesh (.obj); o/g statements start new objects")->required();
    sub->add_option("--strategy", args->strategy, "surface_area, uniform_triangle or bbox")->capture_default_str();
    sub->add_option("--count", args->count, "Number of points (default from --preset)")->check(CLI::PositiveNumber);
    sub->add_option("--preset", args->preset, "object (10000), object_scene (5000) or scene (50000)")
        ->check(CLI::IsMember({"object", "object_scene", "scene"}))
        ->capture_default_str();
    sub->add_flag("--xyz", args->xyz, "Also write points.xyz as text");
    sub->callback([&ctx, args] { ctx.action = [&ctx, args] { run_sample(ctx, *args); }; });
}

} // namespace gsr::cli
