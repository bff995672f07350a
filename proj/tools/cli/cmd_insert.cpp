#include "cli/cli_app.hpp"

#include "gsrelight/core/image_io.hpp"
#include "gsrelight/model/cloud_io.hpp"
#include "gsrelight/model/insertion.hpp"
#include "gsrelight/render/camera.hpp"
#include "gsrelight/render/rasterizer.hpp"

#include <spdlog/spdlog.h>

#include <fstream>

namespace gsr::cli {
namespace {

struct InsertArgs {
    std::string scene;
    std::string object;
    std::string spec;
    std::string cameras;
    bool init_mean = false;
    std::string sh_mode = "reset";
};

void run_insert(const Context& ctx, const InsertArgs& a) {
    require_file(a.scene, "scene cloud");
    require_file(a.object, "object cloud");
    require_file(a.spec, "insertion spec");
    if (!a.cameras.empty()) {
        require_file(a.cameras, "cameras file");
    }

    const GaussianCloud scene = load_cloud(a.scene);
    const GaussianCloud object = load_cloud(a.object);
    const InsertionSpec spec = load_insertion_spec(a.spec);
    const ShOnInsert mode = a.sh_mode == "raw" ? ShOnInsert::RawPreview : ShOnInsert::Reset;
    auto [merged, placed] = insert_object(scene, object, spec, mode);
    if (a.init_mean) {
        merged = init_object_appearance(std::move(merged), placed.object_range);
    }

    const auto dir = run_dir(ctx.global, "insert");
    write_config_snapshot(dir, "insert",
                          ctx.global,
                          {{"scene", a.scene},
                           {"object", a.object},
                           {"spec", a.spec},
                           {"cameras", a.cameras},
                           {"init_mean", a.init_mean},
                           {"sh_mode", a.sh_mode}});
    save_cloud(merged, dir / "merged.ply");
    {
        std::ofstream out(dir / "insertion.json");
        out << to_json(placed).dump(2) << '\n';
    }
    std::size_t tiles = 0;
    if (!a.cameras.empty()) {
        std::vector<Image> views;
        for (const auto& [id, cam] : load_cameras(a.cameras)) {
            views.push_back(render(merged, cam, Eigen::Vector3d::Zero()).rgb);
        }
        if (!views.empty()) {
            write_png(dir / "preview.png", tile_horizontally(views));
        }
        tiles = views.size();
    }
    spdlog::info("inserted {} object Gaussians at [{}, {})", placed.object_range.size(), placed.object_range.begin,
                 placed.object_range.end);
    *ctx.out << (dir / "merged.ply").string() << '\n';
    if (tiles > 0) {
        *ctx.out << (dir / "preview.png").string() << " (" << tiles << " views)\n";
    }
}

} // namespace

void register_insert(CLI::App& app, Context& ctx) {
    auto args = std::make_shared<InsertArgs>();
    auto* sub = app.add_subcommand("insert", "Paste an object cloud into a scene cloud");
    sub->add_option("--scene", args->scene, "Scene cloud (.ply)")->required();
    sub->add_option("--object", args->object, "Object cloud (.ply)")->required();
    sub->add_option("--spec", args->spec, "Insertion spec JSON {translation, rotation_wxyz, scale}")->required();
    sub->add_option("--cameras", args->cameras, "cameras.json for the preview grid (one tile per camera)");
    sub->add_flag("--init-mean", args->init_mean, "Set object base colors to their mean and zero higher SH");
    sub->add_option("--sh-mode", args->sh_mode, "reset: zero degrees >= 1; raw: keep them unrotated")
        ->check(CLI::IsMember({"reset", "raw"}))
        ->capture_default_str();
    sub->callback([&ctx, args] { ctx.action = [&ctx, args] { run_insert(ctx, *args); }; });
}

} // namespace gsr::cli
