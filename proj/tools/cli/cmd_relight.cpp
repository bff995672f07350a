#include "cli/cli_app.hpp"

#include "gsrelight/model/cloud_io.hpp"
#include "gsrelight/model/insertion.hpp"
#include "gsrelight/optim/two_step_dds.hpp"
#include "gsrelight/render/camera.hpp"

#include <spdlog/spdlog.h>

#include <fstream>
#include <optional>

namespace gsr::cli {
namespace {

struct RelightArgs {
    std::string job;
    std::optional<int> stop_after;
    std::optional<int> num_iters;
    std::optional<int> preview_every;
    bool resume = false;
};

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    const std::filesystem::path path(p);
    return path.is_absolute() ? path : base / path;
}

IndexRange object_range_of(const nlohmann::json& job, const std::filesystem::path& base) {
    if (job.contains("object_range")) {
        const auto& r = job.at("object_range");
        require(r.is_array() && r.size() == 2, ErrorCode::MalformedFile, "object_range must be [begin, end]");
        return IndexRange{r[0].get<std::size_t>(), r[1].get<std::size_t>()};
    }
    require(job.contains("insertion"), ErrorCode::MalformedFile, "job needs object_range or insertion");
    const auto path = resolve(base, job.at("insertion").get<std::string>());
    require_file(path, "insertion record");
    return load_insertion_spec(path).object_range;
}

void run_relight(const Context& ctx, const RelightArgs& a) {
    require_file(a.job, "job file");
    nlohmann::json job;
    {
        std::ifstream in(a.job);
        try {
            job = nlohmann::json::parse(in);
        } catch (const nlohmann::json::exception& e) {
            fail(ErrorCode::MalformedFile, "job file is not valid JSON: " + std::string(e.what()));
        }
    }
    const std::filesystem::path base = std::filesystem::path(a.job).parent_path();

    std::string prompt_tgt = job.value("prompt_tgt", std::string{});
    std::string prompt_init = job.value("prompt_init", std::string{});
    if (prompt_tgt.empty() && job.contains("object_desc") && job.contains("scene_desc")) {
        prompt_tgt = target_prompt(job.at("object_desc").get<std::string>(), job.at("scene_desc").get<std::string>());
    }
    if (prompt_init.empty() && job.contains("scene_desc")) {
        prompt_init = init_prompt(job.at("scene_desc").get<std::string>());
    }
    require(!prompt_tgt.empty() && !prompt_init.empty(), ErrorCode::Usage,
            "job needs prompt_tgt/prompt_init or object_desc/scene_desc");

    require(job.contains("cloud"), ErrorCode::MalformedFile, "job needs a cloud path");
    const auto cloud_path = resolve(base, job.at("cloud").get<std::string>());
    require_file(cloud_path, "cloud");
    require(job.contains("cameras"), ErrorCode::MalformedFile, "job needs a cameras path");
    const auto cameras_path = resolve(base, job.at("cameras").get<std::string>());
    require_file(cameras_path, "cameras file");

    OptimizationConfig cfg = optimization_config_from_json(job.value("config", nlohmann::json::object()));
    cfg.rng_seed = ctx.global.seed;
    if (a.num_iters) {
        cfg.num_iters = *a.num_iters;
    }
    if (a.preview_every) {
        cfg.preview_every = *a.preview_every;
    }
    cfg.camera_pool.clear();
    for (const auto& [id, cam] : load_cameras(cameras_path)) {
        cfg.camera_pool.push_back(cam);
    }
    cfg.validate();

    Services services = make_services(ctx.global);
    RelightJob rj;
    rj.cloud = load_cloud(cloud_path);
    rj.object_range = object_range_of(job, base);
    rj.prompt_tgt = prompt_tgt;
    rj.prompt_init = prompt_init;
    rj.config = cfg;
    rj.denoiser = services.denoiser.get();
    rj.codec = services.codec.get();
    rj.validate();

    const auto dir = run_dir(ctx.global, "relight");
    nlohmann::json snapshot = {{"job", a.job},
                               {"prompt_tgt", prompt_tgt},
                               {"prompt_init", prompt_init},
                               {"object_range", {rj.object_range.begin, rj.object_range.end}},
                               {"resume", a.resume},
                               {"config", to_json(cfg)}};
    write_config_snapshot(dir, "relight", ctx.global, snapshot);

    RelightHooks hooks;
    hooks.run_dir = dir;
    hooks.stop = ctx.stop;
    hooks.stop_after_outer = a.stop_after;
    hooks.on_outer = [](const OuterLog& row, const GaussianCloud&) {
        spdlog::info("outer {} step {} dds {:.6g} l1 {:.6g} lr {:.6g}", row.outer_iter, row.image_step,
                     row.dds_grad_norm, row.l1_loss, row.lr);
    };

    RelightResult result;
    try {
        result = a.resume ? resume_two_step_dds(rj, hooks) : two_step_dds(rj, hooks);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::Interrupted && a.stop_after && !ctx.stop->load()) {
            *ctx.out << "stopped; checkpoint in " << dir.string() << '\n';
            return;
        }
        throw;
    }
    save_cloud(result.cloud, dir / "relit.ply");
    *ctx.out << (dir / "relit.ply").string() << '\n';
}

} // namespace

void register_relight(CLI::App& app, Context& ctx) {
    auto args = std::make_shared<RelightArgs>();
    auto* sub = app.add_subcommand("relight", "Relight the inserted object with 2-step DDS");
    sub->add_option("--job", args->job,
                    "Job JSON {cloud, object_range | insertion, object_desc + scene_desc | prompt_tgt + "
                    "prompt_init, cameras, config}")
        ->required();
    sub->add_option("--stop-after", args->stop_after, "Checkpoint and stop after this many outer iterations")
        ->check(CLI::PositiveNumber);
    sub->add_option("--num-iters", args->num_iters, "Override config.num_iters (image steps)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--preview-every", args->preview_every, "Override config.preview_every (outer iterations)")
        ->check(CLI::NonNegativeNumber);
    sub->add_flag("--resume", args->resume, "Continue from the checkpoint in the run directory");
    sub->callback([&ctx, args] { ctx.action = [&ctx, args] { run_relight(ctx, *args); }; });
}

} // namespace gsr::cli
