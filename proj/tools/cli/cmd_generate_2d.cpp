#include "cli/cli_app.hpp"

#include "gsrelight/core/image_io.hpp"
#include "gsrelight/guidance/schedule.hpp"
#include "gsrelight/optim/image_2d.hpp"

namespace gsr::cli {
namespace {

struct Generate2dArgs {
    std::string prompt;
    Sds2dConfig cfg;
    int height = 64;
    int width = 64;
};

void run_generate(const Context& ctx, Generate2dArgs a) {
    require(!a.prompt.empty(), ErrorCode::Usage, "--prompt must not be empty");
    require(a.height % 2 == 0 && a.width % 2 == 0, ErrorCode::Usage, "--height and --width must be even");
    a.cfg.rng_seed = ctx.global.seed;
    Services services = make_services(ctx.global);
    const DiffusionSchedule sched = make_schedule(1000);
    const Image image = two_step_sds_2d(a.prompt, a.height, a.width, a.cfg, sched, *services.denoiser,
                                        *services.codec);

    const auto dir = run_dir(ctx.global, "generate-2d");
    write_config_snapshot(dir, "generate-2d", ctx.global,
                          {{"prompt", a.prompt},
                           {"omega", a.cfg.omega},
                           {"steps", a.cfg.n_steps},
                           {"steps_latent", a.cfg.steps_latent},
                           {"steps_image", a.cfg.steps_image},
                           {"latent_lr", a.cfg.latent_lr},
                           {"image_lr", a.cfg.image_lr},
                           {"full_timestep_range", a.cfg.full_timestep_range},
                           {"height", a.height},
                           {"width", a.width}});
    write_png(dir / "image.png", clamped(image, 0.0, 1.0));
    write_npy(dir / "image.npy", image);
    *ctx.out << (dir / "image.png").string() << '\n';
}

} // namespace

void register_generate_2d(CLI::App& app, Context& ctx) {
    auto args = std::make_shared<Generate2dArgs>();
    auto* sub = app.add_subcommand("generate-2d", "Generate an image from a prompt with 2-step SDS");
    sub->add_option("--prompt", args->prompt, "Text prompt")->required();
    sub->add_option("--omega", args->cfg.omega, "Guidance scale")->capture_default_str();
    sub->add_option("--steps", args->cfg.n_steps, "Image steps in total")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--steps-latent", args->cfg.steps_latent, "Latent steps per outer iteration")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--steps-image", args->cfg.steps_image, "Image steps per outer iteration")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--latent-lr", args->cfg.latent_lr, "Latent SGD step size")->capture_default_str();
    sub->add_option("--image-lr", args->cfg.image_lr, "Image Adam learning rate")->capture_default_str();
    sub->add_flag("--full-timestep-range", args->cfg.full_timestep_range, "Draw t from [1, T] instead of [20, 980]");
    sub->add_option("--height", args->height, "Image height (even)")->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_option("--width", args->width, "Image width (even)")->check(CLI::PositiveNumber)->capture_default_str();
    sub->callback([&ctx, args] { ctx.action = [&ctx, args] { run_generate(ctx, *args); }; });
}

} // namespace gsr::cli
