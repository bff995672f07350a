#include "gsrelight/optim/two_step_dds.hpp"

#include "gsrelight/core/error.hpp"
#include "gsrelight/core/image_io.hpp"
#include "gsrelight/core/rng.hpp"
#include "gsrelight/guidance/guidance.hpp"
#include "gsrelight/model/insertion.hpp"
#include "gsrelight/render/rasterizer.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

namespace gsr {
namespace {

constexpr std::uint64_t kCameraStream = 0xCA;
constexpr std::uint64_t kNoiseStream = 0xE5;

bool is_bridge_error(ErrorCode code) {
    switch (code) {
    case ErrorCode::DenoiserFailure:
    case ErrorCode::Timeout:
    case ErrorCode::ProtocolError:
    case ErrorCode::ServerError:
    case ErrorCode::BridgeFailure:
    case ErrorCode::UnknownJob:
        return true;
    default:
        return false;
    }
}

// Object parameters split into the base color (coefficient 0) and the rest.
void gather(const GaussianCloud& cloud, IndexRange range, std::vector<double>& dc, std::vector<double>& rest) {
    dc.resize(range.size() * 3);
    rest.resize(range.size() * (kShFloats - 3));
    for (std::size_t n = 0; n < range.size(); ++n) {
        const auto sh = cloud.sh_of(range.begin + n);
        for (int k = 0; k < 3; ++k) {
            dc[n * 3 + k] = sh[k];
        }
        for (int k = 3; k < kShFloats; ++k) {
            rest[n * (kShFloats - 3) + (k - 3)] = sh[k];
        }
    }
}

void scatter(GaussianCloud& cloud, IndexRange range, const std::vector<double>& dc, const std::vector<double>& rest) {
    for (std::size_t n = 0; n < range.size(); ++n) {
        auto sh = cloud.sh_of(range.begin + n);
        for (int k = 0; k < 3; ++k) {
            sh[k] = static_cast<float>(dc[n * 3 + k]);
        }
        for (int k = 3; k < kShFloats; ++k) {
            sh[k] = static_cast<float>(rest[n * (kShFloats - 3) + (k - 3)]);
        }
    }
}

class CsvLog {
public:
    CsvLog(const std::filesystem::path& path, bool append) {
        if (path.empty()) {
            return;
        }
        const bool fresh = !append || !std::filesystem::exists(path);
        out_.open(path, fresh ? std::ios::trunc : std::ios::app);
        require(static_cast<bool>(out_), ErrorCode::IoFailure, "cannot open " + path.string());
        if (fresh) {
            out_ << "outer_iter,dds_grad_norm,l1_loss,lr\n";
        }
    }

    void write(const OuterLog& row) {
        if (!out_.is_open()) {
            return;
        }
        char line[160];
        std::snprintf(line, sizeof line, "%d,%.17g,%.17g,%.17g\n", row.outer_iter, row.dds_grad_norm, row.l1_loss,
                      row.lr);
        out_ << line;
        out_.flush();
    }

private:
    std::ofstream out_;
};

struct LoopState {
    GaussianCloud cloud;
    AdamState adam_color;
    AdamState adam_sh;
    int next_outer = 0;
    long image_step = 0;
};

RelightCheckpoint to_checkpoint(const LoopState& s, std::uint64_t seed) {
    return {s.cloud, s.adam_color, s.adam_sh, s.next_outer, s.image_step, seed};
}

RelightResult run_loop(const RelightJob& job, LoopState state, const RelightHooks& hooks, bool resumed) {
    const OptimizationConfig& cfg = job.config;
    const IndexRange range = job.object_range;
    const DiffusionSchedule sched = make_schedule(cfg.diffusion_steps);
    const TimestepRange trange =
        cfg.full_timestep_range ? TimestepRange::full(sched.T) : TimestepRange::trimmed(sched.T);
    const ShScheduleConfig sh_cfg{cfg.sh_degree_interval};
    const bool write_files = !hooks.run_dir.empty();
    if (write_files) {
        std::filesystem::create_directories(hooks.run_dir);
    }
    CsvLog csv(write_files ? hooks.run_dir / "metrics.csv" : std::filesystem::path{}, resumed);

    auto checkpoint = [&] {
        if (write_files) {
            save_checkpoint(hooks.run_dir, to_checkpoint(state, cfg.rng_seed));
        }
    };

    RelightResult result;
    const int outer_total = cfg.outer_iterations();
    std::vector<double> dc;
    std::vector<double> rest;
    for (int i = state.next_outer; i < outer_total; ++i) {
        state.next_outer = i;
        Rng cam_rng = make_rng(cfg.rng_seed, {static_cast<std::uint64_t>(i), kCameraStream});
        const Camera& cam =
            cfg.camera_pool[static_cast<std::size_t>(uniform_int(cam_rng, 0, static_cast<std::int64_t>(cfg.camera_pool.size()) - 1))];

        RenderOptions opts;
        opts.degree_limited = range;
        opts.limited_degree = active_degree_at(state.image_step, sh_cfg);
        RenderOptions scene_opts;
        scene_opts.excluded = range;

        RenderBundle bundle = render(state.cloud, cam, cfg.background, opts);
        const RenderBundle scene_bundle = render(state.cloud, cam, cfg.background, scene_opts);

        DenoiserCondition cond_tgt{job.prompt_tgt, std::nullopt, cfg.condition_strength, {}};
        DenoiserCondition cond_init{job.prompt_init, std::nullopt, cfg.condition_strength, {}};
        if (cfg.use_depth) {
            cond_tgt.depth = depth_condition(bundle.depth, bundle.alpha);
            cond_init.depth = cond_tgt.depth;
        }

        // Step 1: DDS descent on the target latent.
        Image image_opt;
        double grad_norm_sum = 0.0;
        try {
            Image latent = job.codec->encode(bundle.rgb);
            const Image latent_init = job.codec->encode(scene_bundle.rgb);
            for (int j = 0; j < cfg.steps_latent; ++j) {
                const auto seed = derive_seed(cfg.rng_seed, {static_cast<std::uint64_t>(i),
                                                             static_cast<std::uint64_t>(j), kNoiseStream});
                const GuidanceSample sample =
                    draw_sample(seed, latent.height(), latent.width(), latent.channels(), trange);
                const Image grad = dds_grad(latent, latent_init, sample, sched, *job.denoiser, cond_tgt, cond_init,
                                            cfg.guidance_scale);
                grad_norm_sum += l2_norm(grad);
                latent = latent - cfg.latent_lr * grad;
            }
            image_opt = job.codec->decode(latent);
        } catch (const Error& e) {
            if (!is_bridge_error(e.code())) {
                throw;
            }
            checkpoint();
            throw Error(ErrorCode::DenoiserFailure,
                        "outer iteration " + std::to_string(i) + ": " + e.what(), e.detail());
        }
        require(image_opt.same_shape(bundle.rgb), ErrorCode::ShapeMismatch, "decoded latent does not match the render");

        // Step 2: fit object colors/SH to the decoded image.
        const Image mask = mask_from_bundle(bundle, range);
        const double n = static_cast<double>(bundle.rgb.size());
        const int steps = static_cast<int>(std::min<long>(cfg.steps_image, cfg.num_iters - state.image_step));
        double loss = 0.0;
        double lr = cfg.color_lr_at(state.image_step);
        for (int k = 0; k < steps; ++k) {
            opts.limited_degree = active_degree_at(state.image_step, sh_cfg);
            recolor(bundle, state.cloud, cam, opts);

            Image dl(bundle.rgb.height(), bundle.rgb.width(), 3);
            loss = 0.0;
            for (int y = 0; y < dl.height(); ++y) {
                for (int x = 0; x < dl.width(); ++x) {
                    const double m = mask.at(y, x);
                    for (int c = 0; c < 3; ++c) {
                        const double d = bundle.rgb.at(y, x, c) - image_opt.at(y, x, c);
                        loss += m * std::abs(d);
                        dl.at(y, x, c) = d > 0.0 ? 1.0 / n : (d < 0.0 ? -1.0 / n : 0.0);
                    }
                }
            }
            loss /= n;
            require(std::isfinite(loss), ErrorCode::NonFiniteLoss,
                    "non-finite L1 loss at outer " + std::to_string(i) + ", image step " + std::to_string(k));
            if (hooks.on_image_step) {
                hooks.on_image_step(i, k, loss);
            }

            const ColorGrad grad = backprop_color(bundle, state.cloud, cam, mask_grad(dl, mask));
            std::vector<double> g_dc(range.size() * 3);
            std::vector<double> g_rest(range.size() * (kShFloats - 3));
            for (std::size_t o = 0; o < range.size(); ++o) {
                const auto g = grad.of(range.begin + o);
                for (int c = 0; c < 3; ++c) {
                    g_dc[o * 3 + c] = g[c];
                }
                for (int c = 3; c < kShFloats; ++c) {
                    g_rest[o * (kShFloats - 3) + (c - 3)] = g[c];
                }
            }
            gather(state.cloud, range, dc, rest);
            lr = cfg.color_lr_at(state.image_step);
            adam_step(state.adam_color, dc, g_dc, lr);
            adam_step(state.adam_sh, rest, g_rest, cfg.sh_lr);
            scatter(state.cloud, range, dc, rest);
            ++state.image_step;
        }

        const long before = state.image_step - steps;
        state.next_outer = i + 1;
        OuterLog row{i, grad_norm_sum / cfg.steps_latent, loss, lr, state.image_step, opts.limited_degree};
        result.log.push_back(row);
        csv.write(row);
        if (hooks.on_outer) {
            hooks.on_outer(row, state.cloud);
        }
        if (write_files && cfg.preview_every > 0 && (i + 1) % cfg.preview_every == 0) {
            recolor(bundle, state.cloud, cam, opts);
            char name[64];
            std::snprintf(name, sizeof name, "preview_%05d.png", i);
            write_png(hooks.run_dir / name, tile_horizontally({image_opt, bundle.rgb}));
        }
        if (before / cfg.checkpoint_every != state.image_step / cfg.checkpoint_every) {
            checkpoint();
        }
        const bool stop_requested = (hooks.stop && hooks.stop->load()) ||
                                    (hooks.stop_after_outer && i + 1 >= *hooks.stop_after_outer);
        if (stop_requested && state.next_outer < outer_total) {
            checkpoint();
            fail(ErrorCode::Interrupted, "stopped after outer iteration " + std::to_string(i));
        }
    }
    result.cloud = std::move(state.cloud);
    return result;
}

} // namespace

std::string target_prompt(const std::string& object_desc, const std::string& scene_desc) {
    return "a " + object_desc + " in a " + scene_desc;
}

std::string init_prompt(const std::string& scene_desc) {
    return "a " + scene_desc;
}

void RelightJob::validate() const {
    require(!prompt_tgt.empty() && !prompt_init.empty(), ErrorCode::InvariantViolation, "prompts must be non-empty");
    require(!object_range.empty() && object_range.end <= cloud.size(), ErrorCode::InvariantViolation,
            "object range is empty or outside the cloud");
    require(denoiser != nullptr && codec != nullptr, ErrorCode::InvariantViolation, "job needs a denoiser and a codec");
    require(!config.camera_pool.empty(), ErrorCode::InvariantViolation, "camera pool is empty");
    config.validate();
    cloud.validate();
}

Image depth_condition(const Image& depth, const Image& alpha) {
    require_same_shape(depth, alpha, "depth_condition");
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < depth.size(); ++p) {
        if (alpha[p] > 0.0) {
            lo = std::min(lo, depth[p]);
            hi = std::max(hi, depth[p]);
        }
    }
    Image out(depth.height(), depth.width(), 1);
    if (!(hi >= lo)) {
        return out;
    }
    const double span = hi - lo;
    for (std::size_t p = 0; p < depth.size(); ++p) {
        if (alpha[p] > 0.0) {
            out[p] = span > 0.0 ? (hi - depth[p]) / span : 1.0;
        }
    }
    return out;
}

RelightResult two_step_dds(const RelightJob& job, const RelightHooks& hooks) {
    job.validate();
    LoopState state;
    state.cloud = job.cloud;
    state.adam_color = AdamState(job.object_range.size() * 3);
    state.adam_sh = AdamState(job.object_range.size() * (kShFloats - 3));
    return run_loop(job, std::move(state), hooks, false);
}

RelightResult resume_two_step_dds(const RelightJob& job, const RelightHooks& hooks) {
    require(!hooks.run_dir.empty(), ErrorCode::Usage, "resume needs a run directory");
    RelightCheckpoint ckpt = load_checkpoint(hooks.run_dir);
    require(ckpt.rng_seed == job.config.rng_seed, ErrorCode::InvariantViolation,
            "checkpoint was written with a different seed");
    RelightJob checked = job;
    checked.cloud = std::move(ckpt.cloud);
    checked.validate();
    require(ckpt.adam_color.m.size() == job.object_range.size() * 3 &&
                ckpt.adam_sh.m.size() == job.object_range.size() * (kShFloats - 3),
            ErrorCode::MalformedFile, "checkpoint optimizer state does not match the object range");
    LoopState state;
    state.cloud = std::move(checked.cloud);
    state.adam_color = std::move(ckpt.adam_color);
    state.adam_sh = std::move(ckpt.adam_sh);
    state.next_outer = ckpt.next_outer;
    state.image_step = ckpt.image_step;
    return run_loop(job, std::move(state), hooks, true);
}

} // namespace gsr
