#include "gsrelight/optim/image_2d.hpp"

#include "gsrelight/core/error.hpp"
#include "gsrelight/core/rng.hpp"
#include "gsrelight/guidance/guidance.hpp"
#include "gsrelight/optim/adam.hpp"

#include <algorithm>

namespace gsr {
namespace {

constexpr std::uint64_t kInitStream = 0x1417;

Image composite(const Image& decoded, const Image& original, const Image& mask) {
    Image out = original;
    for (int y = 0; y < out.height(); ++y) {
        for (int x = 0; x < out.width(); ++x) {
            const double m = mask.at(y, x);
            for (int c = 0; c < out.channels(); ++c) {
                out.at(y, x, c) = m * decoded.at(y, x, c) + (1.0 - m) * original.at(y, x, c);
            }
        }
    }
    return out;
}

} // namespace

Image dds_edit_2d(const Image& img_tgt_init, const Image& img_init, const std::string& prompt_tgt,
                  const std::string& prompt_init, const std::optional<Image>& mask, const std::optional<Image>& depth,
                  const Edit2dConfig& cfg, const DiffusionSchedule& sched, Denoiser& denoiser, Codec& codec) {
    require_same_shape(img_tgt_init, img_init, "dds_edit_2d images");
    require(cfg.n_steps >= 0 && cfg.composite_every > 0 && cfg.latent_lr > 0.0, ErrorCode::InvariantViolation,
            "invalid 2D edit config");
    if (mask) {
        require(mask->height() == img_init.height() && mask->width() == img_init.width() && mask->channels() == 1,
                ErrorCode::ShapeMismatch, "mask must be H x W x 1");
    }
    DenoiserCondition cond_tgt{prompt_tgt, depth, cfg.condition_strength, {}};
    DenoiserCondition cond_init{prompt_init, depth, cfg.condition_strength, {}};
    const TimestepRange range =
        cfg.full_timestep_range ? TimestepRange::full(sched.T) : TimestepRange::trimmed(sched.T);

    Image latent = codec.encode(img_tgt_init);
    const Image latent_init = codec.encode(img_init);
    for (int j = 0; j < cfg.n_steps; ++j) {
        const GuidanceSample sample = draw_sample(derive_seed(cfg.rng_seed, {static_cast<std::uint64_t>(j)}),
                                                  latent.height(), latent.width(), latent.channels(), range);
        const Image grad =
            dds_grad(latent, latent_init, sample, sched, denoiser, cond_tgt, cond_init, cfg.guidance_scale);
        latent = latent - cfg.latent_lr * grad;
        if (mask && (j + 1) % cfg.composite_every == 0 && j + 1 < cfg.n_steps) {
            latent = codec.encode(composite(codec.decode(latent), img_tgt_init, *mask));
        }
    }
    const Image decoded = codec.decode(latent);
    return mask ? composite(decoded, img_tgt_init, *mask) : decoded;
}

Image two_step_sds_2d(const std::string& prompt, int height, int width, const Sds2dConfig& cfg,
                      const DiffusionSchedule& sched, Denoiser& denoiser, Codec& codec) {
    require(cfg.n_steps >= 0 && cfg.steps_latent > 0 && cfg.steps_image > 0 && cfg.latent_lr > 0.0 &&
                cfg.image_lr > 0.0,
            ErrorCode::InvariantViolation, "invalid 2-step-SDS config");
    const DenoiserCondition cond{prompt, std::nullopt, 1.0, {}};
    const TimestepRange range =
        cfg.full_timestep_range ? TimestepRange::full(sched.T) : TimestepRange::trimmed(sched.T);

    Image image(height, width, 3);
    Rng init_rng = make_rng(cfg.rng_seed, {kInitStream});
    fill_standard_normal(image, init_rng);

    AdamState adam(image.size());
    const double n = static_cast<double>(image.size());
    std::vector<double> grad(image.size());
    int done = 0;
    while (done < cfg.n_steps) {
        Image latent = codec.encode(image);
        const int block = std::min(cfg.steps_latent, cfg.n_steps - done);
        for (int j = 0; j < block; ++j, ++done) {
            const GuidanceSample sample = draw_sample(derive_seed(cfg.rng_seed, {static_cast<std::uint64_t>(done)}),
                                                      latent.height(), latent.width(), latent.channels(), range);
            latent = latent - cfg.latent_lr * sds_grad(latent, sample, sched, denoiser, cond, cfg.omega);
        }
        const Image target = codec.decode(latent);
        for (int k = 0; k < cfg.steps_image; ++k) {
            for (std::size_t p = 0; p < image.size(); ++p) {
                const double d = image[p] - target[p];
                grad[p] = d > 0.0 ? 1.0 / n : (d < 0.0 ? -1.0 / n : 0.0);
            }
            adam_step(adam, image.data(), grad, cfg.image_lr);
        }
    }
    return image;
}

} // namespace gsr
