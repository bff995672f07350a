#pragma once

#include "gsrelight/core/image.hpp"
#include "gsrelight/guidance/schedule.hpp"
#include "gsrelight/guidance/services.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace gsr {

struct Edit2dConfig {
    int n_steps = 200;
    double guidance_scale = 7.5;
    double latent_lr = 0.1;
    /// With a mask, the latent is decoded, composited and re-encoded every this many steps.
    int composite_every = 16;
    double condition_strength = 1.0;
    bool full_timestep_range = false;
    std::uint64_t rng_seed = 0;
};

/// DDS editing where the reference branch is the object-free image. Step j
/// draws its (t, eps) from derive_seed(rng_seed, {j}). With a mask (H x W x 1),
/// the result is mask * decoded + (1 - mask) * img_tgt_init.
[[nodiscard]] Image dds_edit_2d(const Image& img_tgt_init, const Image& img_init, const std::string& prompt_tgt,
                                const std::string& prompt_init, const std::optional<Image>& mask,
                                const std::optional<Image>& depth, const Edit2dConfig& cfg,
                                const DiffusionSchedule& sched, Denoiser& denoiser, Codec& codec);

struct Sds2dConfig {
    double omega = 15.0;
    int n_steps = 1000;
    int steps_latent = 16;
    int steps_image = 256;
    double latent_lr = 0.1;
    double image_lr = 0.01;
    bool full_timestep_range = false;
    std::uint64_t rng_seed = 0;
};

/// Image generation by alternating latent SDS descent with Adam L1 fits of the
/// image to the decoded latent, starting from standard-normal noise.
[[nodiscard]] Image two_step_sds_2d(const std::string& prompt, int height, int width, const Sds2dConfig& cfg,
                                    const DiffusionSchedule& sched, Denoiser& denoiser, Codec& codec);

} // namespace gsr
