#pragma once

#include "gsrelight/render/camera.hpp"

#include <Eigen/Core>
#include <json.hpp>

#include <cstdint>
#include <vector>

namespace gsr {

struct OptimizationConfig {
    int num_iters = 20000;
    int steps_latent = 16;
    int steps_image = 256;
    double guidance_scale = 7.5;
    double latent_lr = 0.1;
    double color_lr = 0.0025;
    double sh_lr = 0.000125;
    int sh_degree_interval = 5000;
    /// color lr after num_iters image steps, as a fraction of color_lr.
    double lr_final_ratio = 0.01;
    std::uint64_t rng_seed = 0;
    std::vector<Camera> camera_pool;
    Eigen::Vector3d background = Eigen::Vector3d::Zero();
    /// Checkpoint whenever the image-step counter crosses a multiple of this.
    int checkpoint_every = 1000;
    /// PNG preview every N outer iterations (0 disables).
    int preview_every = 0;
    bool use_depth = true;
    double condition_strength = 1.0;
    bool full_timestep_range = false;
    int diffusion_steps = 1000;

    void validate() const;

    [[nodiscard]] int outer_iterations() const { return (num_iters + steps_image - 1) / steps_image; }
    /// Per-step decay factor gamma with gamma^num_iters = lr_final_ratio.
    [[nodiscard]] double lr_decay() const;
    [[nodiscard]] double color_lr_at(long image_step) const;
};

/// Hyperparameters plus runtime fields; cameras are written as camera documents.
[[nodiscard]] nlohmann::json to_json(const OptimizationConfig& cfg);
/// Starts from `base` and overrides any field present in `j`.
[[nodiscard]] OptimizationConfig optimization_config_from_json(const nlohmann::json& j,
                                                               OptimizationConfig base = {});

} // namespace gsr
