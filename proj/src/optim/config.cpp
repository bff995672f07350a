#include "gsrelight/optim/config.hpp"

#include "gsrelight/core/error.hpp"

#include <cmath>

namespace gsr {

void OptimizationConfig::validate() const {
    require(num_iters > 0 && steps_latent > 0 && steps_image > 0, ErrorCode::InvariantViolation,
            "step counts must be positive");
    require(latent_lr > 0.0 && color_lr > 0.0 && sh_lr > 0.0, ErrorCode::InvariantViolation,
            "learning rates must be positive");
    require(sh_degree_interval > 0, ErrorCode::InvariantViolation, "sh_degree_interval must be positive");
    require(lr_final_ratio > 0.0 && lr_final_ratio <= 1.0, ErrorCode::InvariantViolation,
            "lr_final_ratio must lie in (0, 1]");
    require(checkpoint_every > 0, ErrorCode::InvariantViolation, "checkpoint_every must be positive");
    require(preview_every >= 0, ErrorCode::InvariantViolation, "preview_every must be >= 0");
    require(condition_strength >= 0.0 && condition_strength <= 2.0, ErrorCode::InvariantViolation,
            "condition_strength must lie in [0, 2]");
    require(diffusion_steps >= 2, ErrorCode::InvalidT, "diffusion_steps must be >= 2");
    for (const Camera& cam : camera_pool) {
        cam.validate();
    }
}

double OptimizationConfig::lr_decay() const {
    return std::pow(lr_final_ratio, 1.0 / static_cast<double>(num_iters));
}

double OptimizationConfig::color_lr_at(long image_step) const {
    return color_lr * std::pow(lr_decay(), static_cast<double>(image_step));
}

nlohmann::json to_json(const OptimizationConfig& cfg) {
    nlohmann::json cams = nlohmann::json::array();
    for (const Camera& cam : cfg.camera_pool) {
        cams.push_back(to_json(cam));
    }
    return {
        {"num_iters", cfg.num_iters},
        {"steps_latent", cfg.steps_latent},
        {"steps_image", cfg.steps_image},
        {"guidance_scale", cfg.guidance_scale},
        {"latent_lr", cfg.latent_lr},
        {"color_lr", cfg.color_lr},
        {"sh_lr", cfg.sh_lr},
        {"sh_degree_interval", cfg.sh_degree_interval},
        {"lr_final_ratio", cfg.lr_final_ratio},
        {"rng_seed", cfg.rng_seed},
        {"camera_pool", cams},
        {"background", {cfg.background.x(), cfg.background.y(), cfg.background.z()}},
        {"checkpoint_every", cfg.checkpoint_every},
        {"preview_every", cfg.preview_every},
        {"use_depth", cfg.use_depth},
        {"condition_strength", cfg.condition_strength},
        {"full_timestep_range", cfg.full_timestep_range},
        {"diffusion_steps", cfg.diffusion_steps},
    };
}

OptimizationConfig optimization_config_from_json(const nlohmann::json& j, OptimizationConfig base) {
    require(j.is_object(), ErrorCode::MalformedFile, "optimization config must be a JSON object");
    try {
        auto read = [&](const char* key, auto& field) {
            if (j.contains(key)) {
                j.at(key).get_to(field);
            }
        };
        read("num_iters", base.num_iters);
        read("steps_latent", base.steps_latent);
        read("steps_image", base.steps_image);
        read("guidance_scale", base.guidance_scale);
        read("latent_lr", base.latent_lr);
        read("color_lr", base.color_lr);
        read("sh_lr", base.sh_lr);
        read("sh_degree_interval", base.sh_degree_interval);
        read("lr_final_ratio", base.lr_final_ratio);
        read("rng_seed", base.rng_seed);
        read("checkpoint_every", base.checkpoint_every);
        read("preview_every", base.preview_every);
        read("use_depth", base.use_depth);
        read("condition_strength", base.condition_strength);
        read("full_timestep_range", base.full_timestep_range);
        read("diffusion_steps", base.diffusion_steps);
        if (j.contains("background")) {
            const auto& bg = j.at("background");
            require(bg.is_array() && bg.size() == 3, ErrorCode::MalformedFile, "background must have 3 entries");
            base.background = {bg[0].get<double>(), bg[1].get<double>(), bg[2].get<double>()};
        }
        if (j.contains("camera_pool")) {
            base.camera_pool.clear();
            for (const auto& c : j.at("camera_pool")) {
                base.camera_pool.push_back(camera_from_json(c));
            }
        }
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::MalformedFile, std::string("optimization config: ") + e.what());
    }
    base.validate();
    return base;
}

} // namespace gsr
