#pragma once

#include "gsrelight/guidance/services.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace gsr {

/// Version of the built-in background prompt list; bump when the list changes.
inline constexpr int kBackgroundListVersion = 1;

/// kitchen, beach, forest, library and 16 more fixed prompts.
[[nodiscard]] const std::vector<std::string>& default_backgrounds();

struct TrainConfig {
    int iters = 500;
    int batch = 4;
    double lr = 5e-6;
    double weight_decay = 1e-2;
    std::string scheduler = "constant";
};

struct PersonalizationPlan {
    std::string object_desc = "object";
    std::string rare_token = "<ktn>";
    int n_views = 32;
    std::vector<std::string> backgrounds = default_backgrounds();
    std::vector<LightDirection> directions{LightDirection::Left, LightDirection::Right};
    int n_class_images = 200;
    double instance_probability = 0.7;
    TrainConfig train;
    int image_size = 64;
    double fov_deg = 40.0;
    double radius_factor = 2.5;
    double elevation_min_deg = -10.0;
    double elevation_max_deg = 40.0;

    /// "a <object_desc>"
    [[nodiscard]] std::string class_prompt() const;
    /// "a <rare_token> <object_desc>"
    [[nodiscard]] std::string instance_prompt() const;
    void validate() const;
};

[[nodiscard]] nlohmann::json to_json(const PersonalizationPlan& plan);
/// Starts from the defaults, overrides present fields and validates.
[[nodiscard]] PersonalizationPlan plan_from_json(const nlohmann::json& j);

} // namespace gsr
