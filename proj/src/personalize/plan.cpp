#include "gsrelight/personalize/plan.hpp"

#include "gsrelight/core/error.hpp"

namespace gsr {

const std::vector<std::string>& default_backgrounds() {
    static const std::vector<std::string> list = {
        "kitchen",        "beach",           "forest",         "library",      "city street at night",
        "snowy mountain", "desert at noon",  "office desk",    "living room",  "garden in spring",
        "subway station", "sunset harbor",   "cozy bedroom",   "museum hall",  "neon-lit alley",
        "rainy window",   "wooden workshop", "grassy meadow",  "cafe table",   "studio with softbox lights",
    };
    return list;
}

std::string PersonalizationPlan::class_prompt() const {
    return "a " + object_desc;
}

std::string PersonalizationPlan::instance_prompt() const {
    return "a " + rare_token + " " + object_desc;
}

void PersonalizationPlan::validate() const {
    require(!object_desc.empty(), ErrorCode::InvariantViolation, "object_desc is empty");
    require(!rare_token.empty() && object_desc.find(rare_token) == std::string::npos, ErrorCode::InvariantViolation,
            "rare token must be non-empty and absent from object_desc");
    require(n_views > 0, ErrorCode::InvariantViolation, "n_views must be positive");
    require(!backgrounds.empty(), ErrorCode::InvariantViolation, "backgrounds list is empty");
    require(!directions.empty(), ErrorCode::InvariantViolation, "directions list is empty");
    require(n_class_images >= 0, ErrorCode::InvariantViolation, "n_class_images must be >= 0");
    require(instance_probability > 0.0 && instance_probability < 1.0, ErrorCode::InvariantViolation,
            "instance_probability must lie in (0, 1)");
    require(train.iters > 0 && train.batch > 0 && train.lr > 0.0 && train.weight_decay >= 0.0,
            ErrorCode::InvariantViolation, "invalid train config");
    require(image_size > 0 && fov_deg > 0.0 && fov_deg < 180.0 && radius_factor > 0.0 &&
                elevation_min_deg <= elevation_max_deg,
            ErrorCode::InvariantViolation, "invalid view sampling config");
}

nlohmann::json to_json(const PersonalizationPlan& plan) {
    nlohmann::json dirs = nlohmann::json::array();
    for (LightDirection d : plan.directions) {
        dirs.push_back(to_string(d));
    }
    return {
        {"object_desc", plan.object_desc},
        {"rare_token", plan.rare_token},
        {"n_views", plan.n_views},
        {"backgrounds", plan.backgrounds},
        {"backgrounds_version", kBackgroundListVersion},
        {"directions", dirs},
        {"class_prompt", plan.class_prompt()},
        {"instance_prompt", plan.instance_prompt()},
        {"n_class_images", plan.n_class_images},
        {"instance_probability", plan.instance_probability},
        {"train",
         {{"iters", plan.train.iters},
          {"batch", plan.train.batch},
          {"lr", plan.train.lr},
          {"weight_decay", plan.train.weight_decay},
          {"scheduler", plan.train.scheduler}}},
        {"image_size", plan.image_size},
        {"fov_deg", plan.fov_deg},
        {"radius_factor", plan.radius_factor},
        {"elevation_min_deg", plan.elevation_min_deg},
        {"elevation_max_deg", plan.elevation_max_deg},
    };
}

PersonalizationPlan plan_from_json(const nlohmann::json& j) {
    require(j.is_object(), ErrorCode::MalformedFile, "plan must be a JSON object");
    PersonalizationPlan plan;
    try {
        auto read = [&](const nlohmann::json& src, const char* key, auto& field) {
            if (src.contains(key)) {
                src.at(key).get_to(field);
            }
        };
        read(j, "object_desc", plan.object_desc);
        read(j, "rare_token", plan.rare_token);
        read(j, "n_views", plan.n_views);
        read(j, "backgrounds", plan.backgrounds);
        read(j, "n_class_images", plan.n_class_images);
        read(j, "instance_probability", plan.instance_probability);
        read(j, "image_size", plan.image_size);
        read(j, "fov_deg", plan.fov_deg);
        read(j, "radius_factor", plan.radius_factor);
        read(j, "elevation_min_deg", plan.elevation_min_deg);
        read(j, "elevation_max_deg", plan.elevation_max_deg);
        if (j.contains("directions")) {
            plan.directions.clear();
            for (const auto& d : j.at("directions")) {
                const auto s = d.get<std::string>();
                require(s == "left" || s == "right", ErrorCode::InvariantViolation, "invalid direction '" + s + "'");
                plan.directions.push_back(light_direction_from_string(s));
            }
        }
        if (j.contains("train")) {
            const auto& t = j.at("train");
            read(t, "iters", plan.train.iters);
            read(t, "batch", plan.train.batch);
            read(t, "lr", plan.train.lr);
            read(t, "weight_decay", plan.train.weight_decay);
            read(t, "scheduler", plan.train.scheduler);
        }
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::MalformedFile, std::string("plan: ") + e.what());
    }
    plan.validate();
    return plan;
}

} // namespace gsr
