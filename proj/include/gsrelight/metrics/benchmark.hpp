#pragma once

#include "gsrelight/guidance/services.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace gsr {

struct SceneMetrics {
    std::string scene;
    int views = 0;
    double psnr_part = 0.0;
    double ssim_part = 0.0;
    double ctis = 0.0;  // NaN without an embedder or prompt
    double dtis = 0.0;
};

struct MetricsReport {
    std::vector<SceneMetrics> scenes;  // sorted by scene name
    SceneMetrics average;
    nlohmann::json metadata;
};

/// Dataset layout: <root>/<scene>/object_scene/{images,masks}/<id>.png plus
/// cameras.json; optional <root>/<scene>/meta.json {object_desc, scene_desc}.
/// Method outputs: <outputs>/<scene>/images/<id>.png, optionally
/// <outputs>/<scene>/initial/<id>.png as the DTIS reference (ground truth
/// otherwise). Masks missing from the dataset are rendered from
/// object_scene/points.ply and object_scene/object_range.json.
[[nodiscard]] MetricsReport run_benchmark(const std::filesystem::path& dataset_root,
                                          const std::filesystem::path& outputs, Embedder* embedder = nullptr);

/// scene,views,psnr_part,ssim_part,ctis,dtis with a trailing "average" row.
[[nodiscard]] std::string report_csv(const MetricsReport& report);
[[nodiscard]] nlohmann::json to_json(const MetricsReport& report);
void write_report(const std::filesystem::path& dir, const MetricsReport& report);

} // namespace gsr
