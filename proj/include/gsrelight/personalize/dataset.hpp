#pragma once

#include "gsrelight/core/rng.hpp"
#include "gsrelight/guidance/services.hpp"
#include "gsrelight/model/gaussian_cloud.hpp"
#include "gsrelight/personalize/plan.hpp"
#include "gsrelight/render/camera.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace gsr {

enum class RecordSource { IcLight, Class };

[[nodiscard]] const char* to_string(RecordSource s) noexcept;

struct ManifestRecord {
    std::string id;
    std::string image;  // relative to the manifest directory
    std::string prompt;
    RecordSource source = RecordSource::IcLight;

    bool operator==(const ManifestRecord&) const = default;
};

struct DatasetManifest {
    nlohmann::json plan;
    std::uint64_t rng_seed = 0;
    std::vector<ManifestRecord> records;  // sorted by id
};

struct OrbitView {
    Camera camera;
    double azimuth_deg = 0.0;
    double elevation_deg = 0.0;
};

/// Center and radius of a sphere enclosing all Gaussian means.
[[nodiscard]] std::pair<Eigen::Vector3d, double> bounding_sphere(const GaussianCloud& cloud);

/// Azimuth uniform in [0, 360), elevation uniform in the plan's range, distance
/// radius_factor * radius, z up.
[[nodiscard]] OrbitView sample_orbit_view(const Eigen::Vector3d& center, double radius,
                                          const PersonalizationPlan& plan, Rng& rng);

/// Renders n_views object images on white, relights each with a random
/// background prompt and direction, draws n_class_images class samples and
/// writes images/ + manifest.jsonl under `out_dir`. Bridge errors leave the
/// finished images and a partial manifest behind and raise BridgeFailure; a
/// rerun with the same seed skips completed records.
[[nodiscard]] DatasetManifest build_dataset(const GaussianCloud& object, const PersonalizationPlan& plan,
                                            std::uint64_t seed, Relighter& relighter, ImageSampler& sampler,
                                            const std::filesystem::path& out_dir);

void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);
[[nodiscard]] DatasetManifest read_manifest(const std::filesystem::path& path);

/// k i.i.d. draws: an instance record with the plan's instance_probability,
/// otherwise a class record, uniform within the source.
[[nodiscard]] std::vector<ManifestRecord> sample_training_mix(const DatasetManifest& manifest, std::size_t k,
                                                              Rng& rng);

/// Fine-tune job document: train config, prompts, mixing probability, records.
[[nodiscard]] nlohmann::json finetune_job(const DatasetManifest& manifest);

} // namespace gsr
