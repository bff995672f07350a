#include "gsrelight/personalize/dataset.hpp"

#include "gsrelight/core/error.hpp"
#include "gsrelight/core/image_io.hpp"
#include "gsrelight/render/rasterizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>

namespace gsr {
namespace {

constexpr std::uint64_t kViewStream = 0x71E3;
constexpr std::uint64_t kClassStream = 0xC1A5;

std::string record_id(const char* prefix, int index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s_%04d", prefix, index);
    return buf;
}

RecordSource source_from_string(const std::string& s) {
    if (s == "iclight") {
        return RecordSource::IcLight;
    }
    if (s == "class") {
        return RecordSource::Class;
    }
    fail(ErrorCode::MalformedFile, "unknown record source '" + s + "'");
}

nlohmann::json record_to_json(const ManifestRecord& r) {
    return {{"id", r.id}, {"image", r.image}, {"prompt", r.prompt}, {"source", to_string(r.source)}};
}

ManifestRecord record_from_json(const nlohmann::json& j) {
    return {j.at("id").get<std::string>(), j.at("image").get<std::string>(), j.at("prompt").get<std::string>(),
            source_from_string(j.at("source").get<std::string>())};
}

bool is_bridge_error(ErrorCode code) {
    return code == ErrorCode::Timeout || code == ErrorCode::ProtocolError || code == ErrorCode::ServerError ||
           code == ErrorCode::BridgeFailure || code == ErrorCode::DenoiserFailure;
}

} // namespace

const char* to_string(RecordSource s) noexcept {
    return s == RecordSource::IcLight ? "iclight" : "class";
}

std::pair<Eigen::Vector3d, double> bounding_sphere(const GaussianCloud& cloud) {
    require(!cloud.empty(), ErrorCode::EmptyRange, "object cloud is empty");
    Eigen::Vector3d lo = cloud.means[0].cast<double>();
    Eigen::Vector3d hi = lo;
    for (const auto& m : cloud.means) {
        lo = lo.cwiseMin(m.cast<double>());
        hi = hi.cwiseMax(m.cast<double>());
    }
    const Eigen::Vector3d center = 0.5 * (lo + hi);
    double radius = 0.0;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        radius = std::max(radius, (cloud.means[i].cast<double>() - center).norm() + 3.0 * cloud.scale(i).maxCoeff());
    }
    return {center, std::max(radius, 1e-3)};
}

OrbitView sample_orbit_view(const Eigen::Vector3d& center, double radius, const PersonalizationPlan& plan, Rng& rng) {
    OrbitView view;
    view.azimuth_deg = 360.0 * uniform01(rng);
    view.elevation_deg = plan.elevation_min_deg + (plan.elevation_max_deg - plan.elevation_min_deg) * uniform01(rng);
    const double az = view.azimuth_deg * std::numbers::pi / 180.0;
    const double el = view.elevation_deg * std::numbers::pi / 180.0;
    const Eigen::Vector3d offset(std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el));
    const double distance = plan.radius_factor * radius;
    view.camera = Camera::look_at(center + distance * offset, center, Eigen::Vector3d::UnitZ(),
                                  plan.fov_deg * std::numbers::pi / 180.0, plan.image_size, plan.image_size);
    view.camera.near_clip = std::max(1e-4, 0.01 * distance);
    view.camera.far_clip = 100.0 * distance;
    return view;
}

void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest) {
    std::ofstream out(path, std::ios::trunc);
    require(static_cast<bool>(out), ErrorCode::IoFailure, "cannot write " + path.string());
    out << nlohmann::json{{"version", 1}, {"plan", manifest.plan}, {"rng_seed", manifest.rng_seed}}.dump() << '\n';
    for (const auto& r : manifest.records) {
        out << record_to_json(r).dump() << '\n';
    }
    require(static_cast<bool>(out), ErrorCode::IoFailure, "write failed for " + path.string());
}

DatasetManifest read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    require(static_cast<bool>(in), ErrorCode::IoFailure, "cannot read " + path.string());
    DatasetManifest manifest;
    std::string line;
    try {
        require(static_cast<bool>(std::getline(in, line)), ErrorCode::MalformedFile, "manifest has no header");
        const auto header = nlohmann::json::parse(line);
        manifest.plan = header.at("plan");
        manifest.rng_seed = header.at("rng_seed").get<std::uint64_t>();
        while (std::getline(in, line)) {
            if (!line.empty()) {
                manifest.records.push_back(record_from_json(nlohmann::json::parse(line)));
            }
        }
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::MalformedFile, path.string() + ": " + e.what());
    }
    return manifest;
}

DatasetManifest build_dataset(const GaussianCloud& object, const PersonalizationPlan& plan, std::uint64_t seed,
                              Relighter& relighter, ImageSampler& sampler, const std::filesystem::path& out_dir) {
    plan.validate();
    const auto images_dir = out_dir / "images";
    std::filesystem::create_directories(images_dir);
    const auto partial_path = out_dir / "manifest.partial.jsonl";

    DatasetManifest manifest;
    manifest.plan = to_json(plan);
    manifest.rng_seed = seed;

    // Resume cursor: records of a previous interrupted run with the same plan and seed.
    std::set<std::string> done;
    if (std::filesystem::exists(partial_path)) {
        DatasetManifest previous = read_manifest(partial_path);
        if (previous.plan == manifest.plan && previous.rng_seed == seed) {
            for (auto& r : previous.records) {
                if (std::filesystem::exists(out_dir / r.image)) {
                    done.insert(r.id);
                    manifest.records.push_back(std::move(r));
                }
            }
        }
    }
    auto persist_partial = [&] {
        DatasetManifest partial = manifest;
        std::sort(partial.records.begin(), partial.records.end(),
                  [](const ManifestRecord& a, const ManifestRecord& b) { return a.id < b.id; });
        write_manifest(partial_path, partial);
    };

    const auto [center, radius] = bounding_sphere(object);
    const Eigen::Vector3d white(1.0, 1.0, 1.0);
    try {
        for (int v = 0; v < plan.n_views; ++v) {
            const std::string id = record_id("iclight", v);
            if (done.count(id)) {
                continue;
            }
            Rng rng = make_rng(seed, {kViewStream, static_cast<std::uint64_t>(v)});
            const OrbitView view = sample_orbit_view(center, radius, plan, rng);
            const auto& bg = plan.backgrounds[static_cast<std::size_t>(
                uniform_int(rng, 0, static_cast<std::int64_t>(plan.backgrounds.size()) - 1))];
            const LightDirection dir = plan.directions[static_cast<std::size_t>(
                uniform_int(rng, 0, static_cast<std::int64_t>(plan.directions.size()) - 1))];
            const Image render_rgb = render(object, view.camera, white).rgb;
            const Image relit = relighter.relight(render_rgb, plan.class_prompt(), bg, dir);
            ManifestRecord rec{id, "images/" + id + ".png", plan.instance_prompt(), RecordSource::IcLight};
            write_png(out_dir / rec.image, relit);
            manifest.records.push_back(rec);
        }
        for (int k = 0; k < plan.n_class_images; ++k) {
            const std::string id = record_id("class", k);
            if (done.count(id)) {
                continue;
            }
            const Image img = sampler.sample_image(plan.class_prompt(), plan.image_size, plan.image_size,
                                                   derive_seed(seed, {kClassStream, static_cast<std::uint64_t>(k)}));
            ManifestRecord rec{id, "images/" + id + ".png", plan.class_prompt(), RecordSource::Class};
            write_png(out_dir / rec.image, img);
            manifest.records.push_back(rec);
        }
    } catch (const Error& e) {
        if (!is_bridge_error(e.code())) {
            throw;
        }
        persist_partial();
        throw Error(ErrorCode::BridgeFailure,
                    std::to_string(manifest.records.size()) + " records kept in " + partial_path.string() + ": " +
                        e.what(),
                    e.detail());
    }

    std::sort(manifest.records.begin(), manifest.records.end(),
              [](const ManifestRecord& a, const ManifestRecord& b) { return a.id < b.id; });
    write_manifest(out_dir / "manifest.jsonl", manifest);
    std::filesystem::remove(partial_path);
    return manifest;
}

std::vector<ManifestRecord> sample_training_mix(const DatasetManifest& manifest, std::size_t k, Rng& rng) {
    std::vector<const ManifestRecord*> instance;
    std::vector<const ManifestRecord*> cls;
    for (const auto& r : manifest.records) {
        (r.source == RecordSource::IcLight ? instance : cls).push_back(&r);
    }
    require(!instance.empty(), ErrorCode::MissingSource, "manifest has no relit instance images");
    require(!cls.empty(), ErrorCode::MissingSource, "manifest has no class images");
    const double p = manifest.plan.value("instance_probability", 0.7);

    std::vector<ManifestRecord> out;
    out.reserve(k);
    for (std::size_t n = 0; n < k; ++n) {
        const auto& pool = uniform01(rng) < p ? instance : cls;
        out.push_back(*pool[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(pool.size()) - 1))]);
    }
    return out;
}

nlohmann::json finetune_job(const DatasetManifest& manifest) {
    nlohmann::json records = nlohmann::json::array();
    for (const auto& r : manifest.records) {
        records.push_back(record_to_json(r));
    }
    return {{"train", manifest.plan.at("train")},
            {"instance_prompt", manifest.plan.at("instance_prompt")},
            {"class_prompt", manifest.plan.at("class_prompt")},
            {"instance_probability", manifest.plan.at("instance_probability")},
            {"rng_seed", manifest.rng_seed},
            {"records", records}};
}

} // namespace gsr
