#include "gsrelight/metrics/benchmark.hpp"

#include "gsrelight/core/error.hpp"
#include "gsrelight/core/image_io.hpp"
#include "gsrelight/metrics/metrics.hpp"
#include "gsrelight/model/cloud_io.hpp"
#include "gsrelight/optim/two_step_dds.hpp"
#include "gsrelight/render/camera.hpp"
#include "gsrelight/render/rasterizer.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace gsr {
namespace {

namespace fs = std::filesystem;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double mean_of(const std::vector<double>& v) {
    if (v.empty()) {
        return kNaN;
    }
    double s = 0.0;
    for (double x : v) {
        s += x;
    }
    return s / static_cast<double>(v.size());
}

nlohmann::json read_json(const fs::path& path) {
    std::ifstream in(path);
    require(static_cast<bool>(in), ErrorCode::IoFailure, "cannot open " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::MalformedFile, path.string() + ": " + e.what());
    }
}

nlohmann::json metric_json(double v) {
    if (std::isnan(v)) {
        return nullptr;
    }
    if (std::isinf(v)) {
        return "inf";
    }
    return v;
}

SceneMetrics evaluate_scene(const std::string& scene, const fs::path& scene_dir, const fs::path& out_dir,
                            Embedder* embedder) {
    const fs::path data = scene_dir / "object_scene";
    const auto cameras = load_cameras(data / "cameras.json");
    require(!cameras.empty(), ErrorCode::CameraMismatch, "scene " + scene + " has no cameras");

    std::string prompt;
    if (fs::exists(scene_dir / "meta.json")) {
        const auto meta = read_json(scene_dir / "meta.json");
        prompt = target_prompt(meta.value("object_desc", "object"), meta.value("scene_desc", "scene"));
    }

    std::optional<GaussianCloud> cloud;
    std::vector<std::size_t> object_indices;
    auto rendered_mask = [&](const Camera& cam) {
        if (!cloud) {
            cloud = load_cloud(data / "points.ply");
            const auto r = read_json(data / "object_range.json");
            const IndexRange range{r.at("begin").get<std::size_t>(), r.at("end").get<std::size_t>()};
            require(range.end <= cloud->size(), ErrorCode::MalformedFile, "object_range outside the cloud");
            object_indices = range.indices();
        }
        return render_mask(*cloud, cam, object_indices);
    };

    std::vector<double> psnr;
    std::vector<double> ssim_values;
    std::vector<double> ctis_values;
    std::vector<double> dtis_values;
    for (const auto& [id, cam] : cameras) {
        const fs::path pred_path = out_dir / "images" / (id + ".png");
        require(fs::exists(pred_path), ErrorCode::CameraMismatch,
                "scene " + scene + ": no output image for camera '" + id + "'");
        const Image pred = read_png(pred_path);
        const Image gt = read_png(data / "images" / (id + ".png"));
        require(pred.same_shape(gt) && gt.height() == cam.height && gt.width() == cam.width,
                ErrorCode::CameraMismatch, "scene " + scene + ", camera '" + id + "': image size mismatch");
        const fs::path mask_path = data / "masks" / (id + ".png");
        const Image mask = fs::exists(mask_path) ? read_png(mask_path, 1) : rendered_mask(cam);

        psnr.push_back(psnr_part(pred, gt, mask));
        const BBox box = expand_box(bbox_from_mask(mask), kSsimWindow, gt.height(), gt.width());
        ssim_values.push_back(ssim_part(pred, gt, box));
        if (embedder) {
            const fs::path init_path = out_dir / "initial" / (id + ".png");
            const Image init = fs::exists(init_path) ? read_png(init_path) : gt;
            dtis_values.push_back(dtis(pred, init, *embedder));
            if (!prompt.empty()) {
                ctis_values.push_back(ctis(pred, prompt, *embedder));
            }
        }
    }
    for (const auto& entry : fs::directory_iterator(out_dir / "images")) {
        const std::string stem = entry.path().stem().string();
        require(entry.path().extension() != ".png" || cameras.count(stem), ErrorCode::CameraMismatch,
                "scene " + scene + ": output image '" + stem + "' has no camera");
    }
    return {scene, static_cast<int>(cameras.size()), mean_of(psnr), mean_of(ssim_values), mean_of(ctis_values),
            mean_of(dtis_values)};
}

} // namespace

MetricsReport run_benchmark(const fs::path& dataset_root, const fs::path& outputs, Embedder* embedder) {
    require(fs::is_directory(dataset_root), ErrorCode::IoFailure, "dataset root " + dataset_root.string() + " missing");
    std::vector<std::string> scenes;
    for (const auto& entry : fs::directory_iterator(dataset_root)) {
        if (entry.is_directory()) {
            scenes.push_back(entry.path().filename().string());
        }
    }
    std::sort(scenes.begin(), scenes.end());
    require(!scenes.empty(), ErrorCode::MissingScene, "dataset root has no scenes");

    MetricsReport report;
    for (const auto& scene : scenes) {
        const fs::path scene_dir = dataset_root / scene;
        require(fs::is_directory(scene_dir / "object_scene"), ErrorCode::MissingScene,
                "dataset scene '" + scene + "' has no object_scene directory");
        const fs::path out_dir = outputs / scene;
        require(fs::is_directory(out_dir / "images"), ErrorCode::MissingScene,
                "method outputs lack scene '" + scene + "'");
        report.scenes.push_back(evaluate_scene(scene, scene_dir, out_dir, embedder));
    }

    std::vector<double> p;
    std::vector<double> s;
    std::vector<double> c;
    std::vector<double> d;
    int views = 0;
    for (const auto& row : report.scenes) {
        p.push_back(row.psnr_part);
        s.push_back(row.ssim_part);
        if (!std::isnan(row.ctis)) {
            c.push_back(row.ctis);
        }
        if (!std::isnan(row.dtis)) {
            d.push_back(row.dtis);
        }
        views += row.views;
    }
    report.average = {"average", views, mean_of(p), mean_of(s), mean_of(c), mean_of(d)};
    report.metadata = {{"embedder", embedder ? "provided" : "none"},
                       {"ssim", {{"window", kSsimWindow}, {"sigma", kSsimSigma}, {"c1", 1e-4}, {"c2", 9e-4}}},
                       {"psnr_peak", 1.0},
                       {"mask_threshold", 0.5},
                       {"similarity_map", "(cos+1)/2"},
                       {"reference", {{"ctis", kReferenceCtis}, {"dtis", kReferenceDtis}}}};
    return report;
}

std::string report_csv(const MetricsReport& report) {
    std::ostringstream out;
    out << "scene,views,psnr_part,ssim_part,ctis,dtis\n";
    auto row = [&](const SceneMetrics& m) {
        out << m.scene << ',' << m.views << ',' << format_metric(m.psnr_part) << ',' << format_metric(m.ssim_part)
            << ',' << format_metric(m.ctis) << ',' << format_metric(m.dtis) << '\n';
    };
    for (const auto& m : report.scenes) {
        row(m);
    }
    row(report.average);
    return out.str();
}

nlohmann::json to_json(const MetricsReport& report) {
    auto row = [](const SceneMetrics& m) {
        return nlohmann::json{{"scene", m.scene},
                              {"views", m.views},
                              {"psnr_part", metric_json(m.psnr_part)},
                              {"ssim_part", metric_json(m.ssim_part)},
                              {"ctis", metric_json(m.ctis)},
                              {"dtis", metric_json(m.dtis)}};
    };
    nlohmann::json scenes = nlohmann::json::array();
    for (const auto& m : report.scenes) {
        scenes.push_back(row(m));
    }
    return {{"scenes", scenes}, {"average", row(report.average)}, {"metadata", report.metadata}};
}

void write_report(const fs::path& dir, const MetricsReport& report) {
    fs::create_directories(dir);
    std::ofstream csv(dir / "report.csv");
    require(static_cast<bool>(csv), ErrorCode::IoFailure, "cannot write report.csv");
    csv << report_csv(report);
    std::ofstream json(dir / "report.json");
    require(static_cast<bool>(json), ErrorCode::IoFailure, "cannot write report.json");
    json << to_json(report).dump(2) << '\n';
}

} // namespace gsr
