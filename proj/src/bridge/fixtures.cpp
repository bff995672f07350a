#include "gsrelight/bridge/fixtures.hpp"

#include "gsrelight/bridge/protocol.hpp"
#include "gsrelight/core/error.hpp"
#include "gsrelight/core/rng.hpp"

#include <cmath>
#include <cstdio>

namespace gsr {
namespace {

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::uint64_t hash_string(const std::string& s, std::uint64_t h = 14695981039346656037ull) {
    return fnv1a(s.data(), s.size(), h);
}

std::uint64_t hash_image(const Image& image) {
    std::uint64_t h = 14695981039346656037ull;
    for (double v : image.data()) {
        const float f = static_cast<float>(v);
        h = fnv1a(&f, sizeof f, h);
    }
    return h;
}

std::vector<double> unit_vector(std::uint64_t seed, int dim) {
    Rng rng(seed);
    std::vector<double> v(static_cast<std::size_t>(dim));
    double norm = 0.0;
    for (double& x : v) {
        x = standard_normal(rng);
        norm += x * x;
    }
    norm = std::sqrt(norm);
    for (double& x : v) {
        x /= norm;
    }
    return v;
}

std::string finetune_job_id(const nlohmann::json& job) {
    const auto records = job.find("records");
    if (records == job.end() || !records->is_array() || records->empty()) {
        throw Error(ErrorCode::ServerError, "invalid_dataset: fine-tune manifest has no records", "invalid_dataset");
    }
    return "ft-" + hex64(hash_string(job.dump()));
}

std::string model_id_for(const std::string& job_id) {
    return "model-" + hex64(hash_string(job_id));
}

} // namespace

FixtureMode fixture_mode_from_string(const std::string& s) {
    if (s == "echo") {
        return FixtureMode::Echo;
    }
    if (s == "toy") {
        return FixtureMode::Toy;
    }
    if (s == "sd") {
        return FixtureMode::SdLike;
    }
    fail(ErrorCode::Usage, "unknown fixture mode '" + s + "' (echo, toy, sd)");
}

ToyCondition toy_condition_for_prompt(const std::string& prompt, int channels, double spread) {
    Rng rng(hash_string(prompt));
    ToyCondition cond;
    cond.mu = Image(1, 1, channels);
    for (int c = 0; c < channels; ++c) {
        cond.mu.at(0, 0, c) = 0.2 + 0.6 * uniform01(rng);
    }
    cond.s = spread;
    return cond;
}

HashedToyDenoiser::HashedToyDenoiser(DiffusionSchedule sched, double spread)
    : sched_(std::move(sched)), spread_(spread) {}

Image HashedToyDenoiser::predict_noise(const Image& noisy_latent, int t, const DenoiserCondition& cond, bool) {
    return toy_denoiser_predict(noisy_latent, t, sched_,
                                toy_condition_for_prompt(cond.prompt, noisy_latent.channels(), spread_));
}

std::vector<double> HashEmbedder::embed_text(const std::string& text) {
    return unit_vector(hash_string(text, hash_string("text")), dim_);
}

std::vector<double> HashEmbedder::embed_image(const Image& image) {
    return unit_vector(hash_image(image), dim_);
}

Image RampRelighter::relight(const Image& image, const std::string&, const std::string&, LightDirection direction) {
    Image out = image;
    const int w = image.width();
    for (int y = 0; y < image.height(); ++y) {
        for (int x = 0; x < w; ++x) {
            const double u = w > 1 ? static_cast<double>(x) / (w - 1) : 0.5;
            const double gain = direction == LightDirection::Left ? 1.0 - 0.5 * u : 0.5 + 0.5 * u;
            for (int c = 0; c < image.channels(); ++c) {
                out.at(y, x, c) *= gain;
            }
        }
    }
    return out;
}

Image HashImageSampler::sample_image(const std::string& prompt, int height, int width, std::uint64_t seed) {
    require(height > 0 && width > 0, ErrorCode::InvariantViolation, "sample_image needs a positive size");
    Rng rng(derive_seed(hash_string(prompt), {seed}));
    double a[3];
    double b[3];
    for (int c = 0; c < 3; ++c) {
        a[c] = uniform01(rng);
        b[c] = uniform01(rng);
    }
    Image out(height, width, 3);
    for (int y = 0; y < height; ++y) {
        const double v = height > 1 ? static_cast<double>(y) / (height - 1) : 0.0;
        for (int x = 0; x < width; ++x) {
            for (int c = 0; c < 3; ++c) {
                out.at(y, x, c) = (1.0 - v) * a[c] + v * b[c];
            }
        }
    }
    return out;
}

std::string FixtureFinetune::submit_finetune(const nlohmann::json& job) {
    const std::string id = finetune_job_id(job);
    std::lock_guard lock(mutex_);
    jobs_[id] = model_id_for(id);
    return id;
}

FinetuneStatus FixtureFinetune::poll_finetune(const std::string& job_id) {
    std::lock_guard lock(mutex_);
    const auto it = jobs_.find(job_id);
    if (it == jobs_.end()) {
        throw Error(ErrorCode::UnknownJob, "no fine-tune job '" + job_id + "'", "unknown_job");
    }
    return {"completed", it->second};
}

Image sd_like_encode(const Image& image) {
    require(image.height() % 8 == 0 && image.width() % 8 == 0 && image.channels() == 3, ErrorCode::ShapeMismatch,
            "sd-like codec needs H, W multiples of 8 and RGB input");
    Image latent(image.height() / 8, image.width() / 8, 4);
    for (int y = 0; y < latent.height(); ++y) {
        for (int x = 0; x < latent.width(); ++x) {
            double acc[3] = {0.0, 0.0, 0.0};
            for (int dy = 0; dy < 8; ++dy) {
                for (int dx = 0; dx < 8; ++dx) {
                    for (int c = 0; c < 3; ++c) {
                        acc[c] += image.at(8 * y + dy, 8 * x + dx, c);
                    }
                }
            }
            for (int c = 0; c < 3; ++c) {
                latent.at(y, x, c) = acc[c] / 64.0;
            }
            latent.at(y, x, 3) = (acc[0] + acc[1] + acc[2]) / 192.0;
        }
    }
    return latent;
}

Image sd_like_decode(const Image& latent) {
    require(latent.channels() == 4, ErrorCode::ShapeMismatch, "sd-like latent needs 4 channels");
    Image image(latent.height() * 8, latent.width() * 8, 3);
    for (int y = 0; y < image.height(); ++y) {
        for (int x = 0; x < image.width(); ++x) {
            for (int c = 0; c < 3; ++c) {
                image.at(y, x, c) = latent.at(y / 8, x / 8, c);
            }
        }
    }
    return image;
}

FixtureBackend::FixtureBackend(FixtureOptions options) : options_(options), sched_(make_schedule(1000)) {}

nlohmann::json FixtureBackend::capabilities() const {
    int downscale = 2;
    int channels = 3;
    if (options_.mode == FixtureMode::Echo) {
        downscale = 1;
    } else if (options_.mode == FixtureMode::SdLike) {
        downscale = 8;
        channels = 4;
    }
    const char* mode = options_.mode == FixtureMode::Echo ? "echo" : options_.mode == FixtureMode::Toy ? "toy" : "sd";
    return {{"version", kProtocolVersion},
            {"downscale", downscale},
            {"latent_channels", channels},
            {"embed_dim", options_.embed_dim},
            {"fixture", mode},
            {"embedder", "hash-unit-vector"},
            {"timesteps", sched_.T}};
}

std::pair<int, nlohmann::json> FixtureBackend::handle(const nlohmann::json& request) {
    std::string request_id;
    if (request.is_object() && request.contains("request_id") && request.at("request_id").is_string()) {
        request_id = request.at("request_id").get<std::string>();
    }
    {
        std::lock_guard lock(mutex_);
        if (requests_++ < options_.fail_first) {
            return {503, make_error_reply(request_id, "overloaded", "fixture configured to fail this request")};
        }
    }
    if (request_id.empty() || !request.contains("op") || !request.at("op").is_string() ||
        !request.contains("payload") || !request.at("payload").is_object()) {
        return {400, make_error_reply(request_id, "bad_request", "envelope needs op, request_id and payload")};
    }
    try {
        return {200, make_ok_reply(request_id, dispatch(request.at("op").get<std::string>(), request.at("payload")))};
    } catch (const Error& e) {
        switch (e.code()) {
        case ErrorCode::ServerError:
        case ErrorCode::UnknownJob:
            return {200, make_error_reply(request_id, e.detail(), e.what())};
        default:
            return {400, make_error_reply(request_id, "bad_request", e.what())};
        }
    } catch (const nlohmann::json::exception& e) {
        return {400, make_error_reply(request_id, "bad_request", e.what())};
    }
}

nlohmann::json FixtureBackend::dispatch(const std::string& op, const nlohmann::json& p) {
    if (op == "capabilities") {
        return capabilities();
    }
    if (op == "predict_noise") {
        const Image latent = decode_array(p.at("latent"));
        const int t = p.at("t").get<int>();
        require(t >= 1 && t <= sched_.T, ErrorCode::ProtocolError, "t outside [1, T]");
        if (p.contains("depth")) {
            const Image depth = decode_array(p.at("depth"));
            require(depth.channels() == 1, ErrorCode::ProtocolError, "depth must be single-channel");
        }
        if (options_.mode == FixtureMode::Echo) {
            return {{"epsilon", encode_array(latent)}};
        }
        HashedToyDenoiser denoiser(sched_, options_.toy_spread);
        DenoiserCondition cond{p.at("prompt").get<std::string>(), std::nullopt, 1.0, {}};
        return {{"epsilon", encode_array(denoiser.predict_noise(latent, t, cond, p.value("unconditional", false)))}};
    }
    if (op == "encode") {
        const Image image = decode_array(p.at("image"));
        switch (options_.mode) {
        case FixtureMode::Echo: return {{"latent", encode_array(image)}};
        case FixtureMode::Toy: return {{"latent", encode_array(ToyCodec().encode(image))}};
        case FixtureMode::SdLike: return {{"latent", encode_array(sd_like_encode(image))}};
        }
    }
    if (op == "decode") {
        const Image latent = decode_array(p.at("latent"));
        switch (options_.mode) {
        case FixtureMode::Echo: return {{"image", encode_array(latent)}};
        case FixtureMode::Toy: return {{"image", encode_array(ToyCodec().decode(latent))}};
        case FixtureMode::SdLike: return {{"image", encode_array(sd_like_decode(latent))}};
        }
    }
    if (op == "embed") {
        HashEmbedder embedder(options_.embed_dim);
        if (p.contains("text")) {
            return {{"embedding", encode_vector(embedder.embed_text(p.at("text").get<std::string>()))}};
        }
        return {{"embedding", encode_vector(embedder.embed_image(decode_array(p.at("image"))))}};
    }
    if (op == "relight") {
        const LightDirection dir = light_direction_from_string(p.at("direction").get<std::string>());
        RampRelighter relighter;
        return {{"image", encode_array(relighter.relight(decode_array(p.at("image")), p.value("fg_prompt", ""),
                                                         p.value("bg_prompt", ""), dir))}};
    }
    if (op == "sample_image") {
        HashImageSampler sampler;
        return {{"image", encode_array(sampler.sample_image(p.at("prompt").get<std::string>(),
                                                            p.at("height").get<int>(), p.at("width").get<int>(),
                                                            p.at("seed").get<std::uint64_t>()))}};
    }
    if (op == "finetune_submit") {
        const std::string id = finetune_job_id(p);
        std::lock_guard lock(mutex_);
        jobs_[id] = model_id_for(id);
        return {{"job_id", id}};
    }
    if (op == "finetune_poll") {
        const std::string id = p.at("job_id").get<std::string>();
        std::lock_guard lock(mutex_);
        const auto it = jobs_.find(id);
        if (it == jobs_.end()) {
            throw Error(ErrorCode::UnknownJob, "no fine-tune job '" + id + "'", "unknown_job");
        }
        return {{"status", "completed"}, {"model_id", it->second}};
    }
    fail(ErrorCode::ProtocolError, "unknown op '" + op + "'");
}

} // namespace gsr
