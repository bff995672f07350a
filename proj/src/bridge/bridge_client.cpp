#include "gsrelight/bridge/bridge_client.hpp"

#include "gsrelight/bridge/protocol.hpp"
#include "gsrelight/core/error.hpp"

#include <httplib.h>

#include <chrono>
#include <cmath>
#include <thread>

namespace gsr {
namespace {

std::pair<time_t, time_t> split_seconds(double s) {
    const auto sec = static_cast<time_t>(std::floor(s));
    const auto usec = static_cast<time_t>(std::llround((s - static_cast<double>(sec)) * 1e6));
    return {sec, usec};
}

Error server_error(const BridgeReply& reply) {
    if (reply.error_code == "unknown_job") {
        return Error(ErrorCode::UnknownJob, reply.error_message, reply.error_code);
    }
    if (reply.error_code == "bad_request") {
        return Error(ErrorCode::ProtocolError, reply.error_message, reply.error_code);
    }
    return Error(ErrorCode::ServerError, reply.error_code + ": " + reply.error_message, reply.error_code);
}

} // namespace

void BridgeEndpoint::validate() const {
    require(timeout_s > 0.0, ErrorCode::InvariantViolation, "bridge timeout must be positive");
    require(max_retries >= 0, ErrorCode::InvariantViolation, "bridge retries must be >= 0");
    require(backoff_base_s >= 0.0 && backoff_factor >= 1.0, ErrorCode::InvariantViolation, "invalid backoff");
    require(base_url.rfind("http://", 0) == 0, ErrorCode::Usage, "bridge URL must start with http://");
}

BridgeClient::BridgeClient(BridgeEndpoint endpoint) : endpoint_(std::move(endpoint)) {
    endpoint_.validate();
    const std::string rest = endpoint_.base_url.substr(7);
    const auto slash = rest.find('/');
    host_ = "http://" + rest.substr(0, slash);
    if (slash != std::string::npos) {
        path_prefix_ = rest.substr(slash);
        while (!path_prefix_.empty() && path_prefix_.back() == '/') {
            path_prefix_.pop_back();
        }
    }
}

std::string BridgeClient::next_request_id() {
    std::lock_guard lock(id_mutex_);
    return "req-" + std::to_string(next_id_++);
}

nlohmann::json BridgeClient::call(const std::string& op, const nlohmann::json& payload) {
    const std::string request_id = next_request_id();
    const std::string body = make_request(op, request_id, payload).dump();
    const auto [tsec, tusec] = split_seconds(endpoint_.timeout_s);

    double backoff = endpoint_.backoff_base_s;
    std::string last_failure;
    ErrorCode last_code = ErrorCode::Timeout;
    std::string last_detail;
    for (int attempt = 0; attempt <= endpoint_.max_retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(std::chrono::duration<double>(backoff));
            backoff *= endpoint_.backoff_factor;
        }
        ++attempts_;
        httplib::Client cli(host_);
        cli.set_connection_timeout(tsec, tusec);
        cli.set_read_timeout(tsec, tusec);
        cli.set_write_timeout(tsec, tusec);
        if (!endpoint_.auth_token.empty()) {
            cli.set_bearer_token_auth(endpoint_.auth_token);
        }
        const auto res = cli.Post(path_prefix_ + "/rpc", body, "application/json");
        if (!res) {
            last_code = ErrorCode::Timeout;
            last_detail.clear();
            last_failure = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status >= 500) {
            last_code = ErrorCode::ServerError;
            last_detail = "http_" + std::to_string(res->status);
            last_failure = "HTTP " + std::to_string(res->status);
            try {
                const BridgeReply reply = parse_reply(res->body);
                if (!reply.ok) {
                    last_detail = reply.error_code;
                    last_failure += " " + reply.error_code + ": " + reply.error_message;
                }
            } catch (const Error&) {
            }
            continue;
        }
        if (res->status != 200) {
            std::string detail = "http_" + std::to_string(res->status);
            try {
                const BridgeReply reply = parse_reply(res->body);
                if (!reply.ok) {
                    detail = reply.error_code;
                }
            } catch (const Error&) {
            }
            throw Error(ErrorCode::ProtocolError, op + ": HTTP " + std::to_string(res->status) + " (" + detail + ")",
                        detail);
        }
        const BridgeReply reply = parse_reply(res->body);
        require(reply.request_id == request_id, ErrorCode::ProtocolError,
                op + ": reply request_id '" + reply.request_id + "' does not match '" + request_id + "'");
        if (!reply.ok) {
            throw server_error(reply);
        }
        return reply.payload;
    }
    throw Error(last_code,
                op + ": giving up after " + std::to_string(endpoint_.max_retries + 1) + " attempts (" + last_failure +
                    ")",
                last_detail);
}

Capabilities BridgeClient::capabilities() {
    std::lock_guard lock(caps_mutex_);
    if (caps_) {
        return *caps_;
    }
    const nlohmann::json p = call("capabilities", nlohmann::json::object());
    Capabilities caps;
    try {
        caps.version = p.at("version").get<int>();
        caps.downscale = p.at("downscale").get<int>();
        caps.latent_channels = p.at("latent_channels").get<int>();
        caps.embed_dim = p.at("embed_dim").get<int>();
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::ProtocolError, std::string("capabilities: ") + e.what());
    }
    require(caps.version == kProtocolVersion, ErrorCode::ProtocolError,
            "server speaks protocol version " + std::to_string(caps.version));
    require(caps.downscale > 0 && caps.latent_channels > 0 && caps.embed_dim >= 0, ErrorCode::ProtocolError,
            "capabilities carry invalid sizes");
    caps.raw = p;
    caps_ = caps;
    return caps;
}

Image BridgeClient::predict_noise(const Image& noisy_latent, int t, const DenoiserCondition& cond,
                                  bool unconditional) {
    nlohmann::json payload = {{"latent", encode_array(noisy_latent)},
                              {"t", t},
                              {"prompt", cond.prompt},
                              {"unconditional", unconditional},
                              {"condition_strength", cond.condition_strength}};
    if (cond.depth) {
        payload["depth"] = encode_array(*cond.depth);
    }
    if (!cond.model_id.empty()) {
        payload["model_id"] = cond.model_id;
    }
    const Image eps = decode_array(call("predict_noise", payload).at("epsilon"));
    require(eps.same_shape(noisy_latent), ErrorCode::ProtocolError, "predict_noise: epsilon shape differs from latent");
    return eps;
}

Image BridgeClient::encode(const Image& image) {
    const Capabilities caps = capabilities();
    require(image.height() % caps.downscale == 0 && image.width() % caps.downscale == 0, ErrorCode::ShapeMismatch,
            "image size is not a multiple of the codec downscale " + std::to_string(caps.downscale));
    const Image latent = decode_array(call("encode", {{"image", encode_array(image)}}).at("latent"));
    require(latent.height() == image.height() / caps.downscale && latent.width() == image.width() / caps.downscale &&
                latent.channels() == caps.latent_channels,
            ErrorCode::ProtocolError, "encode: latent shape disagrees with capabilities");
    return latent;
}

Image BridgeClient::decode(const Image& latent) {
    const Capabilities caps = capabilities();
    require(latent.channels() == caps.latent_channels, ErrorCode::ShapeMismatch,
            "latent has " + std::to_string(latent.channels()) + " channels, codec expects " +
                std::to_string(caps.latent_channels));
    const Image image = decode_array(call("decode", {{"latent", encode_array(latent)}}).at("image"));
    require(image.height() == latent.height() * caps.downscale && image.width() == latent.width() * caps.downscale &&
                image.channels() == 3,
            ErrorCode::ProtocolError, "decode: image shape disagrees with capabilities");
    return image;
}

std::vector<double> BridgeClient::embed_text(const std::string& text) {
    return decode_vector(call("embed", {{"text", text}}).at("embedding"));
}

std::vector<double> BridgeClient::embed_image(const Image& image) {
    return decode_vector(call("embed", {{"image", encode_array(image)}}).at("embedding"));
}

Image BridgeClient::relight(const Image& image, const std::string& fg_prompt, const std::string& bg_prompt,
                            LightDirection direction) {
    const Image out = decode_array(call("relight", {{"image", encode_array(image)},
                                                    {"fg_prompt", fg_prompt},
                                                    {"bg_prompt", bg_prompt},
                                                    {"direction", to_string(direction)}})
                                       .at("image"));
    require(out.same_shape(image), ErrorCode::ProtocolError, "relight: output shape differs from input");
    return out;
}

Image BridgeClient::sample_image(const std::string& prompt, int height, int width, std::uint64_t seed) {
    const Image out = decode_array(
        call("sample_image", {{"prompt", prompt}, {"height", height}, {"width", width}, {"seed", seed}}).at("image"));
    require(out.height() == height && out.width() == width && out.channels() == 3, ErrorCode::ProtocolError,
            "sample_image: wrong output shape");
    return out;
}

std::string BridgeClient::submit_finetune(const nlohmann::json& job) {
    const auto p = call("finetune_submit", job);
    require(p.contains("job_id") && p.at("job_id").is_string(), ErrorCode::ProtocolError, "finetune_submit: no job_id");
    return p.at("job_id").get<std::string>();
}

FinetuneStatus BridgeClient::poll_finetune(const std::string& job_id) {
    const auto p = call("finetune_poll", {{"job_id", job_id}});
    require(p.contains("status") && p.at("status").is_string(), ErrorCode::ProtocolError, "finetune_poll: no status");
    return {p.at("status").get<std::string>(), p.value("model_id", "")};
}

} // namespace gsr
