#pragma once

#include "gsrelight/guidance/services.hpp"

#include <json.hpp>

#include <atomic>
#include <mutex>
#include <string>

namespace gsr {

struct BridgeEndpoint {
    std::string base_url;  // http://host:port
    double timeout_s = 30.0;
    int max_retries = 2;
    std::string auth_token;
    double backoff_base_s = 0.5;
    double backoff_factor = 2.0;

    void validate() const;
};

struct Capabilities {
    int version = 0;
    int downscale = 1;
    int latent_channels = 3;
    int embed_dim = 0;
    nlohmann::json raw;
};

/// Client for the model service. One op per HTTP POST to /rpc. Transport
/// failures and 5xx replies are retried with exponential backoff; 4xx replies,
/// malformed envelopes and application errors (ok: false) are not.
class BridgeClient : public Denoiser,
                     public Codec,
                     public Embedder,
                     public Relighter,
                     public ImageSampler,
                     public FinetuneService {
public:
    explicit BridgeClient(BridgeEndpoint endpoint);

    /// Sends one op and returns the reply payload.
    [[nodiscard]] nlohmann::json call(const std::string& op, const nlohmann::json& payload);

    [[nodiscard]] Capabilities capabilities();

    [[nodiscard]] Image predict_noise(const Image& noisy_latent, int t, const DenoiserCondition& cond,
                                      bool unconditional) override;
    [[nodiscard]] Image encode(const Image& image) override;
    [[nodiscard]] Image decode(const Image& latent) override;
    [[nodiscard]] std::vector<double> embed_text(const std::string& text) override;
    [[nodiscard]] std::vector<double> embed_image(const Image& image) override;
    [[nodiscard]] Image relight(const Image& image, const std::string& fg_prompt, const std::string& bg_prompt,
                                LightDirection direction) override;
    [[nodiscard]] Image sample_image(const std::string& prompt, int height, int width, std::uint64_t seed) override;
    [[nodiscard]] std::string submit_finetune(const nlohmann::json& job) override;
    [[nodiscard]] FinetuneStatus poll_finetune(const std::string& job_id) override;

    /// HTTP attempts made so far, including retries.
    [[nodiscard]] std::size_t attempts() const noexcept { return attempts_.load(); }
    [[nodiscard]] const BridgeEndpoint& endpoint() const noexcept { return endpoint_; }

private:
    [[nodiscard]] std::string next_request_id();

    BridgeEndpoint endpoint_;
    std::string host_;
    std::string path_prefix_;
    std::atomic<std::size_t> attempts_{0};
    std::mutex id_mutex_;
    std::uint64_t next_id_ = 0;
    std::mutex caps_mutex_;
    std::optional<Capabilities> caps_;
};

} // namespace gsr
