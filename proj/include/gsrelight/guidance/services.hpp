#pragma once

#include "gsrelight/core/image.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace gsr {

struct DenoiserCondition {
    std::string prompt;
    /// Depth map in [0, 1] at image resolution; absent means no depth adapter.
    std::optional<Image> depth;
    double condition_strength = 1.0;
    /// Selects a fine-tuned model on remote backends; empty means the base model.
    std::string model_id;

    void validate() const;
};

/// Forward-only noise predictor eps_hat(z_t; y, t).
class Denoiser {
public:
    virtual ~Denoiser() = default;
    [[nodiscard]] virtual Image predict_noise(const Image& noisy_latent, int t, const DenoiserCondition& cond,
                                              bool unconditional) = 0;
};

/// Image <-> latent mapping.
class Codec {
public:
    virtual ~Codec() = default;
    [[nodiscard]] virtual Image encode(const Image& image) = 0;
    [[nodiscard]] virtual Image decode(const Image& latent) = 0;
};

class Embedder {
public:
    virtual ~Embedder() = default;
    /// Unit-norm embedding vectors.
    [[nodiscard]] virtual std::vector<double> embed_text(const std::string& text) = 0;
    [[nodiscard]] virtual std::vector<double> embed_image(const Image& image) = 0;
};

enum class LightDirection { Left, Right };

[[nodiscard]] const char* to_string(LightDirection d) noexcept;
[[nodiscard]] LightDirection light_direction_from_string(const std::string& s);

class Relighter {
public:
    virtual ~Relighter() = default;
    [[nodiscard]] virtual Image relight(const Image& image, const std::string& fg_prompt, const std::string& bg_prompt,
                                        LightDirection direction) = 0;
};

/// Prompt-conditioned image sampler, used for class-preservation images.
class ImageSampler {
public:
    virtual ~ImageSampler() = default;
    [[nodiscard]] virtual Image sample_image(const std::string& prompt, int height, int width, std::uint64_t seed) = 0;
};

struct FinetuneStatus {
    std::string status;  // "queued" | "running" | "completed" | "failed"
    std::string model_id;
};

class FinetuneService {
public:
    virtual ~FinetuneService() = default;
    [[nodiscard]] virtual std::string submit_finetune(const nlohmann::json& job) = 0;
    [[nodiscard]] virtual FinetuneStatus poll_finetune(const std::string& job_id) = 0;
};

} // namespace gsr
