#pragma once

#include "gsrelight/guidance/schedule.hpp"
#include "gsrelight/guidance/services.hpp"
#include "gsrelight/guidance/toy_models.hpp"

#include <json.hpp>

#include <map>
#include <mutex>
#include <string>
#include <utility>

namespace gsr {

enum class FixtureMode {
    /// predict_noise returns the latent; encode/decode are the identity.
    Echo,
    /// Toy denoiser (prompt-hashed constant means) and the 2x2 toy codec.
    Toy,
    /// Advertises an SD-class codec: downscale 8, 4 latent channels.
    SdLike,
};

[[nodiscard]] FixtureMode fixture_mode_from_string(const std::string& s);

struct FixtureOptions {
    FixtureMode mode = FixtureMode::Toy;
    int embed_dim = 64;
    double toy_spread = 0.0;
    /// The first N requests get an HTTP 503 reply.
    int fail_first = 0;
};

/// Deterministic in-process implementation of every bridge op.
class FixtureBackend {
public:
    explicit FixtureBackend(FixtureOptions options = {});

    /// Returns (HTTP status, reply envelope) for a request envelope.
    [[nodiscard]] std::pair<int, nlohmann::json> handle(const nlohmann::json& request);
    [[nodiscard]] nlohmann::json capabilities() const;
    [[nodiscard]] const FixtureOptions& options() const noexcept { return options_; }

private:
    [[nodiscard]] nlohmann::json dispatch(const std::string& op, const nlohmann::json& payload);

    FixtureOptions options_;
    DiffusionSchedule sched_;
    std::mutex mutex_;
    int requests_ = 0;
    std::map<std::string, std::string> jobs_;  // job id -> model id
};

/// Constant latent mean in [0.2, 0.8]^C derived from a hash of the prompt.
[[nodiscard]] ToyCondition toy_condition_for_prompt(const std::string& prompt, int channels, double spread);

/// Denoiser backed by toy_condition_for_prompt. Unconditional queries get the
/// same prediction as conditional ones, so the guidance scale has no effect.
class HashedToyDenoiser : public Denoiser {
public:
    explicit HashedToyDenoiser(DiffusionSchedule sched, double spread = 0.0);
    [[nodiscard]] Image predict_noise(const Image& noisy_latent, int t, const DenoiserCondition& cond,
                                      bool unconditional) override;

private:
    DiffusionSchedule sched_;
    double spread_;
};

/// Unit vector seeded by a hash of the input.
class HashEmbedder : public Embedder {
public:
    explicit HashEmbedder(int dim = 64) : dim_(dim) {}
    [[nodiscard]] std::vector<double> embed_text(const std::string& text) override;
    [[nodiscard]] std::vector<double> embed_image(const Image& image) override;

private:
    int dim_;
};

/// Multiplies the image by a horizontal ramp, brighter on the lit side.
class RampRelighter : public Relighter {
public:
    [[nodiscard]] Image relight(const Image& image, const std::string& fg_prompt, const std::string& bg_prompt,
                                LightDirection direction) override;
};

/// Smooth two-color gradient seeded by (prompt, seed).
class HashImageSampler : public ImageSampler {
public:
    [[nodiscard]] Image sample_image(const std::string& prompt, int height, int width, std::uint64_t seed) override;
};

/// Completes jobs immediately with ids derived from the job document.
class FixtureFinetune : public FinetuneService {
public:
    [[nodiscard]] std::string submit_finetune(const nlohmann::json& job) override;
    [[nodiscard]] FinetuneStatus poll_finetune(const std::string& job_id) override;

private:
    std::mutex mutex_;
    std::map<std::string, std::string> jobs_;
};

/// Codec for the SdLike fixture: 8 x 8 block means of RGB plus mean luminance.
[[nodiscard]] Image sd_like_encode(const Image& image);
[[nodiscard]] Image sd_like_decode(const Image& latent);

} // namespace gsr
