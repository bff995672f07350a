#pragma once

#include "gsrelight/guidance/schedule.hpp"
#include "gsrelight/guidance/services.hpp"

#include <map>
#include <optional>
#include <string>

namespace gsr {

/// Data distribution N(mu, s^2 I). `mu` is latent-shaped or 1 x 1 x C (broadcast).
struct ToyCondition {
    Image mu;
    double s = 0.0;
};

/// Bayes-optimal eps prediction for data ~ N(mu, s^2 I):
///   x0 = (alpha s^2 x_t + sigma^2 mu) / (alpha^2 s^2 + sigma^2)
///   eps = (x_t - alpha x0) / sigma
[[nodiscard]] Image toy_denoiser_predict(const Image& x_t, int t, const DiffusionSchedule& sched,
                                         const ToyCondition& cond);

/// Analytic stand-in for a diffusion model. Each prompt maps to a ToyCondition.
/// Unconditional queries use the condition set by set_unconditional, or the
/// prompt's own condition when none was set. Depth maps are ignored.
class ToyDenoiser : public Denoiser {
public:
    explicit ToyDenoiser(DiffusionSchedule sched);

    void set_prompt(const std::string& prompt, ToyCondition cond);
    void set_unconditional(ToyCondition cond);

    [[nodiscard]] Image predict_noise(const Image& noisy_latent, int t, const DenoiserCondition& cond,
                                      bool unconditional) override;

    [[nodiscard]] const DiffusionSchedule& schedule() const noexcept { return sched_; }
    [[nodiscard]] std::size_t calls() const noexcept { return calls_; }

private:
    DiffusionSchedule sched_;
    std::map<std::string, ToyCondition> prompts_;
    std::optional<ToyCondition> unconditional_;
    std::size_t calls_ = 0;
};

/// Returns zeros for every query. Its predictions do not depend on the input,
/// so every DDS cotangent it produces is exactly zero.
class ConstantDenoiser : public Denoiser {
public:
    [[nodiscard]] Image predict_noise(const Image& noisy_latent, int t, const DenoiserCondition& cond,
                                      bool unconditional) override;
};

/// encode: 2 x 2 block average. decode: bilinear upsample plus a per-block
/// mean correction, so encode(decode(z)) = z and decode(encode(.)) is a
/// projection.
class ToyCodec : public Codec {
public:
    [[nodiscard]] Image encode(const Image& image) override;
    [[nodiscard]] Image decode(const Image& latent) override;
};

[[nodiscard]] Image block_average(const Image& image);
[[nodiscard]] Image bilinear_upsample2(const Image& latent);

} // namespace gsr
