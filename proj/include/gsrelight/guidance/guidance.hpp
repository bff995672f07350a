#pragma once

#include "gsrelight/core/image.hpp"
#include "gsrelight/guidance/schedule.hpp"
#include "gsrelight/guidance/services.hpp"

#include <cstdint>
#include <functional>

namespace gsr {

/// Closed interval of timesteps a sample may draw from.
struct TimestepRange {
    int lo = 1;
    int hi = 1;

    /// [ceil(0.02 T), floor(0.98 T)], clipped to [1, T].
    [[nodiscard]] static TimestepRange trimmed(int T);
    [[nodiscard]] static TimestepRange full(int T) { return {1, T}; }
};

struct GuidanceSample {
    int t = 1;
    Image epsilon;
    std::uint64_t rng_seed = 0;
};

/// Draws t ~ U[range] and eps ~ N(0, I) of the given shape from `rng_seed` alone.
[[nodiscard]] GuidanceSample draw_sample(std::uint64_t rng_seed, int height, int width, int channels,
                                         TimestepRange range);

/// Per-timestep weight w(t) of the distillation gradients.
using TimestepWeight = std::function<double(int)>;

/// eps_u + omega (eps_c - eps_u)
[[nodiscard]] Image cfg_combine(const Image& eps_uncond, const Image& eps_cond, double omega);

/// CFG noise estimate at z = alpha_t x + sigma_t eps.
[[nodiscard]] Image guided_noise(const Image& x, const GuidanceSample& sample, const DiffusionSchedule& sched,
                                 Denoiser& denoiser, const DenoiserCondition& cond, double omega);

/// w(t) (eps_hat^omega - eps); w = 1 when `weight` is empty.
[[nodiscard]] Image sds_grad(const Image& x, const GuidanceSample& sample, const DiffusionSchedule& sched,
                             Denoiser& denoiser, const DenoiserCondition& cond, double omega,
                             const TimestepWeight& weight = {});

/// w(t) (eps_hat^omega(z_tgt; y_tgt) - eps_hat^omega(z_init; y_init)) with both
/// branches noised by the same (t, eps).
[[nodiscard]] Image dds_grad(const Image& x_tgt, const Image& x_init, const GuidanceSample& sample,
                             const DiffusionSchedule& sched, Denoiser& denoiser, const DenoiserCondition& cond_tgt,
                             const DenoiserCondition& cond_init, double omega, const TimestepWeight& weight = {});

/// grad * mask, with an H x W x 1 mask broadcast over channels.
[[nodiscard]] Image mask_grad(const Image& grad, const Image& mask);

} // namespace gsr
