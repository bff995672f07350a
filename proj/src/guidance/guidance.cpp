#include "gsrelight/guidance/guidance.hpp"

#include "gsrelight/core/error.hpp"
#include "gsrelight/core/rng.hpp"

#include <cmath>
#include <string>

namespace gsr {

void DenoiserCondition::validate() const {
    require(!prompt.empty(), ErrorCode::InvariantViolation, "denoiser prompt is empty");
    require(condition_strength >= 0.0 && condition_strength <= 2.0, ErrorCode::InvariantViolation,
            "condition_strength must lie in [0, 2]");
    if (depth) {
        require(depth->channels() == 1, ErrorCode::ShapeMismatch, "depth condition must be single-channel");
        for (double v : depth->data()) {
            require(v >= 0.0 && v <= 1.0, ErrorCode::InvariantViolation, "depth condition outside [0, 1]");
        }
    }
}

const char* to_string(LightDirection d) noexcept {
    return d == LightDirection::Left ? "left" : "right";
}

LightDirection light_direction_from_string(const std::string& s) {
    if (s == "left") {
        return LightDirection::Left;
    }
    if (s == "right") {
        return LightDirection::Right;
    }
    fail(ErrorCode::ProtocolError, "invalid light direction '" + s + "'");
}

TimestepRange TimestepRange::trimmed(int T) {
    const int lo = std::max(1, static_cast<int>(std::ceil(0.02 * T)));
    const int hi = std::min(T, std::max(lo, static_cast<int>(std::floor(0.98 * T))));
    return {lo, hi};
}

GuidanceSample draw_sample(std::uint64_t rng_seed, int height, int width, int channels, TimestepRange range) {
    require(range.lo >= 1 && range.lo <= range.hi, ErrorCode::InvalidT, "empty timestep range");
    Rng rng(rng_seed);
    GuidanceSample sample;
    sample.rng_seed = rng_seed;
    sample.t = static_cast<int>(uniform_int(rng, range.lo, range.hi));
    sample.epsilon = Image(height, width, channels);
    fill_standard_normal(sample.epsilon, rng);
    return sample;
}

Image cfg_combine(const Image& eps_uncond, const Image& eps_cond, double omega) {
    require_same_shape(eps_uncond, eps_cond, "cfg_combine");
    Image out = eps_uncond;
    auto o = out.data();
    auto c = eps_cond.data();
    for (std::size_t i = 0; i < o.size(); ++i) {
        o[i] = (1.0 - omega) * o[i] + omega * c[i];
    }
    return out;
}

namespace {

Image query(Denoiser& denoiser, const Image& z, int t, const DenoiserCondition& cond, bool unconditional) {
    Image eps;
    try {
        eps = denoiser.predict_noise(z, t, cond, unconditional);
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        fail(ErrorCode::DenoiserFailure, e.what());
    }
    require(eps.same_shape(z), ErrorCode::DenoiserFailure, "noise prediction shape differs from the latent");
    for (double v : eps.data()) {
        require(std::isfinite(v), ErrorCode::DenoiserFailure, "noise prediction has non-finite entries");
    }
    return eps;
}

double weight_at(const TimestepWeight& weight, int t) {
    return weight ? weight(t) : 1.0;
}

} // namespace

Image guided_noise(const Image& x, const GuidanceSample& sample, const DiffusionSchedule& sched, Denoiser& denoiser,
                   const DenoiserCondition& cond, double omega) {
    require_same_shape(x, sample.epsilon, "noise sample");
    const Image z = sched.alpha_at(sample.t) * x + sched.sigma_at(sample.t) * sample.epsilon;
    const Image eps_c = query(denoiser, z, sample.t, cond, false);
    const Image eps_u = query(denoiser, z, sample.t, cond, true);
    return cfg_combine(eps_u, eps_c, omega);
}

Image sds_grad(const Image& x, const GuidanceSample& sample, const DiffusionSchedule& sched, Denoiser& denoiser,
               const DenoiserCondition& cond, double omega, const TimestepWeight& weight) {
    const Image eps_hat = guided_noise(x, sample, sched, denoiser, cond, omega);
    return weight_at(weight, sample.t) * (eps_hat - sample.epsilon);
}

Image dds_grad(const Image& x_tgt, const Image& x_init, const GuidanceSample& sample, const DiffusionSchedule& sched,
               Denoiser& denoiser, const DenoiserCondition& cond_tgt, const DenoiserCondition& cond_init, double omega,
               const TimestepWeight& weight) {
    require_same_shape(x_tgt, x_init, "dds_grad branches");
    const Image eps_tgt = guided_noise(x_tgt, sample, sched, denoiser, cond_tgt, omega);
    const Image eps_init = guided_noise(x_init, sample, sched, denoiser, cond_init, omega);
    return weight_at(weight, sample.t) * (eps_tgt - eps_init);
}

Image mask_grad(const Image& grad, const Image& mask) {
    require(mask.height() == grad.height() && mask.width() == grad.width() &&
                (mask.channels() == 1 || mask.channels() == grad.channels()),
            ErrorCode::ShapeMismatch, "mask does not broadcast against the gradient");
    Image out = grad;
    for (int y = 0; y < grad.height(); ++y) {
        for (int x = 0; x < grad.width(); ++x) {
            for (int c = 0; c < grad.channels(); ++c) {
                out.at(y, x, c) *= mask.at(y, x, mask.channels() == 1 ? 0 : c);
            }
        }
    }
    return out;
}

} // namespace gsr
