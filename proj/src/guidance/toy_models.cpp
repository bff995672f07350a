#include "gsrelight/guidance/toy_models.hpp"

#include "gsrelight/core/error.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace gsr {

Image toy_denoiser_predict(const Image& x_t, int t, const DiffusionSchedule& sched, const ToyCondition& cond) {
    require(cond.s >= 0.0, ErrorCode::InvariantViolation, "toy data spread s must be >= 0");
    const bool broadcast = cond.mu.height() == 1 && cond.mu.width() == 1;
    require(cond.mu.channels() == x_t.channels() &&
                (broadcast || (cond.mu.height() == x_t.height() && cond.mu.width() == x_t.width())),
            ErrorCode::ShapeMismatch, "toy mean does not match the latent shape");
    const double alpha = sched.alpha_at(t);
    const double sigma = sched.sigma_at(t);
    require(sigma > 0.0, ErrorCode::SigmaZero, "sigma_t is zero at t = " + std::to_string(t));

    const double s2 = cond.s * cond.s;
    const double denom = alpha * alpha * s2 + sigma * sigma;
    Image eps(x_t.height(), x_t.width(), x_t.channels());
    for (int y = 0; y < x_t.height(); ++y) {
        for (int x = 0; x < x_t.width(); ++x) {
            for (int c = 0; c < x_t.channels(); ++c) {
                const double mu = broadcast ? cond.mu.at(0, 0, c) : cond.mu.at(y, x, c);
                const double z = x_t.at(y, x, c);
                const double x0 = (alpha * s2 * z + sigma * sigma * mu) / denom;
                eps.at(y, x, c) = (z - alpha * x0) / sigma;
            }
        }
    }
    return eps;
}

ToyDenoiser::ToyDenoiser(DiffusionSchedule sched) : sched_(std::move(sched)) {}

void ToyDenoiser::set_prompt(const std::string& prompt, ToyCondition cond) {
    prompts_[prompt] = std::move(cond);
}

void ToyDenoiser::set_unconditional(ToyCondition cond) {
    unconditional_ = std::move(cond);
}

Image ToyDenoiser::predict_noise(const Image& noisy_latent, int t, const DenoiserCondition& cond,
                                 bool unconditional) {
    ++calls_;
    if (unconditional && unconditional_) {
        return toy_denoiser_predict(noisy_latent, t, sched_, *unconditional_);
    }
    const auto it = prompts_.find(cond.prompt);
    require(it != prompts_.end(), ErrorCode::DenoiserFailure, "toy denoiser has no prompt '" + cond.prompt + "'");
    return toy_denoiser_predict(noisy_latent, t, sched_, it->second);
}

Image ConstantDenoiser::predict_noise(const Image& noisy_latent, int, const DenoiserCondition&, bool) {
    return Image(noisy_latent.height(), noisy_latent.width(), noisy_latent.channels());
}

Image block_average(const Image& image) {
    require(image.height() % 2 == 0 && image.width() % 2 == 0, ErrorCode::OddDimensions,
            "toy codec needs even image dimensions, got " + std::to_string(image.height()) + "x" +
                std::to_string(image.width()));
    Image out(image.height() / 2, image.width() / 2, image.channels());
    for (int y = 0; y < out.height(); ++y) {
        for (int x = 0; x < out.width(); ++x) {
            for (int c = 0; c < out.channels(); ++c) {
                out.at(y, x, c) = 0.25 * (image.at(2 * y, 2 * x, c) + image.at(2 * y, 2 * x + 1, c) +
                                          image.at(2 * y + 1, 2 * x, c) + image.at(2 * y + 1, 2 * x + 1, c));
            }
        }
    }
    return out;
}

Image bilinear_upsample2(const Image& latent) {
    const int h = latent.height();
    const int w = latent.width();
    Image out(2 * h, 2 * w, latent.channels());
    for (int y = 0; y < out.height(); ++y) {
        const double sy = std::clamp((y + 0.5) / 2.0 - 0.5, 0.0, static_cast<double>(h - 1));
        const int y0 = static_cast<int>(std::floor(sy));
        const int y1 = std::min(y0 + 1, h - 1);
        const double fy = sy - y0;
        for (int x = 0; x < out.width(); ++x) {
            const double sx = std::clamp((x + 0.5) / 2.0 - 0.5, 0.0, static_cast<double>(w - 1));
            const int x0 = static_cast<int>(std::floor(sx));
            const int x1 = std::min(x0 + 1, w - 1);
            const double fx = sx - x0;
            for (int c = 0; c < latent.channels(); ++c) {
                const double top = (1.0 - fx) * latent.at(y0, x0, c) + fx * latent.at(y0, x1, c);
                const double bottom = (1.0 - fx) * latent.at(y1, x0, c) + fx * latent.at(y1, x1, c);
                out.at(y, x, c) = (1.0 - fy) * top + fy * bottom;
            }
        }
    }
    return out;
}

Image ToyCodec::encode(const Image& image) {
    return block_average(image);
}

Image ToyCodec::decode(const Image& latent) {
    Image up = bilinear_upsample2(latent);
    const Image residual = latent - block_average(up);
    for (int y = 0; y < up.height(); ++y) {
        for (int x = 0; x < up.width(); ++x) {
            for (int c = 0; c < up.channels(); ++c) {
                up.at(y, x, c) += residual.at(y / 2, x / 2, c);
            }
        }
    }
    return up;
}

} // namespace gsr
