#include "gsrelight/optim/adam.hpp"

#include "gsrelight/core/error.hpp"

#include <cmath>

namespace gsr {

void adam_step(AdamState& state, std::span<double> params, std::span<const double> grad, double lr) {
    require(params.size() == grad.size() && state.m.size() == params.size() && state.v.size() == params.size(),
            ErrorCode::ShapeMismatch, "adam_step: params, grad and moments differ in length");
    ++state.step;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grad[i];
        state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g;
        state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g * g;
        const double m_hat = state.m[i] / bc1;
        const double v_hat = state.v[i] / bc2;
        params[i] -= lr * m_hat / (std::sqrt(v_hat) + state.eps);
    }
}

} // namespace gsr
