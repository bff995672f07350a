#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace gsr {

struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    std::int64_t step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    AdamState() = default;
    explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}

    bool operator==(const AdamState&) const = default;
};

/// One bias-corrected Adam update of `params` in place. Throws ShapeMismatch
/// when params, grad and moments differ in length.
void adam_step(AdamState& state, std::span<double> params, std::span<const double> grad, double lr);

} // namespace gsr
