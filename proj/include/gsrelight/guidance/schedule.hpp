#pragma once

#include <json.hpp>

#include <vector>

namespace gsr {

/// Forward noising z_t = alpha_t x + sigma_t eps for t in [1, T].
struct DiffusionSchedule {
    int T = 0;
    std::vector<double> alpha;  // alpha[t - 1]
    std::vector<double> sigma;

    [[nodiscard]] double alpha_at(int t) const;
    [[nodiscard]] double sigma_at(int t) const;
};

/// Scaled-linear betas from 0.00085 to 0.012 (linear in sqrt(beta)).
[[nodiscard]] DiffusionSchedule make_schedule(int T = 1000);

[[nodiscard]] nlohmann::json to_json(const DiffusionSchedule& sched);

} // namespace gsr
