#include "gsrelight/guidance/schedule.hpp"

#include "gsrelight/core/error.hpp"

#include <cmath>
#include <string>

namespace gsr {

double DiffusionSchedule::alpha_at(int t) const {
    require(t >= 1 && t <= T, ErrorCode::InvalidT, "timestep " + std::to_string(t) + " outside [1, T]");
    return alpha[static_cast<std::size_t>(t - 1)];
}

double DiffusionSchedule::sigma_at(int t) const {
    require(t >= 1 && t <= T, ErrorCode::InvalidT, "timestep " + std::to_string(t) + " outside [1, T]");
    return sigma[static_cast<std::size_t>(t - 1)];
}

DiffusionSchedule make_schedule(int T) {
    require(T >= 2, ErrorCode::InvalidT, "schedule needs T >= 2, got " + std::to_string(T));
    constexpr double beta_start = 0.00085;
    constexpr double beta_end = 0.012;
    const double a = std::sqrt(beta_start);
    const double b = std::sqrt(beta_end);

    DiffusionSchedule sched;
    sched.T = T;
    sched.alpha.resize(T);
    sched.sigma.resize(T);
    double alpha_bar = 1.0;
    for (int i = 0; i < T; ++i) {
        const double r = a + (b - a) * static_cast<double>(i) / static_cast<double>(T - 1);
        const double beta = r * r;
        alpha_bar *= 1.0 - beta;
        sched.alpha[i] = std::sqrt(alpha_bar);
        sched.sigma[i] = std::sqrt(1.0 - alpha_bar);
    }
    return sched;
}

nlohmann::json to_json(const DiffusionSchedule& sched) {
    return {{"T", sched.T}, {"alpha", sched.alpha}, {"sigma", sched.sigma}};
}

} // namespace gsr
