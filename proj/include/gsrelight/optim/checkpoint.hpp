#pragma once

#include "gsrelight/model/gaussian_cloud.hpp"
#include "gsrelight/optim/adam.hpp"

#include <filesystem>

namespace gsr {

/// Everything needed to continue a 2-step-DDS run at outer iteration `next_outer`.
struct RelightCheckpoint {
    GaussianCloud cloud;
    AdamState adam_color;
    AdamState adam_sh;
    int next_outer = 0;
    long image_step = 0;
    std::uint64_t rng_seed = 0;
};

/// Writes `<dir>/checkpoint.ply` and `<dir>/checkpoint.json` (moments as
/// base64 little-endian float64).
void save_checkpoint(const std::filesystem::path& dir, const RelightCheckpoint& ckpt);
[[nodiscard]] RelightCheckpoint load_checkpoint(const std::filesystem::path& dir);
[[nodiscard]] bool has_checkpoint(const std::filesystem::path& dir);

} // namespace gsr
