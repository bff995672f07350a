#pragma once

#include "gsrelight/guidance/services.hpp"
#include "gsrelight/model/gaussian_cloud.hpp"
#include "gsrelight/optim/checkpoint.hpp"
#include "gsrelight/optim/config.hpp"

#include <atomic>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace gsr {

/// "a <object_desc> in a <scene_desc>"
[[nodiscard]] std::string target_prompt(const std::string& object_desc, const std::string& scene_desc);
/// "a <scene_desc>"
[[nodiscard]] std::string init_prompt(const std::string& scene_desc);

struct RelightJob {
    GaussianCloud cloud;
    IndexRange object_range;
    std::string prompt_tgt;
    std::string prompt_init;
    OptimizationConfig config;
    Denoiser* denoiser = nullptr;
    Codec* codec = nullptr;

    void validate() const;
};

/// One row of the metrics log.
struct OuterLog {
    int outer_iter = 0;
    double dds_grad_norm = 0.0;  // mean over the latent steps
    double l1_loss = 0.0;        // masked L1 after the last image step
    double lr = 0.0;             // color lr at the last image step
    long image_step = 0;         // image steps completed so far
    int active_degree = 0;
};

struct RelightHooks {
    /// Destination of metrics.csv, checkpoints and previews. Empty: no files.
    std::filesystem::path run_dir;
    std::function<void(const OuterLog&, const GaussianCloud&)> on_outer;
    /// Called after every image step with the masked L1 loss before the update.
    std::function<void(int outer, int inner, double loss)> on_image_step;
    /// Polled after each outer iteration; when set the run checkpoints and throws Interrupted.
    const std::atomic<bool>* stop = nullptr;
    /// Same as `stop` but triggered once this many outer iterations are complete.
    std::optional<int> stop_after_outer;
};

struct RelightResult {
    GaussianCloud cloud;
    std::vector<OuterLog> log;
};

/// Alternates latent-space DDS descent with Adam fits of the object colors/SH
/// to the decoded latent. Only object SH coefficients change. The (t, eps)
/// draws, camera choices and everything else are derived from
/// (rng_seed, outer, inner), so a run resumed from a checkpoint replays the
/// uninterrupted trajectory exactly.
[[nodiscard]] RelightResult two_step_dds(const RelightJob& job, const RelightHooks& hooks = {});

/// Continues from `<hooks.run_dir>/checkpoint.*`. The job supplies prompts,
/// config and services; its cloud is replaced by the checkpointed one.
[[nodiscard]] RelightResult resume_two_step_dds(const RelightJob& job, const RelightHooks& hooks);

/// Depth normalized to [0, 1], near = 1, far = 0 over covered pixels; 0 elsewhere.
[[nodiscard]] Image depth_condition(const Image& depth, const Image& alpha);

} // namespace gsr
