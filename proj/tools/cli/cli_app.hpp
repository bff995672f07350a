#pragma once

#include "gsrelight/core/error.hpp"
#include "gsrelight/guidance/services.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace gsr::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitBridge = 3;
inline constexpr int kExitInterrupted = 130;

/// Version of the config.json snapshot written into every run directory.
inline constexpr int kSnapshotVersion = 1;

struct GlobalOptions {
    std::uint64_t seed = 0;
    std::string bridge = "toy";
    std::string out = "runs";
    std::string log_level = "info";
    double bridge_timeout = 30.0;
    int bridge_retries = 2;
};

/// Denoiser/codec/etc. behind one of the bridge modes.
struct Services {
    std::unique_ptr<Denoiser> denoiser;
    std::unique_ptr<Codec> codec;
    std::unique_ptr<Embedder> embedder;
    std::unique_ptr<Relighter> relighter;
    std::unique_ptr<ImageSampler> sampler;
    std::unique_ptr<FinetuneService> finetune;
    std::string description;
};

/// "toy" wires the in-process toy models and fixtures; an http:// URL wires a
/// BridgeClient (token from BRIDGE_TOKEN).
[[nodiscard]] Services make_services(const GlobalOptions& global);

struct Context {
    GlobalOptions global;
    std::function<void()> action;
    std::ostream* out = nullptr;
    /// Set by SIGINT; long-running commands poll it.
    std::atomic<bool>* stop = nullptr;
};

/// <out>/<command>-s<seed>
[[nodiscard]] std::filesystem::path run_dir(const GlobalOptions& global, const std::string& command);
/// Writes <dir>/config.json with the command, global flags and `args`.
void write_config_snapshot(const std::filesystem::path& dir, const std::string& command, const GlobalOptions& global,
                           const nlohmann::json& args);

/// Throws IoFailure (exit 2) unless `path` names an existing regular file.
void require_file(const std::filesystem::path& path, const std::string& what);

[[nodiscard]] int exit_code_for(ErrorCode code) noexcept;

void register_insert(CLI::App& app, Context& ctx);
void register_relight(CLI::App& app, Context& ctx);
void register_eval(CLI::App& app, Context& ctx);
void register_sample_points(CLI::App& app, Context& ctx);
void register_personalize(CLI::App& app, Context& ctx);
void register_generate_2d(CLI::App& app, Context& ctx);
void register_serve_fixture(CLI::App& app, Context& ctx);

/// Parses `args` (without the program name) and runs the selected subcommand.
/// Returns the process exit code; messages go to `out` / `err`.
[[nodiscard]] int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
[[nodiscard]] int run_cli(int argc, char** argv);

} // namespace gsr::cli
