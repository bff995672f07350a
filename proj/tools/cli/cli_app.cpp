#include "cli/cli_app.hpp"

#include "gsrelight/bridge/bridge_client.hpp"
#include "gsrelight/bridge/fixtures.hpp"
#include "gsrelight/guidance/schedule.hpp"
#include "gsrelight/guidance/toy_models.hpp"

#include <spdlog/spdlog.h>

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>

namespace gsr::cli {
namespace {

std::atomic<bool> g_stop{false};

extern "C" void on_sigint(int) {
    g_stop.store(true);
}

// Adapter exposing one interface of a shared BridgeClient.
template <class Base>
struct SharedBridge;

template <>
struct SharedBridge<Denoiser> : Denoiser {
    std::shared_ptr<BridgeClient> client;
    Image predict_noise(const Image& z, int t, const DenoiserCondition& c, bool u) override {
        return client->predict_noise(z, t, c, u);
    }
};
template <>
struct SharedBridge<Codec> : Codec {
    std::shared_ptr<BridgeClient> client;
    Image encode(const Image& i) override { return client->encode(i); }
    Image decode(const Image& l) override { return client->decode(l); }
};
template <>
struct SharedBridge<Embedder> : Embedder {
    std::shared_ptr<BridgeClient> client;
    std::vector<double> embed_text(const std::string& s) override { return client->embed_text(s); }
    std::vector<double> embed_image(const Image& i) override { return client->embed_image(i); }
};
template <>
struct SharedBridge<Relighter> : Relighter {
    std::shared_ptr<BridgeClient> client;
    Image relight(const Image& i, const std::string& f, const std::string& b, LightDirection d) override {
        return client->relight(i, f, b, d);
    }
};
template <>
struct SharedBridge<ImageSampler> : ImageSampler {
    std::shared_ptr<BridgeClient> client;
    Image sample_image(const std::string& p, int h, int w, std::uint64_t s) override {
        return client->sample_image(p, h, w, s);
    }
};
template <>
struct SharedBridge<FinetuneService> : FinetuneService {
    std::shared_ptr<BridgeClient> client;
    std::string submit_finetune(const nlohmann::json& j) override { return client->submit_finetune(j); }
    FinetuneStatus poll_finetune(const std::string& id) override { return client->poll_finetune(id); }
};

template <class Base>
std::unique_ptr<Base> share(const std::shared_ptr<BridgeClient>& client) {
    auto p = std::make_unique<SharedBridge<Base>>();
    p->client = client;
    return p;
}

} // namespace

Services make_services(const GlobalOptions& global) {
    Services s;
    if (global.bridge == "toy") {
        s.denoiser = std::make_unique<HashedToyDenoiser>(make_schedule(1000));
        s.codec = std::make_unique<ToyCodec>();
        s.embedder = std::make_unique<HashEmbedder>();
        s.relighter = std::make_unique<RampRelighter>();
        s.sampler = std::make_unique<HashImageSampler>();
        s.finetune = std::make_unique<FixtureFinetune>();
        s.description = "toy";
        return s;
    }
    BridgeEndpoint ep;
    ep.base_url = global.bridge;
    ep.timeout_s = global.bridge_timeout;
    ep.max_retries = global.bridge_retries;
    if (const char* token = std::getenv("BRIDGE_TOKEN")) {
        ep.auth_token = token;
    }
    auto client = std::make_shared<BridgeClient>(ep);
    s.denoiser = share<Denoiser>(client);
    s.codec = share<Codec>(client);
    s.embedder = share<Embedder>(client);
    s.relighter = share<Relighter>(client);
    s.sampler = share<ImageSampler>(client);
    s.finetune = share<FinetuneService>(client);
    s.description = global.bridge;
    return s;
}

std::filesystem::path run_dir(const GlobalOptions& global, const std::string& command) {
    return std::filesystem::path(global.out) / (command + "-s" + std::to_string(global.seed));
}

void write_config_snapshot(const std::filesystem::path& dir, const std::string& command, const GlobalOptions& global,
                           const nlohmann::json& args) {
    std::filesystem::create_directories(dir);
    const nlohmann::json j = {{"snapshot_version", kSnapshotVersion},
                              {"command", command},
                              {"global",
                               {{"seed", global.seed},
                                {"bridge", global.bridge},
                                {"out", global.out},
                                {"log_level", global.log_level},
                                {"bridge_timeout", global.bridge_timeout},
                                {"bridge_retries", global.bridge_retries}}},
                              {"args", args}};
    std::ofstream out(dir / "config.json");
    require(static_cast<bool>(out), ErrorCode::IoFailure, "cannot write " + (dir / "config.json").string());
    out << j.dump(2) << '\n';
}

void require_file(const std::filesystem::path& path, const std::string& what) {
    require(std::filesystem::is_regular_file(path), ErrorCode::IoFailure, what + " not found: " + path.string());
}

int exit_code_for(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::Usage:
        return kExitUsage;
    case ErrorCode::Timeout:
    case ErrorCode::ProtocolError:
    case ErrorCode::ServerError:
    case ErrorCode::UnknownJob:
    case ErrorCode::BridgeFailure:
    case ErrorCode::DenoiserFailure:
        return kExitBridge;
    case ErrorCode::Interrupted:
        return kExitInterrupted;
    default:
        return kExitData;
    }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"gsrelight: insert 3DGS objects and relight them with diffusion guidance"};
    app.name("gsrelight");
    app.require_subcommand(1);
    Context ctx;
    ctx.out = &out;
    ctx.stop = &g_stop;
    app.add_option("--seed", ctx.global.seed, "Base RNG seed")->capture_default_str();
    app.add_option("--bridge", ctx.global.bridge, "'toy' for in-process models or the model service URL")
        ->capture_default_str();
    app.add_option("--out", ctx.global.out, "Root directory for run outputs")->capture_default_str();
    app.add_option("--log-level", ctx.global.log_level, "trace, debug, info, warn, error or off")
        ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}))
        ->capture_default_str();
    app.add_option("--bridge-timeout", ctx.global.bridge_timeout, "Per-request timeout in seconds")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_option("--bridge-retries", ctx.global.bridge_retries, "Retries on timeouts and 5xx replies")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();

    register_insert(app, ctx);
    register_relight(app, ctx);
    register_eval(app, ctx);
    register_sample_points(app, ctx);
    register_personalize(app, ctx);
    register_generate_2d(app, ctx);
    register_serve_fixture(app, ctx);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        // Subcommand help requests surface here with exit code 0.
        if (e.get_exit_code() == 0) {
            for (const CLI::App* sub : app.get_subcommands()) {
                out << sub->help();
            }
            return kExitOk;
        }
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }

    spdlog::set_level(spdlog::level::from_str(ctx.global.log_level));
    if (ctx.global.bridge != "toy" && ctx.global.bridge.rfind("http://", 0) != 0) {
        err << "error: --bridge must be 'toy' or an http:// URL\n";
        return kExitUsage;
    }
    if (!ctx.action) {
        return kExitUsage;
    }
    g_stop.store(false);
    auto previous = std::signal(SIGINT, on_sigint);
    int code = kExitOk;
    try {
        ctx.action();
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        code = exit_code_for(e.code());
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        code = kExitData;
    } catch (const nlohmann::json::exception& e) {
        err << "error: malformed JSON: " << e.what() << '\n';
        code = kExitData;
    }
    std::signal(SIGINT, previous);
    return code;
}

int run_cli(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run_cli(args, std::cout, std::cerr);
}

} // namespace gsr::cli
