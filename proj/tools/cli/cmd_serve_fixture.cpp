#include "cli/cli_app.hpp"

#include "gsrelight/bridge/loopback_server.hpp"

#include <chrono>
#include <thread>

namespace gsr::cli {
namespace {

struct ServeArgs {
    int port = 0;
    std::string mode = "toy";
    std::string token;
    int fail_first = 0;
    double toy_spread = 0.0;
};

void run_serve(const Context& ctx, const ServeArgs& a) {
    FixtureOptions opts;
    opts.mode = fixture_mode_from_string(a.mode);
    opts.fail_first = a.fail_first;
    opts.toy_spread = a.toy_spread;
    LoopbackServer server(opts, a.port, a.token);
    *ctx.out << server.url() << std::endl;
    while (!ctx.stop->load()) {
        std::this_thread::sleep_for(std::chrono::milliseconds(100));
    }
    server.stop();
}

} // namespace

void register_serve_fixture(CLI::App& app, Context& ctx) {
    auto args = std::make_shared<ServeArgs>();
    auto* sub = app.add_subcommand("serve-fixture", "Serve the deterministic bridge fixture on 127.0.0.1");
    sub->add_option("--port", args->port, "TCP port (0 picks a free one)")->capture_default_str();
    sub->add_option("--mode", args->mode, "echo, toy or sd")
        ->check(CLI::IsMember({"echo", "toy", "sd"}))
        ->capture_default_str();
    sub->add_option("--token", args->token, "Require this bearer token");
    sub->add_option("--fail-first", args->fail_first, "Answer the first N requests with 503")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    sub->add_option("--toy-spread", args->toy_spread, "Spatial variation of the toy prompt means")
        ->capture_default_str();
    sub->callback([&ctx, args] { ctx.action = [&ctx, args] { run_serve(ctx, *args); }; });
}

} // namespace gsr::cli
