#include "cli/cli_app.hpp"

#include "gsrelight/metrics/benchmark.hpp"

namespace gsr::cli {
namespace {

struct EvalArgs {
    std::string dataset;
    std::string outputs;
    bool no_clip = false;
};

void run_eval(const Context& ctx, const EvalArgs& a) {
    require(std::filesystem::is_directory(a.dataset), ErrorCode::IoFailure, "dataset not found: " + a.dataset);
    require(std::filesystem::is_directory(a.outputs), ErrorCode::IoFailure, "outputs not found: " + a.outputs);
    Services services;
    if (!a.no_clip) {
        services = make_services(ctx.global);
    }
    MetricsReport report = run_benchmark(a.dataset, a.outputs, services.embedder.get());
    report.metadata["embedder"] = a.no_clip ? "none" : services.description;

    const auto dir = run_dir(ctx.global, "eval");
    write_config_snapshot(dir, "eval", ctx.global,
                          {{"dataset", a.dataset}, {"outputs", a.outputs}, {"no_clip", a.no_clip}});
    write_report(dir, report);
    *ctx.out << report_csv(report);
}

} // namespace

void register_eval(CLI::App& app, Context& ctx) {
    auto args = std::make_shared<EvalArgs>();
    auto* sub = app.add_subcommand("eval", "Score relit renders against ground truth (report.csv, report.json)");
    sub->add_option("--dataset", args->dataset, "Benchmark root: <scene>/object_scene/{images,masks,cameras.json}")
        ->required();
    sub->add_option("--outputs", args->outputs, "Method outputs: <scene>/images/<id>.png")->required();
    sub->add_flag("--no-clip", args->no_clip, "Skip CTIS/DTIS (reported as nan)");
    sub->callback([&ctx, args] { ctx.action = [&ctx, args] { run_eval(ctx, *args); }; });
}

} // namespace gsr::cli
