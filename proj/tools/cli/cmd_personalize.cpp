#include "cli/cli_app.hpp"

#include "gsrelight/model/cloud_io.hpp"
#include "gsrelight/personalize/dataset.hpp"
#include "gsrelight/personalize/plan.hpp"

#include <spdlog/spdlog.h>

#include <chrono>
#include <fstream>
#include <thread>

namespace gsr::cli {
namespace {

struct PersonalizeArgs {
    std::string object;
    std::string plan;
    int max_polls = 600;
    double poll_interval = 1.0;
    bool no_submit = false;
};

void run_personalize(const Context& ctx, const PersonalizeArgs& a) {
    require_file(a.object, "object cloud");
    PersonalizationPlan plan;
    if (!a.plan.empty()) {
        require_file(a.plan, "plan");
        std::ifstream in(a.plan);
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(in);
        } catch (const nlohmann::json::exception& e) {
            fail(ErrorCode::MalformedFile, "plan is not valid JSON: " + std::string(e.what()));
        }
        plan = plan_from_json(j);
    }
    plan.validate();

    const GaussianCloud object = load_cloud(a.object);
    Services services = make_services(ctx.global);
    const auto dir = run_dir(ctx.global, "personalize");
    write_config_snapshot(dir, "personalize", ctx.global,
                          {{"object", a.object}, {"plan", to_json(plan)}, {"no_submit", a.no_submit}});

    const DatasetManifest manifest =
        build_dataset(object, plan, ctx.global.seed, *services.relighter, *services.sampler, dir / "dataset");
    *ctx.out << (dir / "dataset" / "manifest.jsonl").string() << " (" << manifest.records.size() << " records)\n";
    if (a.no_submit) {
        return;
    }

    const std::string job_id = services.finetune->submit_finetune(finetune_job(manifest));
    spdlog::info("submitted fine-tune job {}", job_id);
    FinetuneStatus status;
    for (int i = 0; i < a.max_polls; ++i) {
        status = services.finetune->poll_finetune(job_id);
        if (status.status == "completed" || status.status == "failed") {
            break;
        }
        if (ctx.stop->load()) {
            fail(ErrorCode::Interrupted, "interrupted while waiting for job " + job_id);
        }
        std::this_thread::sleep_for(std::chrono::duration<double>(a.poll_interval));
    }
    std::ofstream(dir / "finetune.json") << nlohmann::json{{"job_id", job_id},
                                                           {"status", status.status},
                                                           {"model_id", status.model_id}}
                                                .dump(2)
                                         << '\n';
    require(status.status == "completed", ErrorCode::BridgeFailure,
            "fine-tune job " + job_id + " ended as '" + status.status + "'");
    *ctx.out << "job " << job_id << " model " << status.model_id << '\n';
}

} // namespace

void register_personalize(CLI::App& app, Context& ctx) {
    auto args = std::make_shared<PersonalizeArgs>();
    auto* sub = app.add_subcommand("personalize", "Build the relit-view dataset and submit the fine-tune job");
    sub->add_option("--object", args->object, "Object cloud (.ply)")->required();
    sub->add_option("--plan", args->plan, "Personalization plan JSON (defaults when omitted)");
    sub->add_option("--max-polls", args->max_polls, "Give up after this many status polls")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--poll-interval", args->poll_interval, "Seconds between polls")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    sub->add_flag("--no-submit", args->no_submit, "Only build the dataset");
    sub->callback([&ctx, args] { ctx.action = [&ctx, args] { run_personalize(ctx, *args); }; });
}

} // namespace gsr::cli
