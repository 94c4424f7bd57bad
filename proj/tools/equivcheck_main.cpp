// equivcheck command line: full pipeline, single stages, synthetic data.

#include "equivcheck/error.hpp"
#include "equivcheck/parallel.hpp"
#include "equivcheck/pipeline.hpp"
#include "equivcheck/synthetic.hpp"
#include "equivcheck/text_io.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace {

using namespace equivcheck;

constexpr int kExitEquivalent = 0;
constexpr int kExitNotEquivalent = 10;

int exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::config: return 11;
        case ErrorCode::parse:
        case ErrorCode::empty_input:
        case ErrorCode::duplicate_sample:
        case ErrorCode::insufficient_data:
        case ErrorCode::support:
        case ErrorCode::degenerate_weights: return 12;
        case ErrorCode::dependency:
        case ErrorCode::io: return 13;
        case ErrorCode::numerical:
        case ErrorCode::degenerate_region:
        case ErrorCode::ratio_overflow:
        case ErrorCode::parameter_domain: return 14;
        case ErrorCode::precondition: return 15;
    }
    return 15;
}

struct Common {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::string metric;
    int jobs = 0;
    std::string stage;
};

void add_common(CLI::App& app, Common& c) {
    app.add_option("--config", c.config, "run configuration (JSON)");
    app.add_option("--out", c.out, "artifact directory (overrides output_dir)");
    app.add_option("--seed", c.seed, "master seed (overrides the config)");
    app.add_option("--metric", c.metric, "restrict stages to one metric");
    app.add_option("--jobs", c.jobs, "worker threads (default: EQUIVCHECK_JOBS, then all cores)");
}

int report_verdict(const EquivalenceReport& r, const std::filesystem::path& out) {
    std::cout << "overall: " << (r.overall.equivalent ? "equivalent" : "not equivalent") << "\n";
    for (const auto& e : r.overall.rationale) {
        std::cout << "  " << e.clause << ": " << e.outcome << " (" << e.detail << ")\n";
    }
    std::cout << "report: " << artifacts::report_json(out).string() << "\n";
    return r.overall.equivalent ? kExitEquivalent : kExitNotEquivalent;
}

int run_stages(const Common& c, std::optional<Stage> only) {
    if (c.config.empty()) {
        throw Error(ErrorCode::config, "--config is required");
    }
    set_jobs(resolve_jobs(c.jobs));
    const RunConfig cfg = load_run_config(c.config, c.seed);
    PipelineOptions opts;
    opts.out = c.out.empty() ? cfg.output_dir : std::filesystem::path(c.out);
    if (!c.metric.empty()) {
        opts.only_metric = metric_from_string(c.metric);
        if (!opts.only_metric) {
            throw Error(ErrorCode::config, "unknown metric '" + c.metric + "'");
        }
    }
    if (!only) {
        return report_verdict(run_pipeline(cfg, opts), opts.out);
    }
    const auto report = run_stage(*only, cfg, opts);
    if (report) {
        return report_verdict(*report, opts.out);
    }
    std::cout << "stage " << to_string(*only) << " done: " << opts.out.string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bayesian ROPE equivalence testing for weighted pre-crash scenario datasets"};
    app.require_subcommand(0, 1);
    Common common;
    add_common(app, common);
    app.add_option("--stage", common.stage, "run a single stage: extract|fit|stats|ks|ecdf|decide");

    std::optional<Stage> sub_stage;
    Common sub;
    for (Stage s : {Stage::extract, Stage::fit, Stage::stats, Stage::ks, Stage::ecdf, Stage::decide}) {
        CLI::App* cmd = app.add_subcommand(std::string(to_string(s)), "run the " + std::string(to_string(s)) + " stage");
        add_common(*cmd, sub);
        cmd->callback([&sub_stage, s] { sub_stage = s; });
    }
    CLI::App* run_cmd = app.add_subcommand("run", "run every stage");
    add_common(*run_cmd, sub);

    SyntheticConfig synth;
    std::string synth_out;
    CLI::App* synth_cmd = app.add_subcommand("synth", "write a synthetic scenario dataset");
    synth_cmd->add_option("--n", synth.scenarios, "number of scenarios")->required();
    synth_cmd->add_option("--seed", synth.seed, "generator seed")->required();
    synth_cmd->add_option("--label", synth.label, "dataset label");
    synth_cmd->add_option("--scale", synth.closing_speed_scale, "closing-speed scale (planted shift)");
    synth_cmd->add_flag("!--unit-weights", synth.random_weights, "give every scenario weight 1");
    synth_cmd->add_option("--out", synth_out, "output CSV")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth_cmd->parsed()) {
            std::ostringstream os;
            write_scenario_file(os, generate_synthetic(synth));
            text::write_file(synth_out, os.str());
            std::cout << "wrote " << synth.scenarios << " scenarios to " << synth_out << "\n";
            return 0;
        }
        if (sub_stage || run_cmd->parsed()) {
            // options may sit before or after the subcommand name
            Common merged = common;
            if (!sub.config.empty()) {
                merged.config = sub.config;
            }
            if (!sub.out.empty()) {
                merged.out = sub.out;
            }
            if (sub.seed) {
                merged.seed = sub.seed;
            }
            if (!sub.metric.empty()) {
                merged.metric = sub.metric;
            }
            if (sub.jobs != 0) {
                merged.jobs = sub.jobs;
            }
            return run_stages(merged, sub_stage);
        }
        std::optional<Stage> only;
        if (!common.stage.empty()) {
            only = stage_from_string(common.stage);
            if (!only) {
                throw Error(ErrorCode::config, "unknown stage '" + common.stage + "'");
            }
        }
        return run_stages(common, only);
    } catch (const Error& e) {
        std::cerr << "equivcheck: " << to_string(e.code()) << " error: " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "equivcheck: error: " << e.what() << "\n";
        return 15;
    }
}
