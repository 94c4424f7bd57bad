#include "equivcheck/pipeline.hpp"

#include "equivcheck/error.hpp"
#include "equivcheck/fit_bundle.hpp"
#include "equivcheck/freq_ks.hpp"
#include "equivcheck/rng.hpp"
#include "equivcheck/text_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <fstream>
#include <sstream>

namespace equivcheck {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr std::array<std::string_view, 2> kRoles{"reference", "candidate"};

std::string dir_name(const ModelSpec& m) {
    std::string n = m.name();
    std::replace(n.begin(), n.end(), ':', '-');
    return n;
}

void require(const fs::path& p) {
    if (!fs::exists(p)) {
        throw Error(ErrorCode::dependency, "missing upstream artifact " + p.string());
    }
}

json read_json(const fs::path& p) {
    require(p);
    try {
        return json::parse(text::read_file(p));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::parse, p.string() + ": " + e.what());
    }
}

const DatasetConfig& dataset(const RunConfig& cfg, std::string_view role) {
    return role == "reference" ? cfg.reference : cfg.candidate;
}

std::vector<const MetricPlan*> selected_plans(const RunConfig& cfg, const PipelineOptions& opts) {
    std::vector<const MetricPlan*> out;
    for (const auto& p : cfg.metrics) {
        if (!opts.only_metric || *opts.only_metric == p.metric) {
            out.push_back(&p);
        }
    }
    if (out.empty()) {
        throw Error(ErrorCode::config, "metric " + std::string(to_string(*opts.only_metric)) + " is not configured");
    }
    return out;
}

MetricTable load_table(const fs::path& out, std::string_view role) {
    const fs::path p = artifacts::metric_table(out, role);
    require(p);
    std::ifstream in(p);
    return read_metric_table(in);
}

WeightedSample sample_of(const MetricTable& t, Metric m) { return WeightedSample{t.values(m), t.weights(m)}; }

// ---- stages --------------------------------------------------------------

void stage_extract(const RunConfig& cfg, const PipelineOptions& opts) {
    json notes = json::array();
    for (std::string_view role : kRoles) {
        const DatasetConfig& d = dataset(cfg, role);
        if (!fs::exists(d.path)) {
            throw Error(ErrorCode::io, "dataset not found: " + d.path.string());
        }
        const ScenarioSet set = load_scenario_file(d.path.string(), d.label);
        for (const auto& s : set.scenarios) {
            const ValidationReport rep = validate_scenario(s, cfg.validation);
            for (const auto& v : rep.violations) {
                if (v.rejecting) {
                    throw Error(ErrorCode::parse,
                                d.label + ": scenario '" + s.id + "' rejected: " + v.message);
                }
                notes.push_back(json{{"dataset", d.label}, {"scenario", s.id}, {"message", v.message}});
            }
        }
        const MetricTable table = build_metric_table(set, cfg.metric_config, opts.exec);
        std::ostringstream os;
        write_metric_table(os, table);
        text::write_file(artifacts::metric_table(opts.out, role), os.str());
    }
    text::write_file(opts.out / "metrics" / "validation.json", json{{"flagged", notes}}.dump(2) + "\n");
}

struct FitTask {
    const MetricPlan* plan;
    std::string_view role;
    ModelSpec model;
    std::uint64_t seed;
};

void stage_fit(const RunConfig& cfg, const PipelineOptions& opts) {
    std::array<MetricTable, 2> tables{load_table(opts.out, kRoles[0]), load_table(opts.out, kRoles[1])};
    std::vector<FitTask> tasks;
    for (const MetricPlan* plan : selected_plans(cfg, opts)) {
        for (std::size_t r = 0; r < kRoles.size(); ++r) {
            for (const auto& model : plan->candidates) {
                const std::string metric(to_string(plan->metric));
                tasks.push_back({plan, kRoles[r], model,
                                 derive_seed(cfg.seed, {"fit", metric, dataset(cfg, kRoles[r]).label, model.name()})});
            }
        }
    }

    std::vector<std::optional<PosteriorFit>> fits(tasks.size());
    std::vector<std::optional<Error>> errors(tasks.size());
    auto run_task = [&](std::size_t i) {
        const FitTask& t = tasks[i];
        const MetricTable& table = tables[t.role == kRoles[0] ? 0 : 1];
        SamplerConfig sc = cfg.sampler;
        sc.seed = t.seed;
        try {
            fits[i] = fit(sample_of(table, t.plan->metric), t.model, t.plan->prior_for(t.model.family), sc,
                          FitLabels{std::string(to_string(t.plan->metric)), dataset(cfg, t.role).label},
                          Exec::serial);
        } catch (const Error& e) {
            errors[i] = Error(e.code(), std::string(to_string(t.plan->metric)) + "/" + dataset(cfg, t.role).label +
                                            "/" + t.model.name() + ": " + e.what());
        }
    };
    if (opts.exec == Exec::serial) {
        for (std::size_t i = 0; i < tasks.size(); ++i) {
            run_task(i);
        }
    } else {
        const auto n = static_cast<std::ptrdiff_t>(tasks.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(jobs())
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            run_task(static_cast<std::size_t>(i));
        }
    }
    for (const auto& e : errors) {
        if (e && e->code() != ErrorCode::support) {
            throw *e;
        }
    }

    // persist and select per (metric, role), in task order
    std::size_t i = 0;
    while (i < tasks.size()) {
        const MetricPlan* plan = tasks[i].plan;
        const std::string_view role = tasks[i].role;
        std::vector<PosteriorFit> group;
        json candidates = json::array();
        for (; i < tasks.size() && tasks[i].plan == plan && tasks[i].role == role; ++i) {
            json entry{{"model", tasks[i].model.name()}, {"seed", tasks[i].seed}};
            if (fits[i]) {
                const PosteriorFit& f = *fits[i];
                save_fit_bundle(artifacts::fit_dir(opts.out, plan->metric, role, f.model), f);
                entry["dir"] = dir_name(f.model);
                entry["waic"] = f.waic.waic;
                entry["lppd"] = f.waic.lppd;
                entry["p_waic"] = f.waic.p_waic;
                entry["converged"] = f.converged();
                entry["skipped"] = nullptr;
                group.push_back(f);
            } else {
                entry["skipped"] = errors[i]->what();
            }
            candidates.push_back(entry);
        }
        const std::string where = std::string(to_string(plan->metric)) + "/" + dataset(cfg, role).label;
        if (group.empty()) {
            throw Error(ErrorCode::support, where + ": no candidate family supports the data");
        }
        const PosteriorFit& best = select_model(group);
        const bool any_converged =
            std::any_of(group.begin(), group.end(), [](const PosteriorFit& f) { return f.converged(); });
        std::vector<std::string> warnings = best.warnings;
        if (!any_converged) {
            warnings.push_back("no candidate converged (r_hat > 1.05); selected among non-converged fits");
        }
        const json sel{{"metric", to_string(plan->metric)},
                       {"role", role},
                       {"label", dataset(cfg, role).label},
                       {"selected", best.model.name()},
                       {"dir", dir_name(best.model)},
                       {"seed", best.seed},
                       {"candidates", candidates},
                       {"warnings", warnings}};
        text::write_file(artifacts::selection(opts.out, plan->metric, role), sel.dump(2) + "\n");
    }
}

PosteriorFit load_selected(const fs::path& out, Metric m, std::string_view role) {
    const json sel = read_json(artifacts::selection(out, m, role));
    return load_fit_bundle(artifacts::selection(out, m, role).parent_path() / sel.at("dir").get<std::string>());
}

void stage_stats(const RunConfig& cfg, const PipelineOptions& opts) {
    for (const MetricPlan* plan : selected_plans(cfg, opts)) {
        const PosteriorFit ref = load_selected(opts.out, plan->metric, kRoles[0]);
        const PosteriorFit cand = load_selected(opts.out, plan->metric, kRoles[1]);
        for (const auto& spec : plan->statistics) {
            const RopeSpec* rope = cfg.rope_for(plan->metric, spec.kind);
            const double mass = rope != nullptr ? rope->mass : cfg.hdi_mass;
            const std::uint64_t seed =
                derive_seed(cfg.seed, {"pair", to_string(plan->metric), to_string(spec.kind)});
            const StatisticPosterior post =
                posterior_statistic(ref, cand, spec, seed, Pairing::permuted, mass, opts.exec);
            const fs::path p = artifacts::statistic(opts.out, plan->metric, spec.kind);
            save_statistic(p.parent_path(), p.stem().string(), post);
        }
    }
}

void stage_ks(const RunConfig& cfg, const PipelineOptions& opts) {
    const MetricTable ref = load_table(opts.out, kRoles[0]);
    const MetricTable cand = load_table(opts.out, kRoles[1]);
    for (const MetricPlan* plan : selected_plans(cfg, opts)) {
        const WeightedSample a = sample_of(ref, plan->metric);
        const WeightedSample b = sample_of(cand, plan->metric);
        const KsTestResult asym = two_sample_ks(a, b, KsTestOptions{KsMethod::asymptotic}, opts.exec);
        json j{{"metric", to_string(plan->metric)},
               {"reference", cfg.reference.label},
               {"candidate", cfg.candidate.label},
               {"asymptotic", asym},
               {"alpha", cfg.significance.alpha},
               {"significant", asym.p_value < cfg.significance.alpha}};
        j["permutation"] = nullptr;
        if (cfg.significance.permutation) {
            const KsTestOptions po{KsMethod::permutation, cfg.significance.permutations,
                                   derive_seed(cfg.seed, {"ks", to_string(plan->metric)})};
            j["permutation"] = two_sample_ks(a, b, po, opts.exec);
        }
        text::write_file(artifacts::ks(opts.out, plan->metric), j.dump(2) + "\n");
    }
}

void stage_ecdf(const RunConfig& cfg, const PipelineOptions& opts) {
    for (std::string_view role : kRoles) {
        const MetricTable t = load_table(opts.out, role);
        for (const MetricPlan* plan : selected_plans(cfg, opts)) {
            write_ecdf(artifacts::ecdf(opts.out, plan->metric, role), weighted_ecdf(sample_of(t, plan->metric)));
        }
    }
}

EquivalenceReport stage_decide(const RunConfig& cfg, const PipelineOptions& opts) {
    EquivalenceReport report;
    report.run_id = cfg.run_id;
    report.config_digest = cfg.digest();
    std::vector<MetricVerdict> verdicts;
    json fit_seeds = json::object();
    json pair_seeds = json::object();
    json perm_seeds = json::object();
    json selection = json::object();
    json priors = json::object();

    for (const MetricPlan* plan : selected_plans(cfg, opts)) {
        const std::string metric(to_string(plan->metric));
        std::vector<StatisticInput> inputs;
        for (const auto& spec : plan->statistics) {
            const StatisticPosterior post = load_statistic(artifacts::statistic(opts.out, plan->metric, spec.kind));
            const RopeSpec* rope = cfg.rope_for(plan->metric, spec.kind);
            if (rope == nullptr) {
                throw Error(ErrorCode::config, "no ROPE for " + spec.symbol());
            }
            HdiInterval h = post.hdi;
            if (h.mass != rope->mass) {
                h = hdi(post.draws, rope->mass);
            }
            inputs.push_back(StatisticInput{post.spec, h, post.point_estimate, *rope});
            pair_seeds[metric][std::string(to_string(spec.kind))] = post.pairing_seed;
        }
        MetricReport mr;
        mr.verdict = metric_verdict(inputs, cfg.rule.relaxation_factor);
        for (std::string_view role : kRoles) {
            const json sel = read_json(artifacts::selection(opts.out, plan->metric, role));
            const std::string model = sel.at("selected").get<std::string>();
            (role == kRoles[0] ? mr.model_reference : mr.model_candidate) = model;
            for (const auto& w : sel.at("warnings")) {
                mr.warnings.push_back(std::string(role) + " " + model + ": " + w.get<std::string>());
            }
            fit_seeds[metric][std::string(role)] = sel.at("seed");
            json waics = json::object();
            for (const auto& c : sel.at("candidates")) {
                waics[c.at("model").get<std::string>()] = c.contains("waic") ? c.at("waic") : json("skipped");
            }
            selection[metric][std::string(role)] = json{{"selected", model}, {"waic", waics}};
            const json summary = read_json(artifacts::selection(opts.out, plan->metric, role).parent_path() /
                                           sel.at("dir").get<std::string>() / "summary.json");
            priors[metric][std::string(role)] = json{{"model", model},
                                                     {"params", summary.at("priors")},
                                                     {"pi", summary.at("pi_prior")}};
        }
        verdicts.push_back(mr.verdict);
        report.metrics.push_back(std::move(mr));

        const json ks = read_json(artifacts::ks(opts.out, plan->metric));
        SignificanceRow row;
        row.metric = plan->metric;
        row.asymptotic = ks.at("asymptotic").get<KsTestResult>();
        if (!ks.at("permutation").is_null()) {
            row.permutation = ks.at("permutation").get<KsTestResult>();
            perm_seeds[metric] = derive_seed(cfg.seed, {"ks", metric});
        }
        row.alpha = cfg.significance.alpha;
        row.significant = row.asymptotic.p_value < row.alpha;
        report.significance.push_back(row);
    }
    report.overall = overall_verdict(verdicts, cfg.rule);
    report.documentation = json{
        {"config", cfg.canonical},
        {"seeds", {{"master", cfg.seed}, {"fits", fit_seeds}, {"pairing", pair_seeds}, {"permutation", perm_seeds}}},
        {"priors", priors},
        {"model_selection", selection},
        {"rope_notes", cfg.rope_notes},
        {"conventions",
         {"HDI inside ROPE uses closed containment",
          "relaxed ROPEs keep the midpoint and scale the width by relaxation_factor",
          "likelihood weights are w_i * n / sum(w) unless weight_mode is raw",
          "ratios are candidate over reference; mean_diff is reference minus candidate",
          "KS on mixture metrics compares continuous parts; restricted KS is renormalised unless conditional is false",
          "KS p-values use Kish effective sizes"}},
    };
    text::write_file(artifacts::report_json(opts.out), render_report_json(report));
    text::write_file(artifacts::report_markdown(opts.out), render_report_markdown(report));
    return report;
}

}  // namespace

std::string_view to_string(Stage s) {
    switch (s) {
        case Stage::extract: return "extract";
        case Stage::fit: return "fit";
        case Stage::stats: return "stats";
        case Stage::ks: return "ks";
        case Stage::ecdf: return "ecdf";
        case Stage::decide: return "decide";
    }
    return "unknown";
}

std::optional<Stage> stage_from_string(std::string_view name) {
    for (Stage s : {Stage::extract, Stage::fit, Stage::stats, Stage::ks, Stage::ecdf, Stage::decide}) {
        if (to_string(s) == name) {
            return s;
        }
    }
    return std::nullopt;
}

namespace artifacts {

fs::path metric_table(const fs::path& out, std::string_view role) {
    return out / "metrics" / (std::string(role) + ".csv");
}

fs::path fit_dir(const fs::path& out, Metric m, std::string_view role, const ModelSpec& model) {
    return out / "fits" / std::string(to_string(m)) / std::string(role) / dir_name(model);
}

fs::path selection(const fs::path& out, Metric m, std::string_view role) {
    return out / "fits" / std::string(to_string(m)) / std::string(role) / "selected.json";
}

fs::path statistic(const fs::path& out, Metric m, StatisticKind k) {
    return out / "stats" / (std::string(to_string(m)) + "__" + std::string(to_string(k)) + ".json");
}

fs::path ks(const fs::path& out, Metric m) { return out / "ks" / (std::string(to_string(m)) + ".json"); }

fs::path ecdf(const fs::path& out, Metric m, std::string_view role) {
    return out / "ecdf" / (std::string(to_string(m)) + "__" + std::string(role) + ".csv");
}

fs::path report_json(const fs::path& out) { return out / "report.json"; }
fs::path report_markdown(const fs::path& out) { return out / "report.md"; }

}  // namespace artifacts

std::optional<EquivalenceReport> run_stage(Stage stage, const RunConfig& cfg, const PipelineOptions& opts) {
    if (opts.out.empty()) {
        throw Error(ErrorCode::config, "no output directory (set output_dir or pass --out)");
    }
    try {
        switch (stage) {
            case Stage::extract: stage_extract(cfg, opts); break;
            case Stage::fit: stage_fit(cfg, opts); break;
            case Stage::stats: stage_stats(cfg, opts); break;
            case Stage::ks: stage_ks(cfg, opts); break;
            case Stage::ecdf: stage_ecdf(cfg, opts); break;
            case Stage::decide: return stage_decide(cfg, opts);
        }
    } catch (const Error& e) {
        throw Error(e.code(), "stage " + std::string(to_string(stage)) + ": " + e.what());
    }
    return std::nullopt;
}

EquivalenceReport run_pipeline(const RunConfig& cfg, const PipelineOptions& opts) {
    for (Stage s : {Stage::extract, Stage::fit, Stage::stats, Stage::ks, Stage::ecdf}) {
        run_stage(s, cfg, opts);
    }
    return *run_stage(Stage::decide, cfg, opts);
}

}  // namespace equivcheck
