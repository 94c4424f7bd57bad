#include "equivcheck/config.hpp"

#include "equivcheck/error.hpp"
#include "equivcheck/rng.hpp"
#include "equivcheck/text_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

namespace equivcheck {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& msg) { throw Error(ErrorCode::config, msg); }

void allow_keys(const json& obj, std::string_view where, std::initializer_list<std::string_view> keys) {
    if (!obj.is_object()) {
        fail(std::string(where) + " must be an object");
    }
    for (const auto& [k, v] : obj.items()) {
        if (std::find(keys.begin(), keys.end(), k) == keys.end()) {
            fail(std::string(where) + ": unknown key '" + k + "'");
        }
    }
}

Metric parse_metric(const json& j) {
    const auto m = metric_from_string(j.get<std::string>());
    if (!m) {
        fail("unknown metric " + j.dump());
    }
    return *m;
}

DatasetConfig parse_dataset(const json& j, std::string_view role, const std::filesystem::path& base, json& echo) {
    allow_keys(j, role, {"path", "label"});
    DatasetConfig d;
    const std::string raw = j.at("path").get<std::string>();
    const std::filesystem::path p(raw);
    d.path = p.is_absolute() ? p : base / p;
    d.label = j.value("label", std::string(role));
    echo = json{{"path", raw}, {"label", d.label}};
    return d;
}

ParamPrior parse_param_prior(const json& j, std::string_view where) {
    allow_keys(j, where, {"kind", "a", "b"});
    const auto kind = prior_kind_from_string(j.at("kind").get<std::string>());
    if (!kind) {
        fail(std::string(where) + ": unknown prior kind");
    }
    return ParamPrior{*kind, j.at("a").get<double>(), j.value("b", 1.0)};
}

json param_prior_json(const ParamPrior& p) { return json{{"kind", to_string(p.kind)}, {"a", p.a}, {"b", p.b}}; }

json bound_json(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

PriorSpec MetricPlan::prior_for(Family f) const {
    const auto it = priors.find(f);
    return it == priors.end() ? PriorSpec::defaults(f) : it->second;
}

const MetricPlan* RunConfig::plan(Metric m) const {
    for (const auto& p : metrics) {
        if (p.metric == m) {
            return &p;
        }
    }
    return nullptr;
}

const RopeSpec* RunConfig::rope_for(Metric m, StatisticKind k) const {
    for (const auto& r : ropes) {
        if (r.metric == m && r.statistic == k) {
            return &r;
        }
    }
    return nullptr;
}

std::string RunConfig::digest() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(stable_hash(canonical.dump())));
    return buf;
}

Transform default_transform(Metric m) { return m == Metric::delta_v_l ? Transform::identity : Transform::negate; }

std::vector<ModelSpec> default_candidates(Metric m) {
    std::vector<ModelSpec> out;
    const Transform t = default_transform(m);
    if (m == Metric::delta_v_l || m == Metric::t_nr) {
        for (Family f : {Family::exponential, Family::gamma, Family::normal, Family::log_normal}) {
            out.push_back(ModelSpec{f, false, 0.0, t, 0.0, kInf});
        }
    } else {
        for (Family f : {Family::exponential, Family::gamma, Family::log_normal, Family::truncated_normal}) {
            out.push_back(ModelSpec{f, true, 0.0, t, 0.0, kInf});
        }
    }
    return out;
}

RunConfig parse_run_config(std::string_view text, const std::filesystem::path& base_dir,
                           std::optional<std::uint64_t> seed_override) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        fail(std::string("config is not valid JSON: ") + e.what());
    }
    RunConfig cfg;
    json echo = json::object();
    try {
        allow_keys(j, "config",
                   {"run_id", "seed", "output_dir", "datasets", "validation", "metric_config", "sampler", "metrics",
                    "ropes", "overall_rule", "significance", "hdi_mass", "rope_notes"});
        cfg.run_id = j.value("run_id", std::string("run"));
        if (!j.contains("seed") && !seed_override) {
            fail("config must set a seed (no wall-clock seeding)");
        }
        cfg.seed = seed_override ? *seed_override : j.at("seed").get<std::uint64_t>();
        if (j.contains("output_dir")) {
            const std::filesystem::path p(j["output_dir"].get<std::string>());
            cfg.output_dir = p.is_absolute() ? p : base_dir / p;
        }

        const json& ds = j.at("datasets");
        allow_keys(ds, "datasets", {"reference", "candidate"});
        json ds_echo = json::object();
        cfg.reference = parse_dataset(ds.at("reference"), "reference", base_dir, ds_echo["reference"]);
        cfg.candidate = parse_dataset(ds.at("candidate"), "candidate", base_dir, ds_echo["candidate"]);
        if (cfg.reference.label == cfg.candidate.label) {
            fail("reference and candidate labels must differ");
        }

        if (j.contains("validation")) {
            const json& v = j["validation"];
            allow_keys(v, "validation", {"mode", "gap_impact_tol", "min_span"});
            const std::string mode = v.value("mode", std::string("lenient"));
            if (mode != "lenient" && mode != "strict") {
                fail("validation.mode must be lenient or strict");
            }
            cfg.validation.mode = mode == "strict" ? ValidationPolicy::Mode::strict : ValidationPolicy::Mode::lenient;
            cfg.validation.gap_impact_tol = v.value("gap_impact_tol", cfg.validation.gap_impact_tol);
            cfg.validation.min_span = v.value("min_span", cfg.validation.min_span);
        }

        if (j.contains("metric_config")) {
            const json& m = j["metric_config"];
            allow_keys(m, "metric_config",
                       {"a_max_brake", "mass_ratio", "delta_v_high_threshold", "tnr_high_threshold", "sim_dt",
                        "accel_zero_snap", "accel_window"});
            MetricConfig& mc = cfg.metric_config;
            mc.a_max_brake = m.value("a_max_brake", mc.a_max_brake);
            mc.mass_ratio = m.value("mass_ratio", mc.mass_ratio);
            mc.delta_v_high_threshold = m.value("delta_v_high_threshold", mc.delta_v_high_threshold);
            mc.tnr_high_threshold = m.value("tnr_high_threshold", mc.tnr_high_threshold);
            mc.sim_dt = m.value("sim_dt", mc.sim_dt);
            mc.accel_zero_snap = m.value("accel_zero_snap", mc.accel_zero_snap);
            mc.accel_window = m.value("accel_window", mc.accel_window);
        }
        cfg.metric_config.validate();

        if (j.contains("sampler")) {
            const json& s = j["sampler"];
            allow_keys(s, "sampler", {"chains", "draws_per_chain", "warmup", "adapt_target_accept", "weight_mode"});
            SamplerConfig& sc = cfg.sampler;
            sc.chains = s.value("chains", sc.chains);
            sc.draws_per_chain = s.value("draws_per_chain", sc.draws_per_chain);
            sc.warmup = s.value("warmup", sc.warmup);
            sc.adapt_target_accept = s.value("adapt_target_accept", sc.adapt_target_accept);
            const std::string wm = s.value("weight_mode", std::string("normalized"));
            if (wm != "normalized" && wm != "raw") {
                fail("sampler.weight_mode must be normalized or raw");
            }
            sc.weight_mode = wm == "raw" ? WeightMode::raw : WeightMode::normalized;
        }
        cfg.sampler.validate();

        cfg.hdi_mass = j.value("hdi_mass", 0.95);
        if (!(cfg.hdi_mass > 0.0 && cfg.hdi_mass < 1.0)) {
            fail("hdi_mass must lie in (0, 1)");
        }

        // metrics
        const json& ms = j.at("metrics");
        allow_keys(ms, "metrics", {"delta_v_l", "t_nr", "a_l_min", "a_f_min"});
        json metrics_echo = json::object();
        for (Metric m : kAllMetrics) {
            const std::string name(to_string(m));
            if (!ms.contains(name)) {
                continue;
            }
            const json& mj = ms[name];
            const std::string where = "metrics." + name;
            allow_keys(mj, where, {"families", "transform", "truncation", "priors", "statistics"});
            MetricPlan plan;
            plan.metric = m;
            Transform t = default_transform(m);
            if (mj.contains("transform")) {
                const auto parsed = transform_from_string(mj["transform"].get<std::string>());
                if (!parsed) {
                    fail(where + ".transform must be identity or negate");
                }
                t = *parsed;
            }
            double lower = 0.0;
            double upper = kInf;
            if (mj.contains("truncation")) {
                const json& tr = mj["truncation"];
                if (!tr.is_array() || tr.size() != 2) {
                    fail(where + ".truncation must be [lower, upper] (null for an open end)");
                }
                lower = tr[0].is_null() ? -kInf : tr[0].get<double>();
                upper = tr[1].is_null() ? kInf : tr[1].get<double>();
                if (!(lower < upper)) {
                    fail(where + ".truncation needs lower < upper");
                }
            }
            if (mj.contains("families")) {
                for (const auto& f : mj["families"]) {
                    auto spec = model_spec_from_name(f.get<std::string>(), t);
                    if (!spec) {
                        fail(where + ": unknown family " + f.dump());
                    }
                    spec->lower = lower;
                    spec->upper = upper;
                    plan.candidates.push_back(*spec);
                }
            } else {
                plan.candidates = default_candidates(m);
                for (auto& c : plan.candidates) {
                    c.transform = t;
                    c.lower = lower;
                    c.upper = upper;
                }
            }
            if (plan.candidates.empty()) {
                fail(where + ": no candidate families");
            }
            std::set<std::string> seen;
            for (const auto& c : plan.candidates) {
                if (!seen.insert(c.name()).second) {
                    fail(where + ": family " + c.name() + " listed twice");
                }
            }
            if (mj.contains("priors")) {
                for (const auto& [fam_name, pj] : mj["priors"].items()) {
                    const auto fam = family_from_string(fam_name);
                    if (!fam) {
                        fail(where + ".priors: unknown family '" + fam_name + "'");
                    }
                    PriorSpec prior = PriorSpec::defaults(*fam);
                    const auto names = param_names(*fam);
                    for (const auto& [param, ppj] : pj.items()) {
                        const std::string pwhere = where + ".priors." + fam_name + "." + param;
                        if (param == "pi") {
                            prior.pi = parse_param_prior(ppj, pwhere);
                            continue;
                        }
                        const auto it = std::find(names.begin(), names.end(), param);
                        if (it == names.end()) {
                            fail(pwhere + ": no such parameter");
                        }
                        prior.params[static_cast<std::size_t>(it - names.begin())] = parse_param_prior(ppj, pwhere);
                    }
                    prior.validate(*fam);
                    plan.priors[*fam] = prior;
                }
            }
            if (!mj.contains("statistics") || mj["statistics"].empty()) {
                fail(where + ": at least one statistic is required");
            }
            for (const auto& sj : mj["statistics"]) {
                allow_keys(sj, where + ".statistics",
                           {"statistic", "restriction", "conditional", "threshold", "side",
                            "conditional_on_nonmass"});
                json with_metric = sj;
                with_metric["metric"] = name;
                StatisticSpec spec = with_metric.get<StatisticSpec>();
                spec.validate();
                for (const auto& prev : plan.statistics) {
                    if (prev.kind == spec.kind) {
                        fail(where + ": duplicate statistic " + std::string(to_string(spec.kind)));
                    }
                }
                plan.statistics.push_back(spec);
            }

            // normalised echo
            json fams = json::array();
            for (const auto& c : plan.candidates) {
                fams.push_back(c.name());
            }
            json priors = json::object();
            for (const auto& [fam, prior] : plan.priors) {
                json pj = json::object();
                const auto names = param_names(fam);
                for (std::size_t i = 0; i < prior.params.size(); ++i) {
                    pj[std::string(names[i])] = param_prior_json(prior.params[i]);
                }
                pj["pi"] = param_prior_json(prior.pi);
                priors[std::string(to_string(fam))] = pj;
            }
            json stats = json::array();
            for (const auto& s : plan.statistics) {
                stats.push_back(s);
            }
            metrics_echo[name] = json{{"families", fams},
                                      {"transform", to_string(t)},
                                      {"truncation", json::array({bound_json(lower), bound_json(upper)})},
                                      {"priors", priors},
                                      {"statistics", stats}};
            cfg.metrics.push_back(std::move(plan));
        }
        if (cfg.metrics.empty()) {
            fail("no metrics configured");
        }

        // ROPEs
        json ropes_echo = json::array();
        for (const auto& rj : j.at("ropes")) {
            allow_keys(rj, "ropes[]", {"metric", "statistic", "rope", "mass"});
            RopeSpec r;
            r.metric = parse_metric(rj.at("metric"));
            const auto kind = statistic_kind_from_string(rj.at("statistic").get<std::string>());
            if (!kind) {
                fail("ropes[]: unknown statistic " + rj.at("statistic").dump());
            }
            r.statistic = *kind;
            const json& iv = rj.at("rope");
            if (!iv.is_array() || iv.size() != 2) {
                fail("ropes[]: rope must be [lo, hi]");
            }
            r.lo = iv[0].get<double>();
            r.hi = iv[1].get<double>();
            r.mass = rj.value("mass", cfg.hdi_mass);
            r.validate();
            const MetricPlan* plan = cfg.plan(r.metric);
            const bool declared = plan != nullptr &&
                                  std::any_of(plan->statistics.begin(), plan->statistics.end(),
                                              [&](const StatisticSpec& s) { return s.kind == r.statistic; });
            if (!declared) {
                fail("ROPE for undeclared statistic " + std::string(to_string(r.metric)) + "/" +
                     std::string(to_string(r.statistic)));
            }
            if (cfg.rope_for(r.metric, r.statistic) != nullptr) {
                fail("two ROPEs for " + std::string(to_string(r.metric)) + "/" + std::string(to_string(r.statistic)));
            }
            cfg.ropes.push_back(r);
            ropes_echo.push_back(json{{"metric", to_string(r.metric)},
                                      {"statistic", to_string(r.statistic)},
                                      {"rope", json::array({r.lo, r.hi})},
                                      {"mass", r.mass}});
        }
        for (const auto& plan : cfg.metrics) {
            for (const auto& s : plan.statistics) {
                if (cfg.rope_for(plan.metric, s.kind) == nullptr) {
                    fail("statistic " + s.symbol() + " has no ROPE");
                }
            }
        }

        // overall rule
        const json& oj = j.at("overall_rule");
        allow_keys(oj, "overall_rule", {"required", "quorum", "relaxation_factor"});
        json required_echo = json::array();
        for (const auto& m : oj.at("required")) {
            const Metric metric = parse_metric(m);
            if (cfg.plan(metric) == nullptr) {
                fail("required metric " + std::string(to_string(metric)) + " is not configured");
            }
            cfg.rule.required.push_back(metric);
            required_echo.push_back(to_string(metric));
        }
        cfg.rule.quorum = oj.value("quorum", std::size_t{0});
        cfg.rule.relaxation_factor = oj.value("relaxation_factor", 1.25);
        cfg.rule.validate();
        if (cfg.rule.quorum > cfg.metrics.size() - cfg.rule.required.size()) {
            fail("overall_rule.quorum exceeds the number of non-required metrics");
        }

        if (j.contains("significance")) {
            const json& sj = j["significance"];
            allow_keys(sj, "significance", {"alpha", "permutation", "permutations"});
            cfg.significance.alpha = sj.value("alpha", 0.05);
            cfg.significance.permutation = sj.value("permutation", true);
            cfg.significance.permutations = sj.value("permutations", std::size_t{2000});
            if (!(cfg.significance.alpha > 0.0 && cfg.significance.alpha < 1.0)) {
                fail("significance.alpha must lie in (0, 1)");
            }
            if (cfg.significance.permutation && cfg.significance.permutations < 2000) {
                fail("significance.permutations must be >= 2000");
            }
        }
        cfg.rope_notes = j.value("rope_notes", std::string());

        const ValidationPolicy& vp = cfg.validation;
        const MetricConfig& mc = cfg.metric_config;
        const SamplerConfig& sc = cfg.sampler;
        echo = json{
            {"run_id", cfg.run_id},
            {"seed", cfg.seed},
            {"datasets", ds_echo},
            {"validation",
             {{"mode", vp.mode == ValidationPolicy::Mode::strict ? "strict" : "lenient"},
              {"gap_impact_tol", vp.gap_impact_tol},
              {"min_span", vp.min_span}}},
            {"metric_config",
             {{"a_max_brake", mc.a_max_brake},
              {"mass_ratio", mc.mass_ratio},
              {"delta_v_high_threshold", mc.delta_v_high_threshold},
              {"tnr_high_threshold", mc.tnr_high_threshold},
              {"sim_dt", mc.sim_dt},
              {"accel_zero_snap", mc.accel_zero_snap},
              {"accel_window", mc.accel_window}}},
            {"sampler",
             {{"chains", sc.chains},
              {"draws_per_chain", sc.draws_per_chain},
              {"warmup", sc.warmup},
              {"adapt_target_accept", sc.adapt_target_accept},
              {"weight_mode", sc.weight_mode == WeightMode::raw ? "raw" : "normalized"}}},
            {"metrics", metrics_echo},
            {"ropes", ropes_echo},
            {"overall_rule",
             {{"required", required_echo},
              {"quorum", cfg.rule.quorum},
              {"relaxation_factor", cfg.rule.relaxation_factor}}},
            {"significance",
             {{"alpha", cfg.significance.alpha},
              {"permutation", cfg.significance.permutation},
              {"permutations", cfg.significance.permutations}}},
            {"hdi_mass", cfg.hdi_mass},
            {"rope_notes", cfg.rope_notes},
        };
    } catch (const json::exception& e) {
        fail(std::string("config: ") + e.what());
    }
    cfg.canonical = std::move(echo);
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path, std::optional<std::uint64_t> seed_override) {
    if (!std::filesystem::exists(path)) {
        throw Error(ErrorCode::io, "config file not found: " + path.string());
    }
    return parse_run_config(text::read_file(path), path.parent_path(), seed_override);
}

}  // namespace equivcheck
