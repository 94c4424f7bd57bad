#pragma once

#include "equivcheck/bayes_fit.hpp"
#include "equivcheck/decision.hpp"
#include "equivcheck/equiv_stats.hpp"
#include "equivcheck/metrics.hpp"
#include "equivcheck/scenario.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace equivcheck {

struct DatasetConfig {
    std::filesystem::path path;  // resolved against the config directory
    std::string label;
};

/// What to fit and compare for one metric.
struct MetricPlan {
    Metric metric = Metric::delta_v_l;
    std::vector<ModelSpec> candidates;
    std::map<Family, PriorSpec> priors;  // families without an entry use PriorSpec::defaults
    std::vector<StatisticSpec> statistics;

    PriorSpec prior_for(Family f) const;
};

struct SignificanceConfig {
    double alpha = 0.05;
    bool permutation = true;
    std::size_t permutations = 2000;
};

struct RunConfig {
    std::string run_id = "run";
    std::uint64_t seed = 0;
    DatasetConfig reference;
    DatasetConfig candidate;
    ValidationPolicy validation;
    MetricConfig metric_config;
    SamplerConfig sampler;  // sampler.seed is replaced per fit by a derived seed
    std::vector<MetricPlan> metrics;
    std::vector<RopeSpec> ropes;
    OverallRule rule;
    SignificanceConfig significance;
    double hdi_mass = 0.95;
    std::string rope_notes;
    std::filesystem::path output_dir;  // empty when unset
    nlohmann::json canonical;          // normalised echo; input to the digest

    const MetricPlan* plan(Metric m) const;
    const RopeSpec* rope_for(Metric m, StatisticKind k) const;
    /// FNV-1a of the canonical echo, as 16 hex digits.
    std::string digest() const;
};

/// Default candidates: Delta-v and t_nr take {exponential, gamma, normal,
/// log_normal}; the accelerations take the point-mass mixtures of
/// {exponential, gamma, log_normal, truncated_normal}. t_nr and the
/// accelerations are modelled through their magnitudes (negate transform).
std::vector<ModelSpec> default_candidates(Metric m);
Transform default_transform(Metric m);

/// Parses and validates a JSON run configuration. Relative dataset and
/// output paths are taken relative to base_dir. seed_override replaces the
/// configured seed (and is what the digest sees).
RunConfig parse_run_config(std::string_view text, const std::filesystem::path& base_dir,
                           std::optional<std::uint64_t> seed_override = std::nullopt);
RunConfig load_run_config(const std::filesystem::path& path,
                          std::optional<std::uint64_t> seed_override = std::nullopt);

}  // namespace equivcheck
