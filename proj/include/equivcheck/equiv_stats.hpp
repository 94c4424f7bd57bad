#pragma once

#include "equivcheck/bayes_fit.hpp"
#include "equivcheck/distributions.hpp"
#include "equivcheck/metrics.hpp"
#include "equivcheck/parallel.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace equivcheck {

enum class StatisticKind { mean_diff, ks_distance, proportion_ratio };

std::string_view to_string(StatisticKind k);
std::optional<StatisticKind> statistic_kind_from_string(std::string_view name);

/// Closed interval on the metric axis; either end may be infinite.
struct Interval {
    double lo = -kInf;
    double hi = kInf;
    friend bool operator==(const Interval&, const Interval&) = default;
};

struct StatisticSpec {
    StatisticKind kind = StatisticKind::mean_diff;
    Metric metric = Metric::delta_v_l;
    std::optional<Interval> restriction;  // ks_distance only
    bool conditional = true;              // renormalise CDFs to the restriction
    std::optional<double> threshold;      // proportion_ratio only
    TailSide side = TailSide::geq;
    bool conditional_on_nonmass = false;  // ks_distance on continuous parts only

    void validate() const;
    /// Short label such as "D(t_nr)" for tables.
    std::string symbol() const;
    friend bool operator==(const StatisticSpec&, const StatisticSpec&) = default;
};

struct HdiInterval {
    double lo = 0.0;
    double hi = 0.0;
    double mass = 0.95;
    friend bool operator==(const HdiInterval&, const HdiInterval&) = default;
};

/// Narrowest window of ceil(mass * n) consecutive order statistics; ties go
/// to the lowest start. Needs >= 20 draws and 0 < mass < 1.
HdiInterval hdi(std::span<const double> draws, double mass = 0.95);

struct KsOptions {
    std::optional<Interval> restriction;
    bool conditional = true;
    bool nonmass = false;  // drop atoms and compare continuous parts
};

/// sup |F_a(x) - F_b(x)| over the (restricted) metric axis. Candidates are
/// 2048 quantiles of each model inside the region, atoms (both one-sided
/// limits) and the region ends; the best grid bracket is then refined by
/// golden-section search.
double ks_distance_models(const ModelInstance& a, const ModelInstance& b, const KsOptions& opts = {});

/// Statistic value for one (reference, candidate) model pair.
double statistic_value(const ModelInstance& reference, const ModelInstance& candidate, const StatisticSpec& spec);

/// One statistic value per model pair, no HDI. Works for any number of
/// pairs, including one.
std::vector<double> compute_statistic_draws(std::span<const ModelInstance> reference,
                                            std::span<const ModelInstance> candidate, const StatisticSpec& spec,
                                            Exec exec = Exec::parallel);

enum class Pairing { permuted, identity };

struct StatisticPosterior {
    StatisticSpec spec;
    std::vector<double> draws;  // pairing order
    HdiInterval hdi;
    double point_estimate = 0.0;  // posterior median
    std::uint64_t pairing_seed = 0;
    Pairing pairing = Pairing::permuted;
};

/// Pairs draw s of the reference fit with draw perm[s] of the candidate fit
/// (perm a seeded uniform permutation, or the identity) over the first
/// min(S_a, S_b) reference draws. For mixture fits a KS spec is evaluated
/// on the continuous parts. Ratios are candidate tail mass over reference
/// tail mass.
StatisticPosterior posterior_statistic(const PosteriorFit& reference, const PosteriorFit& candidate,
                                       const StatisticSpec& spec, std::uint64_t pairing_seed,
                                       Pairing pairing = Pairing::permuted, double mass = 0.95,
                                       Exec exec = Exec::parallel);

/// Uniform random permutation of 0..n-1 (Fisher-Yates on Rng).
std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed);

double median(std::vector<double> values);

/// JSON form used by configs and artifacts; an infinite restriction end is
/// written as null.
void to_json(nlohmann::json& j, const StatisticSpec& spec);
void from_json(const nlohmann::json& j, StatisticSpec& spec);

/// Writes <dir>/<stem>.draws.csv and <dir>/<stem>.json; the JSON record has
/// keys {metric, statistic, draws_file, hdi, mass, point_estimate} plus the
/// statistic settings needed to read it back.
void save_statistic(const std::filesystem::path& dir, const std::string& stem, const StatisticPosterior& post);
StatisticPosterior load_statistic(const std::filesystem::path& json_path);

}  // namespace equivcheck
