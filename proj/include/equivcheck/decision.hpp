#pragma once

#include "equivcheck/equiv_stats.hpp"
#include "equivcheck/freq_ks.hpp"
#include "equivcheck/metrics.hpp"

#include <json.hpp>

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace equivcheck {

struct RopeSpec {
    Metric metric = Metric::delta_v_l;
    StatisticKind statistic = StatisticKind::mean_diff;
    double lo = 0.0;
    double hi = 0.0;
    double mass = 0.95;

    void validate() const;
    friend bool operator==(const RopeSpec&, const RopeSpec&) = default;
};

/// Closed containment: rope.lo <= hdi.lo and hdi.hi <= rope.hi.
bool rope_test(const HdiInterval& hdi, const RopeSpec& rope);

/// Same midpoint, factor times the width. factor >= 1.
RopeSpec widen_rope(const RopeSpec& rope, double factor);

struct StatisticInput {
    StatisticSpec spec;
    HdiInterval hdi;
    double point_estimate = 0.0;
    RopeSpec rope;
};

struct StatisticResult {
    StatisticSpec spec;
    HdiInterval hdi;
    double point_estimate = 0.0;
    RopeSpec rope;
    RopeSpec relaxed_rope;
    bool pass = false;
    bool relaxed_pass = false;
};

struct MetricVerdict {
    Metric metric = Metric::delta_v_l;
    std::vector<StatisticResult> results;
    bool equivalent = false;
};

/// Equivalent iff every statistic passes. Statistic kinds must be distinct
/// and all inputs must name the same metric.
MetricVerdict metric_verdict(std::span<const StatisticInput> inputs, double relaxation_factor = 1.25);

struct OverallRule {
    std::vector<Metric> required;
    std::size_t quorum = 0;  // of the metrics not in `required`
    double relaxation_factor = 1.25;

    void validate() const;
};

struct RationaleEntry {
    std::string clause;
    std::string outcome;  // "pass" or "fail"
    std::string detail;
    friend bool operator==(const RationaleEntry&, const RationaleEntry&) = default;
};

struct OverallVerdict {
    bool equivalent = false;
    std::vector<RationaleEntry> rationale;
};

/// Equivalent iff all required metrics pass, at least `quorum` of the others
/// pass, and every other metric that fails still passes all its statistics
/// under the relaxed ROPEs.
OverallVerdict overall_verdict(std::span<const MetricVerdict> verdicts, const OverallRule& rule);

struct MetricReport {
    MetricVerdict verdict;
    std::string model_reference;
    std::string model_candidate;
    std::vector<std::string> warnings;
};

struct SignificanceRow {
    Metric metric = Metric::delta_v_l;
    KsTestResult asymptotic;
    std::optional<KsTestResult> permutation;
    double alpha = 0.05;
    bool significant = false;  // asymptotic p < alpha
};

struct EquivalenceReport {
    std::string run_id;
    std::string config_digest;
    std::vector<MetricReport> metrics;
    OverallVerdict overall;
    std::vector<SignificanceRow> significance;
    nlohmann::json documentation = nlohmann::json::object();
};

/// Refuses (config error) when a metric has no statistics.
std::string render_report_json(const EquivalenceReport& report);
std::string render_report_markdown(const EquivalenceReport& report);
EquivalenceReport parse_report_json(std::string_view text);

}  // namespace equivcheck
