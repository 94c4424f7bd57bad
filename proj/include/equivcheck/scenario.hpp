#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <vector>

namespace equivcheck {

/// One time step of a longitudinal pre-crash trace. Units: s, m, m/s.
struct Sample {
    double t = 0.0;
    double gap = 0.0;
    double v_lead = 0.0;
    double v_follow = 0.0;

    friend bool operator==(const Sample&, const Sample&) = default;
};

/// A rear-end pre-crash time series ending at impact (t = 0).
struct Scenario {
    std::string id;
    std::vector<Sample> samples;  // strictly increasing t
    double weight = 1.0;

    friend bool operator==(const Scenario&, const Scenario&) = default;
};

struct ScenarioSet {
    std::string label;
    std::vector<Scenario> scenarios;

    double weight_total() const;
};

enum class ScenarioFormat { long_csv };

/// Parses the long-form CSV format
///     scenario_id,t,gap,v_lead,v_follow[,weight]
/// Scenarios keep first-appearance order; samples are sorted by t.
ScenarioSet parse_scenario_file(std::istream& source, std::string label,
                                ScenarioFormat format = ScenarioFormat::long_csv);
ScenarioSet load_scenario_file(const std::string& path, std::string label);

/// Emits the same format, always with the weight column.
void write_scenario_file(std::ostream& out, const ScenarioSet& set);

enum class ViolationKind {
    non_monotone_time,
    final_time_not_zero,
    negative_gap,
    negative_speed,
    negative_weight,
    short_span,
    final_gap,
    too_few_samples,
};

struct Violation {
    ViolationKind kind;
    std::string message;
    bool rejecting = true;
};

struct ValidationPolicy {
    enum class Mode { lenient, strict };
    Mode mode = Mode::lenient;
    double gap_impact_tol = 0.05;
    double min_span = 5.0;
    double time_tol = 1e-9;
};

struct ValidationReport {
    std::vector<Violation> violations;

    bool rejected() const;
    bool clean() const { return violations.empty(); }
};

/// Under the lenient policy a short span or a residual final gap is flagged
/// but not rejecting; every violation rejects under the strict policy.
ValidationReport validate_scenario(const Scenario& s, const ValidationPolicy& policy = {});

/// Linearly interpolates onto t_k = t_end - k*dt for k = 0..K, where t_0 is
/// the earliest grid point not before the first sample. The impact sample is
/// always kept; the first sample is kept when the span is a multiple of dt.
Scenario resample_uniform(const Scenario& s, double dt);

/// True when consecutive samples are spaced dt apart (to 1e-6 relative).
bool is_uniform_grid(const Scenario& s, double dt);

}  // namespace equivcheck
