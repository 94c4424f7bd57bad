#pragma once

#include "equivcheck/parallel.hpp"
#include "equivcheck/scenario.hpp"

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace equivcheck {

enum class Metric { delta_v_l, t_nr, a_l_min, a_f_min };

inline constexpr std::array<Metric, 4> kAllMetrics{Metric::delta_v_l, Metric::t_nr, Metric::a_l_min,
                                                   Metric::a_f_min};

std::string_view to_string(Metric m);
std::optional<Metric> metric_from_string(std::string_view name);

struct MetricConfig {
    double a_max_brake = 9.0;              // m/s^2, applied as deceleration
    double mass_ratio = 1.0;               // m_follow / m_lead
    double delta_v_high_threshold = 15.0 / 3.6;  // m/s
    double tnr_high_threshold = 1.0;       // s
    double sim_dt = 0.01;                  // s
    double accel_zero_snap = 0.05;         // m/s^2
    double accel_window = 5.0;             // s before impact

    void validate() const;
};

/// Lead-vehicle Delta-v for a perfectly plastic impact:
/// (r / (1 + r)) * max(0, v_f(0) - v_l(0)), r = m_f / m_l.
double extract_delta_v(const Scenario& s, const MetricConfig& cfg);

struct NoReturnTime {
    double t_nr = 0.0;
    bool censored_at_start = false;
};

/// Whether constant full braking launched at grid index `launch` avoids the
/// collision. The lead replays its recorded speed; past the last sample it
/// holds its final speed. Exposed for boundary-property checks.
bool braking_avoids_collision(const Scenario& uniform, std::size_t launch, double a_max_brake);

/// Latest pre-impact time at which full braking can no longer avoid the
/// crash: launching at the result collides, launching one step earlier
/// avoids. Requires a uniform sim_dt grid (see resample_uniform).
NoReturnTime extract_no_return_time(const Scenario& uniform, const MetricConfig& cfg);

struct MinAccels {
    double a_l_min = 0.0;
    double a_f_min = 0.0;
};

/// Minimum finite-difference accelerations over the pre-impact window.
/// Values not below -snap are set to exactly 0 (non-braking point mass).
MinAccels extract_min_accels(const Scenario& s, double snap = 0.05, double window = 5.0);

enum RowFlag : unsigned {
    kFlagNone = 0,
    kFlagCensoredAtStart = 1U << 0,
};

struct MetricRow {
    std::string scenario_id;
    Metric metric;
    double value = 0.0;
    double weight = 0.0;
    unsigned flags = kFlagNone;

    friend bool operator==(const MetricRow&, const MetricRow&) = default;
};

struct MetricTable {
    std::string dataset_label;
    std::vector<MetricRow> rows;  // scenario order, metrics in kAllMetrics order

    std::vector<double> values(Metric m) const;
    std::vector<double> weights(Metric m) const;
};

/// One row per (scenario, metric). Scenarios are processed independently;
/// the parallel path writes into per-scenario slots, so output is identical
/// to the serial path for any thread count.
MetricTable build_metric_table(const ScenarioSet& set, const MetricConfig& cfg,
                               Exec exec = Exec::parallel);

void write_metric_table(std::ostream& out, const MetricTable& table);
MetricTable read_metric_table(std::istream& in);

}  // namespace equivcheck
