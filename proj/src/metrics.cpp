#include "equivcheck/metrics.hpp"

#include "equivcheck/error.hpp"
#include "equivcheck/text_io.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>

namespace equivcheck {

std::string_view to_string(Metric m) {
    switch (m) {
        case Metric::delta_v_l: return "delta_v_l";
        case Metric::t_nr: return "t_nr";
        case Metric::a_l_min: return "a_l_min";
        case Metric::a_f_min: return "a_f_min";
    }
    return "unknown";
}

std::optional<Metric> metric_from_string(std::string_view name) {
    for (Metric m : kAllMetrics) {
        if (to_string(m) == name) {
            return m;
        }
    }
    return std::nullopt;
}

void MetricConfig::validate() const {
    const bool ok = a_max_brake > 0.0 && mass_ratio > 0.0 && delta_v_high_threshold > 0.0 &&
                    tnr_high_threshold > 0.0 && sim_dt > 0.0 && accel_zero_snap > 0.0 &&
                    accel_window > 0.0;
    if (!ok) {
        throw Error(ErrorCode::config, "metric configuration values must be strictly positive");
    }
}

double extract_delta_v(const Scenario& s, const MetricConfig& cfg) {
    if (s.samples.empty()) {
        throw Error(ErrorCode::insufficient_data, "scenario '" + s.id + "' has no impact sample");
    }
    const Sample& impact = s.samples.back();
    const double closing = std::max(0.0, impact.v_follow - impact.v_lead);
    const double r = cfg.mass_ratio;
    return r / (1.0 + r) * closing;
}

bool braking_avoids_collision(const Scenario& uniform, std::size_t launch, double a_max_brake) {
    const auto& p = uniform.samples;
    const double g0 = p[launch].gap;
    if (g0 <= 0.0) {
        return false;
    }
    const double v0 = p[launch].v_follow;
    const double t0 = p[launch].t;
    const double stop_time = v0 / a_max_brake;
    auto follower_travel = [&](double tau) {
        if (tau >= stop_time) {
            return v0 * v0 / (2.0 * a_max_brake);
        }
        return v0 * tau - 0.5 * a_max_brake * tau * tau;
    };

    double lead_travel = 0.0;
    double gap = g0;
    for (std::size_t k = launch + 1; k < p.size(); ++k) {
        lead_travel += 0.5 * (p[k - 1].v_lead + p[k].v_lead) * (p[k].t - p[k - 1].t);
        gap = g0 + lead_travel - follower_travel(p[k].t - t0);
        if (gap <= 0.0) {
            return false;
        }
    }
    // Beyond the recording the lead holds its last speed; the gap keeps
    // shrinking until the braking follower has slowed to that speed.
    const double tau_end = p.back().t - t0;
    const double v_end = std::max(0.0, v0 - a_max_brake * tau_end);
    const double v_lead_end = p.back().v_lead;
    if (v_end > v_lead_end) {
        const double rel = v_end - v_lead_end;
        if (gap - rel * rel / (2.0 * a_max_brake) <= 0.0) {
            return false;
        }
    }
    return true;
}

NoReturnTime extract_no_return_time(const Scenario& uniform, const MetricConfig& cfg) {
    if (!is_uniform_grid(uniform, cfg.sim_dt)) {
        throw Error(ErrorCode::precondition,
                    "scenario '" + uniform.id + "' is not on a uniform " +
                        text::format_double(cfg.sim_dt) + " s grid; resample first");
    }
    const auto& p = uniform.samples;
    const std::size_t last = p.size() - 1;
    for (std::size_t j = last + 1; j-- > 0;) {
        if (braking_avoids_collision(uniform, j, cfg.a_max_brake)) {
            return NoReturnTime{p[std::min(j + 1, last)].t, false};
        }
    }
    return NoReturnTime{p.front().t, true};
}

MinAccels extract_min_accels(const Scenario& s, double snap, double window) {
    const auto& p = s.samples;
    if (p.size() < 2) {
        throw Error(ErrorCode::insufficient_data,
                    "scenario '" + s.id + "' needs at least 2 samples for accelerations");
    }
    const std::size_t n = p.size();
    const double t_from = p.back().t - window - 1e-9;
    double a_l = std::numeric_limits<double>::infinity();
    double a_f = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        if (p[i].t < t_from) {
            continue;
        }
        const std::size_t lo = i == 0 ? 0 : i - 1;
        const std::size_t hi = i + 1 == n ? n - 1 : i + 1;
        const double dt = p[hi].t - p[lo].t;
        a_l = std::min(a_l, (p[hi].v_lead - p[lo].v_lead) / dt);
        a_f = std::min(a_f, (p[hi].v_follow - p[lo].v_follow) / dt);
    }
    auto snap_zero = [snap](double a) { return a >= -snap ? 0.0 : a; };
    return MinAccels{snap_zero(a_l), snap_zero(a_f)};
}

std::vector<double> MetricTable::values(Metric m) const {
    std::vector<double> out;
    for (const auto& r : rows) {
        if (r.metric == m) {
            out.push_back(r.value);
        }
    }
    return out;
}

std::vector<double> MetricTable::weights(Metric m) const {
    std::vector<double> out;
    for (const auto& r : rows) {
        if (r.metric == m) {
            out.push_back(r.weight);
        }
    }
    return out;
}

namespace {

std::array<MetricRow, 4> extract_rows(const Scenario& s, const MetricConfig& cfg) {
    try {
        const double dv = extract_delta_v(s, cfg);
        const NoReturnTime tnr = extract_no_return_time(resample_uniform(s, cfg.sim_dt), cfg);
        const MinAccels acc = extract_min_accels(s, cfg.accel_zero_snap, cfg.accel_window);
        return {MetricRow{s.id, Metric::delta_v_l, dv, s.weight, kFlagNone},
                MetricRow{s.id, Metric::t_nr, tnr.t_nr, s.weight,
                          tnr.censored_at_start ? kFlagCensoredAtStart : kFlagNone},
                MetricRow{s.id, Metric::a_l_min, acc.a_l_min, s.weight, kFlagNone},
                MetricRow{s.id, Metric::a_f_min, acc.a_f_min, s.weight, kFlagNone}};
    } catch (const Error& e) {
        throw Error(e.code(), "scenario '" + s.id + "': " + e.what());
    }
}

}  // namespace

MetricTable build_metric_table(const ScenarioSet& set, const MetricConfig& cfg, Exec exec) {
    cfg.validate();
    const auto n = static_cast<std::ptrdiff_t>(set.scenarios.size());
    std::vector<std::array<MetricRow, 4>> slots(set.scenarios.size());

    if (exec == Exec::serial) {
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            slots[i] = extract_rows(set.scenarios[i], cfg);
        }
    } else {
        // first failing scenario (lowest index) wins, as in the serial path
        std::vector<std::optional<Error>> errors(set.scenarios.size());
#pragma omp parallel for schedule(dynamic, 16) num_threads(jobs())
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            try {
                slots[i] = extract_rows(set.scenarios[i], cfg);
            } catch (const Error& e) {
                errors[i] = e;
            }
        }
        for (auto& e : errors) {
            if (e) {
                throw *e;
            }
        }
    }

    MetricTable table{set.label, {}};
    table.rows.reserve(slots.size() * 4);
    for (auto& s : slots) {
        for (auto& r : s) {
            table.rows.push_back(std::move(r));
        }
    }
    return table;
}

void write_metric_table(std::ostream& out, const MetricTable& table) {
    out << "dataset,scenario_id,metric,value,weight,flags\n";
    for (const auto& r : table.rows) {
        out << table.dataset_label << ',' << r.scenario_id << ',' << to_string(r.metric) << ','
            << text::format_double(r.value) << ',' << text::format_double(r.weight) << ','
            << ((r.flags & kFlagCensoredAtStart) ? "censored_at_start" : "") << '\n';
    }
}

MetricTable read_metric_table(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    MetricTable table;
    bool header = false;
    while (std::getline(in, line)) {
        ++line_no;
        const auto view = text::trim(line);
        if (view.empty()) {
            continue;
        }
        if (!header) {
            if (view != "dataset,scenario_id,metric,value,weight,flags") {
                throw Error(ErrorCode::parse, "metric table: unexpected header");
            }
            header = true;
            continue;
        }
        const auto f = text::split(view, ',');
        MetricRow row;
        const auto metric = f.size() == 6 ? metric_from_string(f[2]) : std::nullopt;
        if (!metric || !text::parse_double(f[3], row.value) || !text::parse_double(f[4], row.weight)) {
            throw Error(ErrorCode::parse, "metric table line " + std::to_string(line_no) + ": malformed row");
        }
        table.dataset_label = std::string(f[0]);
        row.scenario_id = std::string(f[1]);
        row.metric = *metric;
        row.flags = text::trim(f[5]) == "censored_at_start" ? kFlagCensoredAtStart : kFlagNone;
        table.rows.push_back(std::move(row));
    }
    if (table.rows.empty()) {
        throw Error(ErrorCode::empty_input, "metric table has no rows");
    }
    return table;
}

}  // namespace equivcheck
