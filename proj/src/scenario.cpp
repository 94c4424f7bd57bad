#include "equivcheck/scenario.hpp"

#include "equivcheck/error.hpp"
#include "equivcheck/text_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace equivcheck {

double ScenarioSet::weight_total() const {
    double total = 0.0;
    for (const auto& s : scenarios) {
        total += s.weight;
    }
    return total;
}

namespace {

constexpr std::string_view kHeader5 = "scenario_id,t,gap,v_lead,v_follow";
constexpr std::string_view kHeader6 = "scenario_id,t,gap,v_lead,v_follow,weight";

[[noreturn]] void parse_fail(std::size_t line_no, const std::string& what) {
    throw Error(ErrorCode::parse, "line " + std::to_string(line_no) + ": " + what);
}

std::string fmt_seconds(double v) {
    std::ostringstream ss;
    ss.precision(3);
    ss << v;
    return ss.str();
}

}  // namespace

ScenarioSet parse_scenario_file(std::istream& source, std::string label, ScenarioFormat format) {
    if (format != ScenarioFormat::long_csv) {
        throw Error(ErrorCode::parse, "unsupported scenario format");
    }
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    bool has_weight = false;

    ScenarioSet set;
    set.label = std::move(label);
    std::unordered_map<std::string, std::size_t> index;

    while (std::getline(source, line)) {
        ++line_no;
        std::string_view view = text::trim(line);
        if (line_no == 1 && view.size() >= 3 && static_cast<unsigned char>(view[0]) == 0xEF) {
            view.remove_prefix(3);  // UTF-8 BOM
        }
        if (view.empty()) {
            continue;
        }
        if (!have_header) {
            if (view == kHeader6) {
                has_weight = true;
            } else if (view != kHeader5) {
                parse_fail(line_no, "unexpected header '" + std::string(view) + "'");
            }
            have_header = true;
            continue;
        }
        const auto fields = text::split(view, ',');
        const std::size_t expected = has_weight ? 6 : 5;
        if (fields.size() != expected) {
            parse_fail(line_no, "expected " + std::to_string(expected) + " fields, got " +
                                    std::to_string(fields.size()));
        }
        const std::string id(text::trim(fields[0]));
        if (id.empty()) {
            parse_fail(line_no, "empty scenario_id");
        }
        Sample sample;
        double weight = 1.0;
        if (!text::parse_double(fields[1], sample.t) || !text::parse_double(fields[2], sample.gap) ||
            !text::parse_double(fields[3], sample.v_lead) ||
            !text::parse_double(fields[4], sample.v_follow) ||
            (has_weight && !text::parse_double(fields[5], weight))) {
            parse_fail(line_no, "malformed numeric field");
        }
        if (!std::isfinite(sample.t) || !std::isfinite(sample.gap) || !std::isfinite(sample.v_lead) ||
            !std::isfinite(sample.v_follow) || !std::isfinite(weight)) {
            parse_fail(line_no, "non-finite value");
        }
        auto [it, inserted] = index.try_emplace(id, set.scenarios.size());
        if (inserted) {
            set.scenarios.push_back(Scenario{id, {}, weight});
        } else if (set.scenarios[it->second].weight != weight) {
            parse_fail(line_no, "weight changes within scenario '" + id + "'");
        }
        set.scenarios[it->second].samples.push_back(sample);
    }

    if (set.scenarios.empty()) {
        throw Error(ErrorCode::empty_input, "no scenario rows in input");
    }
    for (auto& s : set.scenarios) {
        std::stable_sort(s.samples.begin(), s.samples.end(),
                         [](const Sample& a, const Sample& b) { return a.t < b.t; });
        for (std::size_t i = 1; i < s.samples.size(); ++i) {
            if (s.samples[i].t == s.samples[i - 1].t) {
                throw Error(ErrorCode::duplicate_sample,
                            "duplicate sample for scenario '" + s.id + "' at t = " +
                                text::format_double(s.samples[i].t));
            }
        }
    }
    return set;
}

ScenarioSet load_scenario_file(const std::string& path, std::string label) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::io, "cannot open scenario file " + path);
    }
    return parse_scenario_file(in, std::move(label));
}

void write_scenario_file(std::ostream& out, const ScenarioSet& set) {
    out << kHeader6 << '\n';
    for (const auto& s : set.scenarios) {
        const std::string w = text::format_double(s.weight);
        for (const auto& p : s.samples) {
            out << s.id << ',' << text::format_double(p.t) << ',' << text::format_double(p.gap) << ','
                << text::format_double(p.v_lead) << ',' << text::format_double(p.v_follow) << ',' << w
                << '\n';
        }
    }
}

bool ValidationReport::rejected() const {
    return std::any_of(violations.begin(), violations.end(),
                       [](const Violation& v) { return v.rejecting; });
}

ValidationReport validate_scenario(const Scenario& s, const ValidationPolicy& policy) {
    ValidationReport report;
    const bool strict = policy.mode == ValidationPolicy::Mode::strict;
    auto add = [&](ViolationKind kind, std::string message, bool rejecting) {
        report.violations.push_back(Violation{kind, std::move(message), rejecting || strict});
    };

    if (s.weight < 0.0) {
        add(ViolationKind::negative_weight, "negative weight", true);
    }
    if (s.samples.size() < 2) {
        add(ViolationKind::too_few_samples, "fewer than 2 samples", true);
        return report;
    }
    for (std::size_t i = 1; i < s.samples.size(); ++i) {
        if (!(s.samples[i].t > s.samples[i - 1].t)) {
            add(ViolationKind::non_monotone_time,
                "non-monotone time at sample " + std::to_string(i), true);
            break;
        }
    }
    if (std::any_of(s.samples.begin(), s.samples.end(), [](const Sample& p) { return p.gap < 0.0; })) {
        add(ViolationKind::negative_gap, "negative gap", true);
    }
    if (std::any_of(s.samples.begin(), s.samples.end(),
                    [](const Sample& p) { return p.v_lead < 0.0 || p.v_follow < 0.0; })) {
        add(ViolationKind::negative_speed, "negative speed", true);
    }
    const Sample& last = s.samples.back();
    if (std::abs(last.t) > policy.time_tol) {
        add(ViolationKind::final_time_not_zero,
            "final time " + text::format_double(last.t) + " s is not the impact time 0", true);
    }
    if (last.gap > policy.gap_impact_tol) {
        add(ViolationKind::final_gap,
            "final gap " + fmt_seconds(last.gap) + " m exceeds " + fmt_seconds(policy.gap_impact_tol) +
                " m",
            false);
    }
    const double span = last.t - s.samples.front().t;
    if (span < policy.min_span - policy.time_tol) {
        add(ViolationKind::short_span,
            "short span (" + fmt_seconds(span) + " s < " + fmt_seconds(policy.min_span) + " s)", false);
    }
    return report;
}

Scenario resample_uniform(const Scenario& s, double dt) {
    if (!(dt > 0.0)) {
        throw Error(ErrorCode::precondition, "resample step must be positive");
    }
    if (s.samples.size() < 2) {
        throw Error(ErrorCode::insufficient_data,
                    "scenario '" + s.id + "' needs at least 2 samples to resample");
    }
    const double t_start = s.samples.front().t;
    const double t_end = s.samples.back().t;
    const auto steps = static_cast<std::size_t>(std::floor((t_end - t_start) / dt + 1e-9));

    Scenario out{s.id, {}, s.weight};
    out.samples.reserve(steps + 1);
    std::size_t seg = 0;
    for (std::size_t i = 0; i <= steps; ++i) {
        double t = t_end - static_cast<double>(steps - i) * dt;
        if (i == 0 && std::abs(t - t_start) <= 1e-9 * dt) {
            t = t_start;
        }
        if (i == steps) {
            t = t_end;
        }
        t = std::max(t, t_start);
        while (seg + 2 < s.samples.size() && s.samples[seg + 1].t < t) {
            ++seg;
        }
        const Sample& a = s.samples[seg];
        const Sample& b = s.samples[seg + 1];
        const double f = std::clamp((t - a.t) / (b.t - a.t), 0.0, 1.0);
        auto lerp = [f](double x, double y) { return (1.0 - f) * x + f * y; };
        out.samples.push_back(
            Sample{t, lerp(a.gap, b.gap), lerp(a.v_lead, b.v_lead), lerp(a.v_follow, b.v_follow)});
    }
    return out;
}

bool is_uniform_grid(const Scenario& s, double dt) {
    if (s.samples.size() < 2) {
        return false;
    }
    for (std::size_t i = 1; i < s.samples.size(); ++i) {
        const double step = s.samples[i].t - s.samples[i - 1].t;
        if (std::abs(step - dt) > 1e-6 * dt) {
            return false;
        }
    }
    return true;
}

}  // namespace equivcheck
