#include "equivcheck/decision.hpp"

#include "equivcheck/error.hpp"
#include "equivcheck/text_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace equivcheck {

void RopeSpec::validate() const {
    const std::string where = std::string(to_string(metric)) + "/" + std::string(to_string(statistic));
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi)) {
        throw Error(ErrorCode::config, where + ": ROPE must be finite with lo < hi");
    }
    if (!(mass > 0.0 && mass < 1.0)) {
        throw Error(ErrorCode::config, where + ": ROPE mass must lie in (0, 1)");
    }
}

bool rope_test(const HdiInterval& hdi, const RopeSpec& rope) { return rope.lo <= hdi.lo && hdi.hi <= rope.hi; }

RopeSpec widen_rope(const RopeSpec& rope, double factor) {
    if (!(factor >= 1.0) || !std::isfinite(factor)) {
        throw Error(ErrorCode::precondition, "ROPE widening factor must be >= 1");
    }
    if (factor == 1.0) {
        return rope;
    }
    RopeSpec out = rope;
    const double mid = 0.5 * (rope.lo + rope.hi);
    const double half = 0.5 * factor * (rope.hi - rope.lo);
    out.lo = mid - half;
    out.hi = mid + half;
    return out;
}

MetricVerdict metric_verdict(std::span<const StatisticInput> inputs, double relaxation_factor) {
    if (inputs.empty()) {
        throw Error(ErrorCode::config, "metric verdict needs at least one statistic");
    }
    MetricVerdict v;
    v.metric = inputs.front().spec.metric;
    v.equivalent = true;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        const StatisticInput& in = inputs[i];
        if (in.spec.metric != v.metric || in.rope.metric != v.metric || in.rope.statistic != in.spec.kind) {
            throw Error(ErrorCode::config, "statistic and ROPE metrics disagree for " +
                                               std::string(to_string(v.metric)));
        }
        for (std::size_t j = 0; j < i; ++j) {
            if (inputs[j].spec.kind == in.spec.kind) {
                throw Error(ErrorCode::config, "duplicate " + std::string(to_string(in.spec.kind)) + " for " +
                                                   std::string(to_string(v.metric)));
            }
        }
        in.rope.validate();
        StatisticResult r;
        r.spec = in.spec;
        r.hdi = in.hdi;
        r.point_estimate = in.point_estimate;
        r.rope = in.rope;
        r.relaxed_rope = widen_rope(in.rope, relaxation_factor);
        r.pass = rope_test(in.hdi, in.rope);
        r.relaxed_pass = rope_test(in.hdi, r.relaxed_rope);
        v.equivalent = v.equivalent && r.pass;
        v.results.push_back(r);
    }
    return v;
}

void OverallRule::validate() const {
    if (!(relaxation_factor >= 1.0) || !std::isfinite(relaxation_factor)) {
        throw Error(ErrorCode::config, "relaxation_factor must be >= 1");
    }
    for (std::size_t i = 0; i < required.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            if (required[i] == required[j]) {
                throw Error(ErrorCode::config, "metric listed twice in required: " +
                                                   std::string(to_string(required[i])));
            }
        }
    }
}

OverallVerdict overall_verdict(std::span<const MetricVerdict> verdicts, const OverallRule& rule) {
    rule.validate();
    auto find = [&](Metric m) -> const MetricVerdict* {
        for (const auto& v : verdicts) {
            if (v.metric == m) {
                return &v;
            }
        }
        return nullptr;
    };
    OverallVerdict out;
    bool ok = true;
    for (Metric m : rule.required) {
        const MetricVerdict* v = find(m);
        if (v == nullptr) {
            throw Error(ErrorCode::config, "required metric " + std::string(to_string(m)) + " has no verdict");
        }
        std::string failing;
        for (const auto& r : v->results) {
            if (!r.pass) {
                failing += (failing.empty() ? "" : ", ") + r.spec.symbol();
            }
        }
        out.rationale.push_back({"required:" + std::string(to_string(m)), v->equivalent ? "pass" : "fail",
                                 v->equivalent ? "all statistics inside their ROPEs"
                                               : "HDI outside ROPE for " + failing});
        ok = ok && v->equivalent;
    }

    std::vector<const MetricVerdict*> remaining;
    for (const auto& v : verdicts) {
        if (std::find(rule.required.begin(), rule.required.end(), v.metric) == rule.required.end()) {
            remaining.push_back(&v);
        }
    }
    if (rule.quorum > remaining.size()) {
        throw Error(ErrorCode::config, "quorum " + std::to_string(rule.quorum) + " exceeds the " +
                                           std::to_string(remaining.size()) + " non-required metrics");
    }
    const auto passing = static_cast<std::size_t>(
        std::count_if(remaining.begin(), remaining.end(), [](const MetricVerdict* v) { return v->equivalent; }));
    const bool quorum_ok = passing >= rule.quorum;
    out.rationale.push_back({"quorum", quorum_ok ? "pass" : "fail",
                             std::to_string(passing) + " of " + std::to_string(remaining.size()) +
                                 " other metrics pass, " + std::to_string(rule.quorum) + " needed"});
    ok = ok && quorum_ok;

    for (const MetricVerdict* v : remaining) {
        if (v->equivalent) {
            continue;
        }
        std::string outside;
        for (const auto& r : v->results) {
            if (!r.relaxed_pass) {
                outside += (outside.empty() ? "" : ", ") + r.spec.symbol();
            }
        }
        const bool relaxed_ok = outside.empty();
        std::ostringstream detail;
        detail << "ROPEs widened x" << text::format_double(rule.relaxation_factor) << ": "
               << (relaxed_ok ? "all statistics inside" : "HDI outside for " + outside);
        out.rationale.push_back({"relaxed:" + std::string(to_string(v->metric)), relaxed_ok ? "pass" : "fail",
                                 detail.str()});
        ok = ok && relaxed_ok;
    }
    out.equivalent = ok;
    return out;
}

// ---- report --------------------------------------------------------------

namespace {

using nlohmann::json;

json rope_json(const RopeSpec& r) { return json::array({r.lo, r.hi}); }

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    std::string s(buf);
    return s == "-0.00" || s == "-0.000" ? s.substr(1) : s;
}

std::string interval(double lo, double hi, int digits) {
    return "[" + fixed(lo, digits) + ", " + fixed(hi, digits) + "]";
}

std::string p_text(double p) {
    if (p < 0.001) {
        return "< 0.001";
    }
    return fixed(p, 3);
}

}  // namespace

std::string render_report_json(const EquivalenceReport& report) {
    json metrics = json::array();
    for (const auto& m : report.metrics) {
        if (m.verdict.results.empty()) {
            throw Error(ErrorCode::config, "metric " + std::string(to_string(m.verdict.metric)) +
                                               " has no statistics to report");
        }
        json stats = json::array();
        for (const auto& r : m.verdict.results) {
            stats.push_back(json{{"statistic", to_string(r.spec.kind)},
                                 {"symbol", r.spec.symbol()},
                                 {"spec", r.spec},
                                 {"hdi", json::array({r.hdi.lo, r.hdi.hi})},
                                 {"mass", r.hdi.mass},
                                 {"point_estimate", r.point_estimate},
                                 {"rope", rope_json(r.rope)},
                                 {"rope_mass", r.rope.mass},
                                 {"relaxed_rope", rope_json(r.relaxed_rope)},
                                 {"pass", r.pass},
                                 {"relaxed_pass", r.relaxed_pass}});
        }
        metrics.push_back(json{{"metric", to_string(m.verdict.metric)},
                               {"model_reference", m.model_reference},
                               {"model_candidate", m.model_candidate},
                               {"equivalent", m.verdict.equivalent},
                               {"statistics", stats},
                               {"warnings", m.warnings}});
    }
    json rationale = json::array();
    for (const auto& e : report.overall.rationale) {
        rationale.push_back(json{{"clause", e.clause}, {"outcome", e.outcome}, {"detail", e.detail}});
    }
    json significance = json::array();
    for (const auto& s : report.significance) {
        json row{{"metric", to_string(s.metric)},
                 {"asymptotic", json(s.asymptotic)},
                 {"alpha", s.alpha},
                 {"significant", s.significant}};
        row["permutation"] = s.permutation ? json(*s.permutation) : json(nullptr);
        significance.push_back(row);
    }
    json j{{"run_id", report.run_id},
           {"config_digest", report.config_digest},
           {"metrics", metrics},
           {"overall", json{{"equivalent", report.overall.equivalent}, {"rationale", rationale}}},
           {"significance", significance},
           {"documentation", report.documentation}};
    return j.dump(2) + "\n";
}

EquivalenceReport parse_report_json(std::string_view text) {
    EquivalenceReport r;
    try {
        const json j = json::parse(text);
        r.run_id = j.at("run_id").get<std::string>();
        r.config_digest = j.at("config_digest").get<std::string>();
        for (const auto& m : j.at("metrics")) {
            MetricReport mr;
            const auto metric = metric_from_string(m.at("metric").get<std::string>());
            if (!metric) {
                throw Error(ErrorCode::parse, "unknown metric in report");
            }
            mr.verdict.metric = *metric;
            mr.verdict.equivalent = m.at("equivalent").get<bool>();
            mr.model_reference = m.at("model_reference").get<std::string>();
            mr.model_candidate = m.at("model_candidate").get<std::string>();
            mr.warnings = m.at("warnings").get<std::vector<std::string>>();
            for (const auto& s : m.at("statistics")) {
                StatisticResult sr;
                sr.spec = s.at("spec").get<StatisticSpec>();
                sr.hdi = HdiInterval{s.at("hdi").at(0).get<double>(), s.at("hdi").at(1).get<double>(),
                                     s.at("mass").get<double>()};
                sr.point_estimate = s.at("point_estimate").get<double>();
                sr.rope = RopeSpec{*metric, sr.spec.kind, s.at("rope").at(0).get<double>(),
                                   s.at("rope").at(1).get<double>(), s.at("rope_mass").get<double>()};
                sr.relaxed_rope = sr.rope;
                sr.relaxed_rope.lo = s.at("relaxed_rope").at(0).get<double>();
                sr.relaxed_rope.hi = s.at("relaxed_rope").at(1).get<double>();
                sr.pass = s.at("pass").get<bool>();
                sr.relaxed_pass = s.at("relaxed_pass").get<bool>();
                mr.verdict.results.push_back(sr);
            }
            r.metrics.push_back(mr);
        }
        r.overall.equivalent = j.at("overall").at("equivalent").get<bool>();
        for (const auto& e : j.at("overall").at("rationale")) {
            r.overall.rationale.push_back({e.at("clause").get<std::string>(), e.at("outcome").get<std::string>(),
                                           e.at("detail").get<std::string>()});
        }
        for (const auto& s : j.at("significance")) {
            SignificanceRow row;
            const auto metric = metric_from_string(s.at("metric").get<std::string>());
            if (!metric) {
                throw Error(ErrorCode::parse, "unknown metric in report significance");
            }
            row.metric = *metric;
            row.asymptotic = s.at("asymptotic").get<KsTestResult>();
            if (!s.at("permutation").is_null()) {
                row.permutation = s.at("permutation").get<KsTestResult>();
            }
            row.alpha = s.at("alpha").get<double>();
            row.significant = s.at("significant").get<bool>();
            r.significance.push_back(row);
        }
        r.documentation = j.at("documentation");
    } catch (const json::exception& e) {
        throw Error(ErrorCode::parse, std::string("report: ") + e.what());
    }
    return r;
}

std::string render_report_markdown(const EquivalenceReport& report) {
    std::ostringstream out;
    out << "# Equivalence report\n\n";
    out << "run_id: `" << report.run_id << "`  \nconfig_digest: `" << report.config_digest << "`\n\n";
    out << "| Metric | Optimal model (ref / cand) | Statistic | 95% HDI | ROPE | Equivalent | KS statistic | p-value | "
           "Significant |\n";
    out << "|---|---|---|---|---|---|---|---|---|\n";
    for (const auto& m : report.metrics) {
        if (m.verdict.results.empty()) {
            throw Error(ErrorCode::config, "metric " + std::string(to_string(m.verdict.metric)) +
                                               " has no statistics to report");
        }
        const SignificanceRow* sig = nullptr;
        for (const auto& s : report.significance) {
            if (s.metric == m.verdict.metric) {
                sig = &s;
            }
        }
        bool first = true;
        for (const auto& r : m.verdict.results) {
            out << "| " << (first ? std::string(to_string(m.verdict.metric)) : "") << " | "
                << (first ? m.model_reference + " / " + m.model_candidate : "") << " | " << r.spec.symbol() << " | "
                << interval(r.hdi.lo, r.hdi.hi, 3) << " | " << interval(r.rope.lo, r.rope.hi, 3) << " | "
                << (r.pass ? "Yes" : "No") << " | ";
            if (first && sig != nullptr) {
                out << fixed(sig->asymptotic.d, 3) << " | " << p_text(sig->asymptotic.p_value);
                if (sig->permutation) {
                    out << " (perm " << p_text(sig->permutation->p_value) << ")";
                }
                out << " | " << (sig->significant ? "Yes" : "No") << " |\n";
            } else {
                out << " |  |  |\n";
            }
            first = false;
        }
    }
    out << "\n## Verdict\n\n";
    out << "Overall: **" << (report.overall.equivalent ? "practically equivalent" : "not practically equivalent")
        << "**\n\n";
    for (const auto& e : report.overall.rationale) {
        out << "- " << e.clause << ": " << e.outcome << " (" << e.detail << ")\n";
    }
    out << "\nPer metric:\n\n";
    for (const auto& m : report.metrics) {
        out << "- " << to_string(m.verdict.metric) << ": " << (m.verdict.equivalent ? "equivalent" : "not equivalent")
            << "\n";
        for (const auto& w : m.warnings) {
            out << "  - warning: " << w << "\n";
        }
    }
    if (!report.documentation.empty()) {
        out << "\n## Documentation\n\n```json\n" << report.documentation.dump(2) << "\n```\n";
    }
    return out.str();
}

}  // namespace equivcheck
