#include "equivcheck/decision.hpp"
#include "equivcheck/error.hpp"

#include <gtest/gtest.h>

using namespace equivcheck;

namespace {

RopeSpec rope(Metric m, StatisticKind k, double lo, double hi) {
    RopeSpec r;
    r.metric = m;
    r.statistic = k;
    r.lo = lo;
    r.hi = hi;
    return r;
}

StatisticInput input(Metric m, StatisticKind k, double hdi_lo, double hdi_hi, double rope_lo, double rope_hi) {
    StatisticInput in;
    in.spec.kind = k;
    in.spec.metric = m;
    if (k == StatisticKind::proportion_ratio) {
        in.spec.threshold = 1.0;
    }
    in.hdi = HdiInterval{hdi_lo, hdi_hi, 0.95};
    in.point_estimate = 0.5 * (hdi_lo + hdi_hi);
    in.rope = rope(m, k, rope_lo, rope_hi);
    return in;
}

// One-statistic verdict that passes, fails but survives widening by 1.25, or fails outright.
enum class Outcome { pass, relaxed, fail };

MetricVerdict verdict(Metric m, Outcome o) {
    const double hi = o == Outcome::pass ? 0.04 : (o == Outcome::relaxed ? 0.055 : 0.08);
    const std::vector<StatisticInput> in{input(m, StatisticKind::ks_distance, 0.01, hi, 0.0, 0.05)};
    return metric_verdict(in, 1.25);
}

OverallRule table_rule() {
    OverallRule r;
    r.required = {Metric::delta_v_l, Metric::t_nr};
    r.quorum = 1;
    r.relaxation_factor = 1.25;
    return r;
}

std::vector<MetricVerdict> four(Outcome dv, Outcome tnr, Outcome al, Outcome af) {
    return {verdict(Metric::delta_v_l, dv), verdict(Metric::t_nr, tnr), verdict(Metric::a_l_min, al),
            verdict(Metric::a_f_min, af)};
}

}  // namespace

TEST(Rope, TableExamples) {
    EXPECT_TRUE(rope_test({-0.11, 0.27, 0.95}, rope(Metric::delta_v_l, StatisticKind::mean_diff, -1.0, 1.0)));
    EXPECT_FALSE(rope_test({0.01, 0.06, 0.95}, rope(Metric::delta_v_l, StatisticKind::ks_distance, 0.0, 0.05)));
    EXPECT_FALSE(rope_test({0.91, 1.06, 0.95}, rope(Metric::delta_v_l, StatisticKind::proportion_ratio, 0.95, 1.05)));
}

TEST(Rope, ClosedContainment) {
    const RopeSpec r = rope(Metric::t_nr, StatisticKind::ks_distance, 0.0, 0.05);
    EXPECT_TRUE(rope_test({0.0, 0.05, 0.95}, r));
    EXPECT_FALSE(rope_test({0.0, std::nextafter(0.05, 1.0), 0.95}, r));
    EXPECT_FALSE(rope_test({std::nextafter(0.0, -1.0), 0.02, 0.95}, r));
}

TEST(Rope, WideningKeepsMidpoint) {
    const RopeSpec w = widen_rope(rope(Metric::t_nr, StatisticKind::ks_distance, 0.0, 0.05), 1.25);
    EXPECT_DOUBLE_EQ(w.lo, -0.00625);
    EXPECT_DOUBLE_EQ(w.hi, 0.05625);
    const RopeSpec r = widen_rope(rope(Metric::t_nr, StatisticKind::proportion_ratio, 0.95, 1.05), 1.25);
    EXPECT_DOUBLE_EQ(r.lo, 0.9375);
    EXPECT_DOUBLE_EQ(r.hi, 1.0625);
    const RopeSpec same = widen_rope(r, 1.0);
    EXPECT_EQ(same, r);
    EXPECT_THROW(widen_rope(r, 0.9), Error);
}

TEST(Rope, Validation) {
    EXPECT_THROW(rope(Metric::t_nr, StatisticKind::ks_distance, 0.05, 0.0).validate(), Error);
    RopeSpec r = rope(Metric::t_nr, StatisticKind::ks_distance, 0.0, 0.05);
    r.mass = 1.0;
    EXPECT_THROW(r.validate(), Error);
}

TEST(Rope, WideningIsMonotone) {
    // a pass can never turn into a fail under a wider ROPE
    const RopeSpec base = rope(Metric::a_f_min, StatisticKind::mean_diff, -0.5, 0.3);
    for (double lo = -0.8; lo <= 0.4; lo += 0.05) {
        for (double hi = lo; hi <= 0.6; hi += 0.05) {
            bool prev = false;
            for (double f : {1.0, 1.1, 1.25, 1.5, 2.0, 4.0}) {
                const bool now = rope_test({lo, hi, 0.95}, widen_rope(base, f));
                ASSERT_TRUE(now || !prev) << lo << " " << hi << " " << f;
                prev = now;
            }
        }
    }
}

TEST(MetricVerdict, AllStatisticsMustPass) {
    const std::vector<StatisticInput> in{
        input(Metric::delta_v_l, StatisticKind::mean_diff, -0.11, 0.27, -1.0, 1.0),
        input(Metric::delta_v_l, StatisticKind::ks_distance, 0.01, 0.06, 0.0, 0.05),
        input(Metric::delta_v_l, StatisticKind::proportion_ratio, 0.91, 1.06, 0.95, 1.05),
    };
    const MetricVerdict v = metric_verdict(in);
    EXPECT_FALSE(v.equivalent);
    ASSERT_EQ(v.results.size(), 3U);
    EXPECT_TRUE(v.results[0].pass);
    EXPECT_FALSE(v.results[1].pass);
    EXPECT_FALSE(v.results[1].relaxed_pass);  // 0.06 > 0.05625
    EXPECT_FALSE(v.results[2].relaxed_pass);  // 0.91 < 0.9375
    EXPECT_DOUBLE_EQ(v.results[2].relaxed_rope.hi, 1.0625);
    const std::vector<StatisticInput> ok{in[0]};
    EXPECT_TRUE(metric_verdict(ok).equivalent);
}

TEST(MetricVerdict, RejectsDuplicatesAndMixedMetrics) {
    const std::vector<StatisticInput> dup{input(Metric::t_nr, StatisticKind::ks_distance, 0.0, 0.01, 0.0, 0.05),
                                          input(Metric::t_nr, StatisticKind::ks_distance, 0.0, 0.01, 0.0, 0.05)};
    EXPECT_THROW(metric_verdict(dup), Error);
    const std::vector<StatisticInput> mixed{input(Metric::t_nr, StatisticKind::ks_distance, 0.0, 0.01, 0.0, 0.05),
                                            input(Metric::a_l_min, StatisticKind::mean_diff, 0.0, 0.01, -1.0, 1.0)};
    EXPECT_THROW(metric_verdict(mixed), Error);
}

TEST(OverallVerdict, RuleExamples) {
    const OverallRule rule = table_rule();
    // the published pattern: a_f fails but passes under relaxed ROPEs
    EXPECT_TRUE(overall_verdict(four(Outcome::pass, Outcome::pass, Outcome::pass, Outcome::relaxed), rule).equivalent);
    // a required metric fails
    EXPECT_FALSE(overall_verdict(four(Outcome::fail, Outcome::pass, Outcome::pass, Outcome::pass), rule).equivalent);
    EXPECT_FALSE(overall_verdict(four(Outcome::pass, Outcome::relaxed, Outcome::pass, Outcome::pass), rule).equivalent);
    // quorum of one met, but the failing metric is outside even the widened ROPE
    EXPECT_FALSE(overall_verdict(four(Outcome::pass, Outcome::pass, Outcome::pass, Outcome::fail), rule).equivalent);
    // quorum missed
    EXPECT_FALSE(
        overall_verdict(four(Outcome::pass, Outcome::pass, Outcome::relaxed, Outcome::relaxed), rule).equivalent);
    OverallRule lax = rule;
    lax.quorum = 0;
    EXPECT_TRUE(
        overall_verdict(four(Outcome::pass, Outcome::pass, Outcome::relaxed, Outcome::relaxed), lax).equivalent);
}

TEST(OverallVerdict, RationaleClauses) {
    const auto v = overall_verdict(four(Outcome::pass, Outcome::pass, Outcome::pass, Outcome::relaxed), table_rule());
    ASSERT_EQ(v.rationale.size(), 4U);
    EXPECT_EQ(v.rationale[0].clause, "required:delta_v_l");
    EXPECT_EQ(v.rationale[1].clause, "required:t_nr");
    EXPECT_EQ(v.rationale[2].clause, "quorum");
    EXPECT_EQ(v.rationale[2].detail, "1 of 2 other metrics pass, 1 needed");
    EXPECT_EQ(v.rationale[3].clause, "relaxed:a_f_min");
    EXPECT_EQ(v.rationale[3].outcome, "pass");
}

TEST(OverallVerdict, ConfigErrors) {
    OverallRule r = table_rule();
    r.quorum = 3;
    EXPECT_THROW(overall_verdict(four(Outcome::pass, Outcome::pass, Outcome::pass, Outcome::pass), r), Error);
    r = table_rule();
    r.required = {Metric::t_nr, Metric::t_nr};
    EXPECT_THROW(r.validate(), Error);
    r = table_rule();
    const std::vector<MetricVerdict> only{verdict(Metric::t_nr, Outcome::pass)};
    EXPECT_THROW(overall_verdict(only, r), Error);  // delta_v_l missing
}

TEST(Report, JsonRoundTripIsBitIdentical) {
    EquivalenceReport rep;
    rep.run_id = "unit";
    rep.config_digest = "0123456789abcdef";
    for (const auto& v : four(Outcome::pass, Outcome::pass, Outcome::pass, Outcome::relaxed)) {
        rep.metrics.push_back(MetricReport{v, "mixture:gamma", "log_normal", {"note"}});
    }
    rep.overall = overall_verdict(std::vector<MetricVerdict>{rep.metrics[0].verdict, rep.metrics[1].verdict,
                                                             rep.metrics[2].verdict, rep.metrics[3].verdict},
                                  table_rule());
    SignificanceRow row;
    row.metric = Metric::t_nr;
    row.asymptotic.d = 0.1 / 3.0;
    row.asymptotic.p_value = 0.123456789012345;
    rep.significance.push_back(row);
    rep.documentation = {{"seed", 7}};
    const std::string text = render_report_json(rep);
    const EquivalenceReport back = parse_report_json(text);
    EXPECT_EQ(render_report_json(back), text);
    const auto j = nlohmann::json::parse(text);
    for (const char* key : {"run_id", "config_digest", "metrics", "overall", "significance", "documentation"}) {
        EXPECT_TRUE(j.contains(key)) << key;
    }
    EXPECT_TRUE(j["significance"][0]["permutation"].is_null());
    const std::string md = render_report_markdown(rep);
    EXPECT_NE(md.find("| Metric | Optimal model (ref / cand) | Statistic | 95% HDI | ROPE | Equivalent |"),
              std::string::npos);
}

TEST(Report, EmptyStatisticsRefused) {
    EquivalenceReport rep;
    rep.metrics.push_back(MetricReport{});
    EXPECT_THROW(render_report_json(rep), Error);
    EXPECT_THROW(render_report_markdown(rep), Error);
}
