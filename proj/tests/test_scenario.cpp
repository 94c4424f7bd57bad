#include "equivcheck/error.hpp"
#include "equivcheck/scenario.hpp"
#include "equivcheck/synthetic.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace equivcheck;

namespace {

ErrorCode parse_code(const std::string& text) {
    std::istringstream in(text);
    try {
        parse_scenario_file(in, "x");
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error for:\n" << text;
    return ErrorCode::io;
}

Scenario straight(double span, double dt, double v_lead, double v_follow) {
    Scenario s{"s", {}, 1.0};
    const auto n = static_cast<int>(std::lround(span / dt));
    for (int k = -n; k <= 0; ++k) {
        const double t = k * dt;
        s.samples.push_back(Sample{t, (v_follow - v_lead) * -t, v_lead, v_follow});
    }
    return s;
}

}  // namespace

TEST(Scenario, ParsesAndSortsSamples) {
    std::istringstream in(
        "scenario_id,t,gap,v_lead,v_follow\n"
        "b,0,0,1,5\n"
        "a,-0.1,0.4,0,4\n"
        "b,-0.1,0.4,1,5\n"
        "a,0,0,0,4\n");
    const ScenarioSet set = parse_scenario_file(in, "ref");
    ASSERT_EQ(set.scenarios.size(), 2U);
    EXPECT_EQ(set.scenarios[0].id, "b");
    EXPECT_EQ(set.scenarios[1].id, "a");
    EXPECT_DOUBLE_EQ(set.scenarios[0].samples.front().t, -0.1);
    EXPECT_DOUBLE_EQ(set.weight_total(), 2.0);
}

TEST(Scenario, WriteParseRoundTrip) {
    SyntheticConfig cfg;
    cfg.scenarios = 25;
    cfg.seed = 9;
    const ScenarioSet set = generate_synthetic(cfg);
    std::stringstream buf;
    write_scenario_file(buf, set);
    const ScenarioSet back = parse_scenario_file(buf, set.label);
    ASSERT_EQ(back.scenarios.size(), set.scenarios.size());
    for (std::size_t i = 0; i < set.scenarios.size(); ++i) {
        EXPECT_EQ(back.scenarios[i], set.scenarios[i]) << i;
    }
}

TEST(Scenario, ParseErrors) {
    EXPECT_EQ(parse_code(""), ErrorCode::empty_input);
    EXPECT_EQ(parse_code("scenario_id,t,gap,v_lead,v_follow\n"), ErrorCode::empty_input);
    EXPECT_EQ(parse_code("id,t\n"), ErrorCode::parse);
    EXPECT_EQ(parse_code("scenario_id,t,gap,v_lead,v_follow\na,0,0,1\n"), ErrorCode::parse);
    EXPECT_EQ(parse_code("scenario_id,t,gap,v_lead,v_follow\na,zero,0,1,2\n"), ErrorCode::parse);
    EXPECT_EQ(parse_code("scenario_id,t,gap,v_lead,v_follow\na,0,nan,1,2\n"), ErrorCode::parse);
    EXPECT_EQ(parse_code("scenario_id,t,gap,v_lead,v_follow,weight\na,-1,1,1,2,1\na,0,0,1,2,2\n"),
              ErrorCode::parse);
    EXPECT_EQ(parse_code("scenario_id,t,gap,v_lead,v_follow\na,0,0,1,2\na,0,0,1,2\n"),
              ErrorCode::duplicate_sample);
}

TEST(Scenario, MissingFileIsIoError) {
    try {
        load_scenario_file("/nonexistent/equivcheck.csv", "x");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::io);
    }
}

TEST(Scenario, ValidationPolicies) {
    Scenario good = straight(6.0, 0.1, 5.0, 15.0);
    EXPECT_TRUE(validate_scenario(good).clean());

    Scenario short_one = straight(2.0, 0.1, 5.0, 15.0);
    const auto lenient = validate_scenario(short_one);
    ASSERT_EQ(lenient.violations.size(), 1U);
    EXPECT_EQ(lenient.violations[0].kind, ViolationKind::short_span);
    EXPECT_FALSE(lenient.rejected());
    ValidationPolicy strict;
    strict.mode = ValidationPolicy::Mode::strict;
    EXPECT_TRUE(validate_scenario(short_one, strict).rejected());

    Scenario neg = good;
    neg.samples[3].gap = -0.5;
    EXPECT_TRUE(validate_scenario(neg).rejected());
    Scenario late = good;
    for (auto& p : late.samples) {
        p.t += 0.5;
    }
    const auto r = validate_scenario(late);
    EXPECT_TRUE(r.rejected());
    EXPECT_EQ(r.violations[0].kind, ViolationKind::final_time_not_zero);
    Scenario gap_left = good;
    gap_left.samples.back().gap = 0.3;
    EXPECT_FALSE(validate_scenario(gap_left).rejected());
    EXPECT_EQ(validate_scenario(gap_left).violations[0].kind, ViolationKind::final_gap);
}

TEST(Scenario, ResampleLinearIsExact) {
    const Scenario s = straight(6.0, 0.1, 3.0, 13.0);
    const Scenario u = resample_uniform(s, 0.01);
    EXPECT_TRUE(is_uniform_grid(u, 0.01));
    EXPECT_FALSE(is_uniform_grid(s, 0.01));
    ASSERT_EQ(u.samples.size(), 601U);
    EXPECT_DOUBLE_EQ(u.samples.front().t, s.samples.front().t);
    EXPECT_EQ(u.samples.back().t, 0.0);
    for (const Sample& p : u.samples) {
        EXPECT_NEAR(p.gap, 10.0 * -p.t, 1e-9);
        EXPECT_NEAR(p.v_follow, 13.0, 1e-12);
    }
}

TEST(Scenario, ResampleAnchorsAtImpact) {
    Scenario s{"odd", {{-1.234, 5.0, 1.0, 2.0}, {0.0, 0.0, 1.0, 2.0}}, 1.0};
    const Scenario u = resample_uniform(s, 0.1);
    EXPECT_EQ(u.samples.size(), 13U);
    EXPECT_NEAR(u.samples.front().t, -1.2, 1e-12);
    EXPECT_EQ(u.samples.back().t, 0.0);
    EXPECT_THROW(resample_uniform(s, 0.0), Error);
}

TEST(Synthetic, TracesAreValidAndSeeded) {
    SyntheticConfig cfg;
    cfg.scenarios = 300;
    cfg.seed = 4;
    const ScenarioSet a = generate_synthetic(cfg);
    const ScenarioSet b = generate_synthetic(cfg);
    ASSERT_EQ(a.scenarios.size(), 300U);
    for (std::size_t i = 0; i < a.scenarios.size(); ++i) {
        ASSERT_EQ(a.scenarios[i], b.scenarios[i]);
        const auto rep = validate_scenario(a.scenarios[i]);
        EXPECT_TRUE(rep.clean()) << a.scenarios[i].id << ": " << rep.violations[0].message;
        const Sample& impact = a.scenarios[i].samples.back();
        EXPECT_GE(impact.v_follow - impact.v_lead, 1.0 - 1e-9);
    }
    cfg.seed = 5;
    EXPECT_NE(generate_synthetic(cfg).scenarios[0], a.scenarios[0]);
}
