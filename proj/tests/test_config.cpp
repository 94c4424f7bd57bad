#include "equivcheck/config.hpp"
#include "equivcheck/error.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <fstream>

using namespace equivcheck;
using nlohmann::json;

namespace {

json demo_json() {
    std::ifstream in(std::string(EQUIVCHECK_SOURCE_DIR) + "/demo/demo.json");
    return json::parse(in);
}

ErrorCode code_of(const json& j) {
    try {
        parse_run_config(j.dump(), "/base");
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "accepted: " << j.dump();
    return ErrorCode::io;
}

}  // namespace

TEST(Config, DemoParses) {
    const RunConfig c = parse_run_config(demo_json().dump(), "/base");
    EXPECT_EQ(c.run_id, "demo");
    EXPECT_EQ(c.seed, 20240501U);
    EXPECT_EQ(c.reference.path, std::filesystem::path("/base/data/reference.csv"));
    EXPECT_EQ(c.candidate.label, "pcm");
    EXPECT_EQ(c.output_dir, std::filesystem::path("/base/out/demo"));
    ASSERT_EQ(c.metrics.size(), 4U);
    std::size_t n_stats = 0;
    for (const auto& p : c.metrics) {
        n_stats += p.statistics.size();
    }
    EXPECT_EQ(n_stats, 9U);
    EXPECT_EQ(c.ropes.size(), 9U);
    EXPECT_EQ(c.rule.quorum, 1U);
    EXPECT_EQ(c.sampler.draws_per_chain, 2000U);
    const MetricPlan* tnr = c.plan(Metric::t_nr);
    ASSERT_NE(tnr, nullptr);
    EXPECT_EQ(tnr->candidates.front().transform, Transform::negate);
    ASSERT_TRUE(tnr->statistics[0].restriction);
    EXPECT_TRUE(std::isinf(tnr->statistics[0].restriction->lo));
    const RopeSpec* r = c.rope_for(Metric::delta_v_l, StatisticKind::proportion_ratio);
    ASSERT_NE(r, nullptr);
    EXPECT_EQ(r->lo, 0.8);
}

TEST(Config, DefaultCandidates) {
    const auto dv = default_candidates(Metric::delta_v_l);
    EXPECT_EQ(dv.size(), 4U);
    for (const auto& m : dv) {
        EXPECT_FALSE(m.point_mass);
        EXPECT_EQ(m.transform, Transform::identity);
    }
    for (const auto& m : default_candidates(Metric::a_f_min)) {
        EXPECT_TRUE(m.point_mass);
        EXPECT_EQ(m.transform, Transform::negate);
    }
}

TEST(Config, DigestTracksContent) {
    const json j = demo_json();
    const RunConfig a = parse_run_config(j.dump(), "/base");
    EXPECT_EQ(a.digest().size(), 16U);
    EXPECT_EQ(a.digest(), parse_run_config(j.dump(2), "/base").digest());  // formatting-independent
    const RunConfig c = parse_run_config(j.dump(), "/base", 7);
    EXPECT_EQ(c.seed, 7U);
    EXPECT_NE(c.digest(), a.digest());
}

TEST(Config, Rejections) {
    json j = demo_json();
    j.erase("seed");
    EXPECT_EQ(code_of(j), ErrorCode::config);

    j = demo_json();
    j["sampler"]["thin"] = 2;
    EXPECT_EQ(code_of(j), ErrorCode::config);

    j = demo_json();
    j["ropes"].erase(0);  // delta_v_l mean_diff loses its ROPE
    EXPECT_EQ(code_of(j), ErrorCode::config);

    j = demo_json();
    j["ropes"].push_back({{"metric", "t_nr"}, {"statistic", "mean_diff"}, {"rope", {-1, 1}}});
    EXPECT_EQ(code_of(j), ErrorCode::config);

    j = demo_json();
    j["ropes"][1]["rope"] = {0.1, 0.0};
    EXPECT_EQ(code_of(j), ErrorCode::config);

    j = demo_json();
    j["metrics"]["delta_v_l"]["families"] = {"weibull"};
    EXPECT_EQ(code_of(j), ErrorCode::config);

    j = demo_json();
    j["overall_rule"]["quorum"] = 5;
    EXPECT_EQ(code_of(j), ErrorCode::config);

    EXPECT_THROW(parse_run_config("{ not json", "/base"), Error);
}

TEST(Config, PriorsAndFamilies) {
    json j = demo_json();
    j["metrics"]["delta_v_l"]["families"] = {"gamma", "log_normal"};
    j["metrics"]["delta_v_l"]["priors"] = {
        {"gamma", {{"shape", {{"kind", "log_normal"}, {"a", 0.5}, {"b", 1.0}}}}}};
    const RunConfig c = parse_run_config(j.dump(), "/base");
    const MetricPlan* p = c.plan(Metric::delta_v_l);
    ASSERT_EQ(p->candidates.size(), 2U);
    const PriorSpec g = p->prior_for(Family::gamma);
    EXPECT_EQ(g.params[0], (ParamPrior{PriorKind::log_normal, 0.5, 1.0}));
    EXPECT_EQ(g.params[1], PriorSpec::defaults(Family::gamma).params[1]);
    EXPECT_EQ(p->prior_for(Family::log_normal).params, PriorSpec::defaults(Family::log_normal).params);

    j["metrics"]["delta_v_l"]["priors"]["gamma"]["shape"]["kind"] = "beta";
    EXPECT_EQ(code_of(j), ErrorCode::config);
}
