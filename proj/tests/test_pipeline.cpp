#include "equivcheck/error.hpp"
#include "equivcheck/pipeline.hpp"
#include "equivcheck/text_io.hpp"
#include "support/run_fixture.hpp"

#include <gtest/gtest.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>

using namespace equivcheck;
namespace fs = std::filesystem;

namespace {

fs::path demo_config() { return fs::path(EQUIVCHECK_SOURCE_DIR) / "demo" / "demo.json"; }

class PipelineTest : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        root_ = fs::temp_directory_path() / "equivcheck_test_pipeline";
        fs::remove_all(root_);
        config_path_ = fixture::make_run(root_, demo_config(), fixture::RunSpec{});
        cfg_ = new RunConfig(load_run_config(config_path_));
        PipelineOptions opts;
        opts.out = cfg_->output_dir;
        report_ = new EquivalenceReport(run_pipeline(*cfg_, opts));
    }
    static void TearDownTestSuite() {
        delete cfg_;
        delete report_;
        fs::remove_all(root_);
    }

    static fs::path root_;
    static fs::path config_path_;
    static RunConfig* cfg_;
    static EquivalenceReport* report_;
};

fs::path PipelineTest::root_;
fs::path PipelineTest::config_path_;
RunConfig* PipelineTest::cfg_ = nullptr;
EquivalenceReport* PipelineTest::report_ = nullptr;

int run_cli(const std::string& args) {
    const std::string cmd = std::string(EQUIVCHECK_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_F(PipelineTest, WritesEveryArtifact) {
    const fs::path out = cfg_->output_dir;
    for (const char* role : {"reference", "candidate"}) {
        EXPECT_TRUE(fs::exists(artifacts::metric_table(out, role)));
        for (Metric m : kAllMetrics) {
            EXPECT_TRUE(fs::exists(artifacts::selection(out, m, role)));
            EXPECT_TRUE(fs::exists(artifacts::ecdf(out, m, role)));
        }
    }
    std::size_t ecdfs = 0;
    for (const auto& e : fs::directory_iterator(out / "ecdf")) {
        ecdfs += e.path().extension() == ".csv" ? 1 : 0;
    }
    EXPECT_EQ(ecdfs, 8U);
    for (const auto& plan : cfg_->metrics) {
        EXPECT_TRUE(fs::exists(artifacts::ks(out, plan.metric)));
        for (const auto& s : plan.statistics) {
            EXPECT_TRUE(fs::exists(artifacts::statistic(out, plan.metric, s.kind)));
        }
    }
    EXPECT_TRUE(fs::exists(artifacts::report_json(out)));
    EXPECT_TRUE(fs::exists(artifacts::report_markdown(out)));
}

TEST_F(PipelineTest, ReportStructure) {
    ASSERT_EQ(report_->metrics.size(), 4U);
    std::size_t n = 0;
    for (const auto& m : report_->metrics) {
        n += m.verdict.results.size();
        EXPECT_FALSE(m.model_reference.empty());
    }
    EXPECT_EQ(n, 9U);
    EXPECT_EQ(report_->significance.size(), 4U);
    EXPECT_EQ(report_->config_digest, cfg_->digest());
    const auto& doc = report_->documentation;
    for (const char* key : {"seeds", "priors", "model_selection", "rope_notes"}) {
        EXPECT_TRUE(doc.contains(key)) << key;
    }
    const std::string md = text::read_file(artifacts::report_markdown(cfg_->output_dir));
    EXPECT_NE(md.find("KS statistic | p-value | Significant"), std::string::npos);
}

TEST_F(PipelineTest, DecideRerunIsFastAndIdentical) {
    const std::string before = text::read_file(artifacts::report_json(cfg_->output_dir));
    PipelineOptions opts;
    opts.out = cfg_->output_dir;
    const auto t0 = std::chrono::steady_clock::now();
    run_stage(Stage::decide, *cfg_, opts);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    EXPECT_LT(secs, 1.0);
    EXPECT_EQ(text::read_file(artifacts::report_json(cfg_->output_dir)), before);
}

TEST_F(PipelineTest, MissingUpstreamIsDependencyError) {
    const fs::path out = root_ / "partial";
    PipelineOptions opts;
    opts.out = out;
    run_stage(Stage::extract, *cfg_, opts);
    try {
        run_stage(Stage::stats, *cfg_, opts);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::dependency);
        EXPECT_EQ(std::string(e.what()).rfind("stage stats: ", 0), 0U) << e.what();
    }
}

TEST_F(PipelineTest, MetricFilterLimitsWork) {
    const fs::path out = root_ / "filtered";
    PipelineOptions opts;
    opts.out = out;
    run_stage(Stage::extract, *cfg_, opts);
    opts.only_metric = Metric::t_nr;
    run_stage(Stage::fit, *cfg_, opts);
    EXPECT_TRUE(fs::exists(artifacts::selection(out, Metric::t_nr, "reference")));
    EXPECT_FALSE(fs::exists(artifacts::selection(out, Metric::delta_v_l, "reference")));
    run_stage(Stage::ecdf, *cfg_, opts);
    EXPECT_TRUE(fs::exists(artifacts::ecdf(out, Metric::t_nr, "candidate")));
    EXPECT_FALSE(fs::exists(artifacts::ecdf(out, Metric::a_f_min, "candidate")));
}

TEST_F(PipelineTest, ReportIndependentOfJobs) {
    const std::string base = text::read_file(artifacts::report_json(cfg_->output_dir));
    for (int jobs : {1, 4}) {
        set_jobs(jobs);
        const fs::path out = root_ / ("jobs" + std::to_string(jobs));
        PipelineOptions opts;
        opts.out = out;
        run_pipeline(*cfg_, opts);
        EXPECT_EQ(text::read_file(artifacts::report_json(out)), base) << "jobs " << jobs;
    }
    set_jobs(0);
    const fs::path out = root_ / "serial";
    PipelineOptions opts;
    opts.out = out;
    opts.exec = Exec::serial;
    run_pipeline(*cfg_, opts);
    EXPECT_EQ(text::read_file(artifacts::report_json(out)), base);
}

TEST_F(PipelineTest, CliExitCodes) {
    const std::string cfg = config_path_.string();
    const int verdict = report_->overall.equivalent ? 0 : 10;
    EXPECT_EQ(run_cli("decide --config " + cfg), verdict);
    EXPECT_EQ(run_cli("--config " + cfg + " --stage decide"), verdict);
    EXPECT_EQ(run_cli("decide"), 11);
    EXPECT_EQ(run_cli("decide --config " + cfg + " --metric ttc"), 11);
    EXPECT_EQ(run_cli("stats --config " + cfg + " --out " + (root_ / "empty").string()), 13);

    const fs::path bad = root_ / "bad";
    fs::create_directories(bad / "data");
    text::write_file(bad / "data" / "reference.csv", "scenario_id,t,gap,v_lead,v_follow\na,0,0,1,2\na,0,0,1,2\n");
    text::write_file(bad / "data" / "candidate.csv", text::read_file(root_ / "data" / "candidate.csv"));
    fs::copy_file(config_path_, bad / "config.json");
    EXPECT_EQ(run_cli("extract --config " + (bad / "config.json").string()), 12);
    EXPECT_EQ(run_cli("extract --config " + (root_ / "nope.json").string()), 13);
}

TEST(Pipeline, StageNames) {
    for (Stage s : {Stage::extract, Stage::fit, Stage::stats, Stage::ks, Stage::ecdf, Stage::decide}) {
        EXPECT_EQ(stage_from_string(to_string(s)), s);
    }
    EXPECT_FALSE(stage_from_string("plot"));
}
