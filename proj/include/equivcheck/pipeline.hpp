#pragma once

#include "equivcheck/config.hpp"
#include "equivcheck/decision.hpp"
#include "equivcheck/parallel.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

namespace equivcheck {

enum class Stage { extract, fit, stats, ks, ecdf, decide };

std::string_view to_string(Stage s);
std::optional<Stage> stage_from_string(std::string_view name);

struct PipelineOptions {
    std::filesystem::path out;        // artifact root
    std::optional<Metric> only_metric;  // restrict fit/stats/ks/ecdf/decide to one metric
    Exec exec = Exec::parallel;
};

/// Artifact layout under the output directory.
namespace artifacts {
std::filesystem::path metric_table(const std::filesystem::path& out, std::string_view role);
std::filesystem::path fit_dir(const std::filesystem::path& out, Metric m, std::string_view role, const ModelSpec& model);
std::filesystem::path selection(const std::filesystem::path& out, Metric m, std::string_view role);
std::filesystem::path statistic(const std::filesystem::path& out, Metric m, StatisticKind k);
std::filesystem::path ks(const std::filesystem::path& out, Metric m);
std::filesystem::path ecdf(const std::filesystem::path& out, Metric m, std::string_view role);
std::filesystem::path report_json(const std::filesystem::path& out);
std::filesystem::path report_markdown(const std::filesystem::path& out);
}  // namespace artifacts

/// Runs one stage from the persisted upstream artifacts. Errors are
/// rethrown with the stage name prefixed; artifacts already written stay.
/// Returns the report for the decide stage.
std::optional<EquivalenceReport> run_stage(Stage stage, const RunConfig& cfg, const PipelineOptions& opts);

/// extract, fit, stats, ks, ecdf, decide in order.
EquivalenceReport run_pipeline(const RunConfig& cfg, const PipelineOptions& opts);

}  // namespace equivcheck
