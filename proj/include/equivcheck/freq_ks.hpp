#pragma once

#include "equivcheck/bayes_fit.hpp"
#include "equivcheck/parallel.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

namespace equivcheck {

/// Right-continuous step function; F[i] = P(X <= x[i]), ties merged.
struct WeightedEcdf {
    std::vector<double> x;
    std::vector<double> F;

    double operator()(double value) const;
};

WeightedEcdf weighted_ecdf(const WeightedSample& data);

/// Kish effective sample size (sum w)^2 / sum w^2.
double effective_sample_size(std::span<const double> weights);

/// sup |F_a - F_b| over the pooled support points.
double ks_statistic(const WeightedSample& a, const WeightedSample& b);

enum class KsMethod { asymptotic, permutation };
std::string_view to_string(KsMethod m);

struct KsTestOptions {
    KsMethod method = KsMethod::asymptotic;
    std::size_t permutations = 2000;
    std::uint64_t seed = 1;
};

struct KsTestResult {
    double d = 0.0;
    double p_value = 1.0;
    double n_eff_a = 0.0;
    double n_eff_b = 0.0;
    KsMethod method = KsMethod::asymptotic;
    std::size_t permutations = 0;
    bool degenerate = false;  // both samples one identical value
};

/// Asymptotic: p = Q_KS((sqrt(ne) + 0.12 + 0.11 / sqrt(ne)) d) with
/// ne = n_a n_b / (n_a + n_b) on Kish sizes. Permutation: group labels are
/// shuffled with the weights attached, p = #{d_perm >= d} / R; replicate r
/// uses derive_seed(seed, r).
KsTestResult two_sample_ks(const WeightedSample& a, const WeightedSample& b, const KsTestOptions& opts = {},
                           Exec exec = Exec::parallel);

void to_json(nlohmann::json& j, const KsTestResult& r);
void from_json(const nlohmann::json& j, KsTestResult& r);

/// Two columns "x,F".
void write_ecdf(const std::filesystem::path& path, const WeightedEcdf& ecdf);

}  // namespace equivcheck
