#pragma once

#include "equivcheck/distributions.hpp"
#include "equivcheck/parallel.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace equivcheck {

enum class PriorKind { log_normal, normal, beta, fixed };

std::string_view to_string(PriorKind k);
std::optional<PriorKind> prior_kind_from_string(std::string_view name);

/// Prior on one parameter. (a, b) are (mu0, sigma0) for log_normal and
/// normal, (alpha, beta) for beta; `fixed` pins the parameter to `a`.
struct ParamPrior {
    PriorKind kind = PriorKind::normal;
    double a = 0.0;
    double b = 10.0;

    friend bool operator==(const ParamPrior&, const ParamPrior&) = default;
};

struct PriorSpec {
    std::vector<ParamPrior> params;  // one per continuous-family parameter
    ParamPrior pi{PriorKind::beta, 1.0, 1.0};

    /// log_normal(0, 2) on positive parameters, normal(0, 10) on
    /// unconstrained ones, beta(1, 1) on the atom probability.
    static PriorSpec defaults(Family f);
    void validate(Family f) const;
};

enum class WeightMode { normalized, raw };

struct SamplerConfig {
    std::size_t chains = 4;
    std::size_t draws_per_chain = 2000;
    std::size_t warmup = 1000;
    std::uint64_t seed = 1;
    double adapt_target_accept = 0.35;
    WeightMode weight_mode = WeightMode::normalized;

    void validate() const;
};

struct WeightedSample {
    std::vector<double> values;
    std::vector<double> weights;

    static WeightedSample unit(std::vector<double> values);
    std::size_t size() const { return values.size(); }
    /// Equal lengths, non-negative finite weights, at least one positive
    /// weight when non-empty.
    void validate() const;
    /// w_i * n / sum(w) (normalized) or w_i (raw).
    std::vector<double> likelihood_weights(WeightMode mode) const;
};

struct ParamDiagnostics {
    double r_hat = 1.0;
    double ess = 0.0;
    bool degenerate = false;
};

/// Split-R-hat and multi-chain autocorrelation ESS (Geyer initial monotone
/// sequence) for one parameter. Needs >= 2 chains of equal length >= 4.
ParamDiagnostics diagnose(const std::vector<std::vector<double>>& chains);

struct WaicResult {
    double waic = 0.0;
    double lppd = 0.0;
    double p_waic = 0.0;
};

/// Direct evaluation on an explicit [draws x observations] log-likelihood
/// matrix (row-major):
///   lppd   = sum_i w_i log(mean_s exp(ll[s, i]))
///   p_waic = sum_i w_i var_s(ll[s, i])      (sample variance, S - 1)
///   waic   = -2 (lppd - p_waic)
WaicResult waic_from_matrix(std::span<const double> log_lik, std::size_t draws,
                            std::span<const double> weights);

struct FitLabels {
    std::string metric;
    std::string dataset;
};

struct PosteriorFit {
    ModelSpec model;
    PriorSpec prior;
    std::vector<std::string> param_names;  // family params, then "pi" for mixtures
    std::size_t chains = 0;
    std::size_t draws_per_chain = 0;
    std::vector<double> draws;  // row-major [chains * draws_per_chain x param_names.size()]
    std::vector<ParamDiagnostics> diagnostics;
    double accept_rate = 0.0;
    WaicResult waic;
    FitLabels labels;
    std::size_t n_obs = 0;
    double weight_total = 0.0;
    WeightMode weight_mode = WeightMode::normalized;
    std::uint64_t seed = 0;
    std::vector<std::string> warnings;

    std::size_t dimension() const { return param_names.size(); }
    std::size_t total_draws() const { return chains * draws_per_chain; }
    std::span<const double> draw(std::size_t s) const {
        return {draws.data() + s * dimension(), dimension()};
    }
    ModelInstance model_at(std::size_t s) const;
    bool converged(double r_hat_limit = 1.05) const;
    std::size_t free_parameter_count() const;
};

/// Posterior draws for p(theta | y) ∝ p(theta) prod f(y_i | theta)^{w_i}.
/// Continuous parameters are sampled by adaptive random-walk Metropolis on
/// the unconstrained scale (log for positive parameters); adaptation stops
/// after warmup. The atom probability, when present, is drawn from its
/// conjugate beta posterior and the continuous part sees only off-atom data.
/// Chain c is seeded by derive_seed(cfg.seed, c); chains run on the thread
/// pool when exec is parallel, with identical output.
PosteriorFit fit(const WeightedSample& data, const ModelSpec& model, const PriorSpec& prior,
                 const SamplerConfig& cfg, FitLabels labels = {}, Exec exec = Exec::serial);

/// Explicit log-likelihood matrix of a fit, [total_draws x data.size()].
/// Memory-heavy; meant for checks on small data.
std::vector<double> log_lik_matrix(const PosteriorFit& fit, const WeightedSample& data);

/// WAIC of a fit against its data. Identical observations are pooled (their
/// weights add), which leaves the sums unchanged.
WaicResult compute_waic(const PosteriorFit& fit, const WeightedSample& data, Exec exec = Exec::parallel);

/// Lowest WAIC; ties go to fewer free parameters, then family order.
/// Non-converged fits are skipped unless none converged.
const PosteriorFit& select_model(std::span<const PosteriorFit> fits);

}  // namespace equivcheck
