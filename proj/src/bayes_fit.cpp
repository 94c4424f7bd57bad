#include "equivcheck/bayes_fit.hpp"

#include "equivcheck/error.hpp"
#include "equivcheck/rng.hpp"
#include "equivcheck/special_functions.hpp"
#include "equivcheck/text_io.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <tuple>

namespace equivcheck {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

bool is_positive_param(Family f, std::size_t i) {
    switch (f) {
        case Family::exponential: return true;
        case Family::gamma: return true;
        default: return i == 1;  // sigma
    }
}

double normal_logpdf(double x, double mu, double sigma) {
    const double z = (x - mu) / sigma;
    return -0.5 * z * z - std::log(sigma) - special::kLnSqrt2Pi;
}

}  // namespace

std::string_view to_string(PriorKind k) {
    switch (k) {
        case PriorKind::log_normal: return "log_normal";
        case PriorKind::normal: return "normal";
        case PriorKind::beta: return "beta";
        case PriorKind::fixed: return "fixed";
    }
    return "unknown";
}

std::optional<PriorKind> prior_kind_from_string(std::string_view name) {
    for (PriorKind k : {PriorKind::log_normal, PriorKind::normal, PriorKind::beta, PriorKind::fixed}) {
        if (to_string(k) == name) {
            return k;
        }
    }
    return std::nullopt;
}

PriorSpec PriorSpec::defaults(Family f) {
    PriorSpec spec;
    for (std::size_t i = 0; i < param_count(f); ++i) {
        spec.params.push_back(is_positive_param(f, i) ? ParamPrior{PriorKind::log_normal, 0.0, 2.0}
                                                      : ParamPrior{PriorKind::normal, 0.0, 10.0});
    }
    return spec;
}

void PriorSpec::validate(Family f) const {
    if (params.size() != param_count(f)) {
        throw Error(ErrorCode::config, "prior for " + std::string(to_string(f)) + " needs " +
                                           std::to_string(param_count(f)) + " parameter priors");
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        const ParamPrior& p = params[i];
        const std::string where = std::string(to_string(f)) + "." + std::string(param_names(f)[i]);
        switch (p.kind) {
            case PriorKind::log_normal:
                if (!is_positive_param(f, i)) {
                    throw Error(ErrorCode::config, where + ": log_normal prior does not cover an unconstrained parameter");
                }
                [[fallthrough]];
            case PriorKind::normal:
                if (!std::isfinite(p.a) || !(p.b > 0.0) || !std::isfinite(p.b)) {
                    throw Error(ErrorCode::config, where + ": prior needs finite location and positive scale");
                }
                break;
            case PriorKind::beta:
                throw Error(ErrorCode::config, where + ": beta priors apply only to the atom probability");
            case PriorKind::fixed:
                if (!std::isfinite(p.a) || (is_positive_param(f, i) && !(p.a > 0.0))) {
                    throw Error(ErrorCode::config, where + ": fixed value outside the legal region");
                }
                break;
        }
    }
    if (pi.kind != PriorKind::beta || !(pi.a > 0.0) || !(pi.b > 0.0)) {
        throw Error(ErrorCode::config, "atom probability prior must be beta(a > 0, b > 0)");
    }
}

void SamplerConfig::validate() const {
    if (chains < 2 || draws_per_chain < 100 || warmup < 100) {
        throw Error(ErrorCode::config, "sampler needs chains >= 2, draws_per_chain >= 100, warmup >= 100");
    }
    if (!(adapt_target_accept > 0.0 && adapt_target_accept < 1.0)) {
        throw Error(ErrorCode::config, "adapt_target_accept must lie in (0, 1)");
    }
}

WeightedSample WeightedSample::unit(std::vector<double> values) {
    WeightedSample s;
    s.weights.assign(values.size(), 1.0);
    s.values = std::move(values);
    return s;
}

void WeightedSample::validate() const {
    if (values.size() != weights.size()) {
        throw Error(ErrorCode::precondition, "values and weights differ in length");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) {
            throw Error(ErrorCode::support, "non-finite observation at index " + std::to_string(i));
        }
        if (!(weights[i] >= 0.0) || !std::isfinite(weights[i])) {
            throw Error(ErrorCode::degenerate_weights, "invalid weight at index " + std::to_string(i));
        }
        total += weights[i];
    }
    if (!values.empty() && !(total > 0.0)) {
        throw Error(ErrorCode::degenerate_weights, "all weights are zero");
    }
}

std::vector<double> WeightedSample::likelihood_weights(WeightMode mode) const {
    if (mode == WeightMode::raw || values.empty()) {
        return weights;
    }
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    const double scale = static_cast<double>(values.size()) / total;
    std::vector<double> out(weights.size());
    std::transform(weights.begin(), weights.end(), out.begin(), [scale](double w) { return w * scale; });
    return out;
}

// ---- diagnostics ---------------------------------------------------------

ParamDiagnostics diagnose(const std::vector<std::vector<double>>& chains) {
    if (chains.size() < 2) {
        throw Error(ErrorCode::precondition, "diagnostics need at least 2 chains");
    }
    const std::size_t n = chains.front().size();
    for (const auto& c : chains) {
        if (c.size() != n || n < 4) {
            throw Error(ErrorCode::precondition, "diagnostics need equal-length chains of >= 4 draws");
        }
    }
    // split each chain in half
    const std::size_t half = n / 2;
    std::vector<std::span<const double>> split;
    for (const auto& c : chains) {
        split.emplace_back(c.data(), half);
        split.emplace_back(c.data() + (n - half), half);
    }
    const std::size_t m = split.size();
    const double len = static_cast<double>(half);

    std::vector<double> means(m);
    std::vector<double> vars(m);
    ParamDiagnostics out;
    for (std::size_t j = 0; j < m; ++j) {
        const auto& c = split[j];
        means[j] = std::accumulate(c.begin(), c.end(), 0.0) / len;
        double ss = 0.0;
        for (double x : c) {
            ss += (x - means[j]) * (x - means[j]);
        }
        vars[j] = ss / (len - 1.0);
        if (vars[j] == 0.0) {
            out.degenerate = true;
        }
    }
    const double grand = std::accumulate(means.begin(), means.end(), 0.0) / static_cast<double>(m);
    double b_ss = 0.0;
    for (double mu : means) {
        b_ss += (mu - grand) * (mu - grand);
    }
    const double between = len * b_ss / static_cast<double>(m - 1);
    const double within = std::accumulate(vars.begin(), vars.end(), 0.0) / static_cast<double>(m);
    const double total = static_cast<double>(m) * len;
    if (within == 0.0) {
        out.r_hat = between == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
        out.ess = between == 0.0 ? total : 0.0;
        return out;
    }
    const double var_plus = (len - 1.0) / len * within + between / len;
    out.r_hat = std::sqrt(var_plus / within);

    // autocovariance of every split chain at lag t (biased estimator)
    auto mean_acov = [&](std::size_t t) {
        double acc = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            const auto& c = split[j];
            double s = 0.0;
            for (std::size_t i = 0; i + t < half; ++i) {
                s += (c[i] - means[j]) * (c[i + t] - means[j]);
            }
            acc += s / len;
        }
        return acc / static_cast<double>(m);
    };
    auto rho = [&](std::size_t t) { return 1.0 - (within - mean_acov(t)) / var_plus; };

    double tau = 0.0;
    double prev_pair = std::numeric_limits<double>::infinity();
    std::size_t t = 0;
    for (; t + 1 < half; t += 2) {
        double pair = rho(t) + rho(t + 1);
        if (pair < 0.0) {
            break;
        }
        pair = std::min(pair, prev_pair);  // initial monotone sequence
        prev_pair = pair;
        tau += pair;
    }
    tau = -1.0 + 2.0 * tau;
    tau = std::max(tau, 1.0 / std::log10(total));
    out.ess = total / tau;
    return out;
}

// ---- WAIC ----------------------------------------------------------------

namespace {

// Two-pass sample variance (divisor n - 1) of v[0], v[stride], ...,
// measured from v[0] so that a constant sequence gives exactly 0.
double sample_variance(const double* v, std::size_t n, std::size_t stride) {
    if (n < 2) {
        return 0.0;
    }
    const double origin = v[0];
    double mean = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
        mean += v[s * stride] - origin;
    }
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
        const double d = v[s * stride] - origin - mean;
        ss += d * d;
    }
    return ss / static_cast<double>(n - 1);
}

}  // namespace

WaicResult waic_from_matrix(std::span<const double> log_lik, std::size_t draws,
                            std::span<const double> weights) {
    if (draws == 0 || log_lik.size() != draws * weights.size()) {
        throw Error(ErrorCode::precondition, "log-likelihood matrix shape does not match weights");
    }
    const std::size_t n = weights.size();
    WaicResult r;
    for (std::size_t i = 0; i < n; ++i) {
        double mx = kNegInf;
        for (std::size_t s = 0; s < draws; ++s) {
            const double v = log_lik[s * n + i];
            if (!std::isfinite(v)) {
                throw Error(ErrorCode::numerical, "non-finite log-likelihood at draw " + std::to_string(s) +
                                                      ", observation " + std::to_string(i));
            }
            mx = std::max(mx, v);
        }
        double sum_exp = 0.0;
        for (std::size_t s = 0; s < draws; ++s) {
            sum_exp += std::exp(log_lik[s * n + i] - mx);
        }
        const double var = sample_variance(log_lik.data() + i, draws, n);
        r.lppd += weights[i] * (mx + std::log(sum_exp / static_cast<double>(draws)));
        r.p_waic += weights[i] * var;
    }
    r.waic = -2.0 * (r.lppd - r.p_waic);
    return r;
}

// ---- fit -----------------------------------------------------------------

namespace {

struct SufficientStats {
    double s0 = 0.0;
    double s1 = 0.0;
    double s2 = 0.0;
    double l1 = 0.0;
    double l2 = 0.0;
    double min = std::numeric_limits<double>::infinity();
    double max = -std::numeric_limits<double>::infinity();
    std::size_t count = 0;
};

// Log posterior over the free parameters on the unconstrained scale.
class Target {
public:
    Target(const ModelSpec& model, const PriorSpec& prior, SufficientStats stats)
        : model_(model), prior_(prior), stats_(stats) {
        for (std::size_t i = 0; i < model.dimension(); ++i) {
            if (prior.params[i].kind != PriorKind::fixed) {
                free_.push_back(i);
            }
        }
    }

    std::size_t dim() const { return free_.size(); }
    const std::vector<std::size_t>& free_indices() const { return free_; }

    std::array<double, 2> params(std::span<const double> z) const {
        std::array<double, 2> theta{};
        for (std::size_t i = 0; i < model_.dimension(); ++i) {
            theta[i] = prior_.params[i].a;  // fixed value unless overwritten below
        }
        for (std::size_t k = 0; k < free_.size(); ++k) {
            const std::size_t i = free_[k];
            theta[i] = is_positive_param(model_.family, i) ? std::exp(z[k]) : z[k];
        }
        return theta;
    }

    double log_lik(const std::array<double, 2>& theta) const {
        if (stats_.count == 0) {
            return 0.0;
        }
        for (std::size_t i = 0; i < model_.dimension(); ++i) {
            if (!std::isfinite(theta[i]) || (is_positive_param(model_.family, i) && !(theta[i] > 0.0))) {
                return kNegInf;
            }
        }
        Continuous c{model_.family, theta, model_.lower, model_.upper};
        const LogDensityKernel k = make_kernel(c);
        if (!k.in_support(stats_.min) || !k.in_support(stats_.max)) {
            return kNegInf;
        }
        const double v = k.c0 * stats_.s0 + k.c_y * stats_.s1 + k.c_y2 * stats_.s2 + k.c_logy * stats_.l1 +
                         k.c_logy2 * stats_.l2;
        return std::isfinite(v) ? v : kNegInf;
    }

    double log_prior(std::span<const double> z) const {
        double lp = 0.0;
        for (std::size_t k = 0; k < free_.size(); ++k) {
            const std::size_t i = free_[k];
            const ParamPrior& p = prior_.params[i];
            const bool positive = is_positive_param(model_.family, i);
            if (p.kind == PriorKind::log_normal) {
                lp += normal_logpdf(z[k], p.a, p.b);  // Jacobian of exp absorbed
            } else {
                const double theta = positive ? std::exp(z[k]) : z[k];
                lp += normal_logpdf(theta, p.a, p.b) + (positive ? z[k] : 0.0);
            }
        }
        return lp;
    }

    double log_post(std::span<const double> z) const {
        for (double v : z) {
            if (!std::isfinite(v) || std::abs(v) > 700.0) {
                return kNegInf;
            }
        }
        const double ll = log_lik(params(z));
        if (ll == kNegInf) {
            return kNegInf;
        }
        return ll + log_prior(z);
    }

    const ModelSpec& model() const { return model_; }
    const PriorSpec& prior() const { return prior_; }
    const SufficientStats& stats() const { return stats_; }

private:
    ModelSpec model_;
    PriorSpec prior_;
    SufficientStats stats_;
    std::vector<std::size_t> free_;
};

// Lower-triangular Cholesky factor of a small SPD matrix (row-major).
std::optional<std::vector<double>> cholesky(const std::vector<double>& a, std::size_t d) {
    std::vector<double> l(d * d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = a[i * d + j];
            for (std::size_t k = 0; k < j; ++k) {
                s -= l[i * d + k] * l[j * d + k];
            }
            if (i == j) {
                if (!(s > 0.0) || !std::isfinite(s)) {
                    return std::nullopt;
                }
                l[i * d + i] = std::sqrt(s);
            } else {
                l[i * d + j] = s / l[j * d + j];
            }
        }
    }
    return l;
}

std::vector<double> identity_scaled(std::size_t d, double s) {
    std::vector<double> m(d * d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
        m[i * d + i] = s;
    }
    return m;
}

// Nelder-Mead maximisation; small dimensions only.
std::vector<double> nelder_mead_max(const std::function<double(std::span<const double>)>& f,
                                    std::vector<double> start, double step) {
    const std::size_t d = start.size();
    if (d == 0) {
        return start;
    }
    std::vector<std::vector<double>> pts(d + 1, start);
    std::vector<double> vals(d + 1);
    for (std::size_t i = 0; i < d; ++i) {
        pts[i + 1][i] += step;
    }
    auto eval = [&](const std::vector<double>& p) {
        const double v = f(p);
        return std::isfinite(v) ? -v : std::numeric_limits<double>::infinity();
    };
    for (std::size_t i = 0; i <= d; ++i) {
        vals[i] = eval(pts[i]);
    }
    std::vector<std::size_t> order(d + 1);
    for (int iter = 0; iter < 2000; ++iter) {
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
        const std::size_t best = order.front();
        const std::size_t worst = order.back();
        const std::size_t second = order[d - 1];
        if (std::abs(vals[worst] - vals[best]) < 1e-10 * (1.0 + std::abs(vals[best])) && iter > 10) {
            break;
        }
        std::vector<double> centroid(d, 0.0);
        for (std::size_t i = 0; i <= d; ++i) {
            if (i != worst) {
                for (std::size_t k = 0; k < d; ++k) {
                    centroid[k] += pts[i][k] / static_cast<double>(d);
                }
            }
        }
        auto along = [&](double t) {
            std::vector<double> p(d);
            for (std::size_t k = 0; k < d; ++k) {
                p[k] = centroid[k] + t * (pts[worst][k] - centroid[k]);
            }
            return p;
        };
        auto reflected = along(-1.0);
        const double fr = eval(reflected);
        if (fr < vals[best]) {
            auto expanded = along(-2.0);
            const double fe = eval(expanded);
            if (fe < fr) {
                pts[worst] = expanded;
                vals[worst] = fe;
            } else {
                pts[worst] = reflected;
                vals[worst] = fr;
            }
            continue;
        }
        if (fr < vals[second]) {
            pts[worst] = reflected;
            vals[worst] = fr;
            continue;
        }
        auto contracted = along(fr < vals[worst] ? -0.5 : 0.5);
        const double fc = eval(contracted);
        if (fc < std::min(fr, vals[worst])) {
            pts[worst] = contracted;
            vals[worst] = fc;
            continue;
        }
        for (std::size_t i = 0; i <= d; ++i) {
            if (i != best) {
                for (std::size_t k = 0; k < d; ++k) {
                    pts[i][k] = pts[best][k] + 0.5 * (pts[i][k] - pts[best][k]);
                }
                vals[i] = eval(pts[i]);
            }
        }
    }
    const auto best = static_cast<std::size_t>(std::min_element(vals.begin(), vals.end()) - vals.begin());
    return pts[best];
}

// Method-of-moments start on the unconstrained scale.
std::vector<double> moment_start(const Target& target) {
    const SufficientStats& st = target.stats();
    const Family f = target.model().family;
    std::array<double, 2> theta{};
    if (st.count == 0 || !(st.s0 > 0.0)) {
        for (std::size_t i = 0; i < target.model().dimension(); ++i) {
            const ParamPrior& p = target.prior().params[i];
            theta[i] = p.kind == PriorKind::log_normal ? std::exp(p.a) : (is_positive_param(f, i) ? 1.0 : p.a);
        }
    } else {
        const double mean = st.s1 / st.s0;
        const double var = std::max(st.s2 / st.s0 - mean * mean, 1e-12);
        const double lmean = st.l1 / st.s0;
        const double lvar = std::max(st.l2 / st.s0 - lmean * lmean, 1e-12);
        switch (f) {
            case Family::exponential: theta = {1.0 / std::max(mean, 1e-12), 0.0}; break;
            case Family::normal:
            case Family::truncated_normal: theta = {mean, std::sqrt(var)}; break;
            case Family::log_normal: theta = {lmean, std::sqrt(lvar)}; break;
            case Family::gamma: theta = {mean * mean / var, std::max(mean, 1e-12) / var}; break;
        }
    }
    std::vector<double> z;
    for (std::size_t i : target.free_indices()) {
        z.push_back(is_positive_param(f, i) ? std::log(theta[i]) : theta[i]);
    }
    return z;
}

// Laplace covariance at z from a finite-difference Hessian.
std::vector<double> laplace_covariance(const Target& target, const std::vector<double>& z) {
    const std::size_t d = z.size();
    const double h = 1e-3;
    std::vector<double> neg_h(d * d);
    auto f = [&](std::vector<double> p) { return target.log_post(p); };
    const double f0 = f(z);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = i; j < d; ++j) {
            double v = 0.0;
            if (i == j) {
                auto zp = z;
                auto zm = z;
                zp[i] += h;
                zm[i] -= h;
                v = (f(zp) - 2.0 * f0 + f(zm)) / (h * h);
            } else {
                auto pp = z, pm = z, mp = z, mm = z;
                pp[i] += h, pp[j] += h;
                pm[i] += h, pm[j] -= h;
                mp[i] -= h, mp[j] += h;
                mm[i] -= h, mm[j] -= h;
                v = (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * h * h);
            }
            neg_h[i * d + j] = -v;
            neg_h[j * d + i] = -v;
        }
    }
    const auto l = cholesky(neg_h, d);
    if (!l) {
        return identity_scaled(d, 0.01);
    }
    // invert via the Cholesky factor: (L L^T)^{-1}
    std::vector<double> inv(d * d, 0.0);
    for (std::size_t col = 0; col < d; ++col) {
        std::vector<double> e(d, 0.0);
        e[col] = 1.0;
        std::vector<double> y(d);
        for (std::size_t i = 0; i < d; ++i) {
            double s = e[i];
            for (std::size_t k = 0; k < i; ++k) {
                s -= (*l)[i * d + k] * y[k];
            }
            y[i] = s / (*l)[i * d + i];
        }
        for (std::size_t i = d; i-- > 0;) {
            double s = y[i];
            for (std::size_t k = i + 1; k < d; ++k) {
                s -= (*l)[k * d + i] * inv[k * d + col];
            }
            inv[i * d + col] = s / (*l)[i * d + i];
        }
    }
    for (double v : inv) {
        if (!std::isfinite(v)) {
            return identity_scaled(d, 0.01);
        }
    }
    return inv;
}

struct ChainResult {
    std::vector<double> z_draws;  // [draws x d]
    std::size_t accepted = 0;
};

ChainResult run_chain(const Target& target, const std::vector<double>& centre, const std::vector<double>& cov,
                      const SamplerConfig& cfg, std::uint64_t seed) {
    const std::size_t d = target.dim();
    ChainResult out;
    out.z_draws.reserve(cfg.draws_per_chain * d);
    Rng rng(seed);
    if (d == 0) {
        return out;
    }
    std::vector<double> chol = cholesky(cov, d).value_or(identity_scaled(d, 0.1));

    // over-dispersed start around the optimum
    std::vector<double> z = centre;
    double lp = kNegInf;
    for (int attempt = 0; attempt < 50 && !std::isfinite(lp); ++attempt) {
        const double spread = attempt < 25 ? 2.0 : 0.0;
        std::vector<double> eps(d);
        for (auto& e : eps) {
            e = rng.normal();
        }
        for (std::size_t i = 0; i < d; ++i) {
            double s = 0.0;
            for (std::size_t k = 0; k <= i; ++k) {
                s += chol[i * d + k] * eps[k];
            }
            z[i] = centre[i] + spread * s;
        }
        lp = target.log_post(z);
    }
    if (!std::isfinite(lp)) {
        throw Error(ErrorCode::numerical, "could not find a finite starting point for " + target.model().name());
    }

    double log_scale = std::log(2.38 / std::sqrt(static_cast<double>(d)));
    const std::size_t total = cfg.warmup + cfg.draws_per_chain;
    const std::size_t cov_from = cfg.warmup / 4;
    const std::size_t cov_at = cfg.warmup / 2;
    std::vector<double> warm_hist;
    std::vector<double> prop(d);
    std::vector<double> eps(d);

    for (std::size_t it = 0; it < total; ++it) {
        const double scale = std::exp(log_scale);
        for (auto& e : eps) {
            e = rng.normal();
        }
        for (std::size_t i = 0; i < d; ++i) {
            double s = 0.0;
            for (std::size_t k = 0; k <= i; ++k) {
                s += chol[i * d + k] * eps[k];
            }
            prop[i] = z[i] + scale * s;
        }
        const double lp_prop = target.log_post(prop);
        const double log_ratio = lp_prop - lp;
        const double accept_prob = std::isfinite(lp_prop) ? std::min(1.0, std::exp(std::min(0.0, log_ratio))) : 0.0;
        const bool accept = std::log(rng.uniform()) < log_ratio;
        if (accept) {
            z = prop;
            lp = lp_prop;
        }

        if (it < cfg.warmup) {
            const double gain = std::pow(static_cast<double>(it + 1), -0.6);
            log_scale = std::clamp(log_scale + gain * (accept_prob - cfg.adapt_target_accept), -20.0, 5.0);
            if (it >= cov_from && it < cov_at) {
                warm_hist.insert(warm_hist.end(), z.begin(), z.end());
            }
            if (it + 1 == cov_at && warm_hist.size() >= 20 * d) {
                const std::size_t n = warm_hist.size() / d;
                std::vector<double> mean(d, 0.0);
                for (std::size_t r = 0; r < n; ++r) {
                    for (std::size_t i = 0; i < d; ++i) {
                        mean[i] += warm_hist[r * d + i] / static_cast<double>(n);
                    }
                }
                std::vector<double> emp(d * d, 0.0);
                for (std::size_t r = 0; r < n; ++r) {
                    for (std::size_t i = 0; i < d; ++i) {
                        for (std::size_t j = 0; j < d; ++j) {
                            emp[i * d + j] += (warm_hist[r * d + i] - mean[i]) * (warm_hist[r * d + j] - mean[j]) /
                                              static_cast<double>(n - 1);
                        }
                    }
                }
                for (std::size_t i = 0; i < d; ++i) {
                    emp[i * d + i] += 1e-12;
                }
                if (auto l = cholesky(emp, d)) {
                    chol = *l;
                    log_scale = std::log(2.38 / std::sqrt(static_cast<double>(d)));
                }
            }
        } else {
            out.z_draws.insert(out.z_draws.end(), z.begin(), z.end());
            out.accepted += accept ? 1 : 0;
        }
    }
    return out;
}

std::vector<double> native_values(const WeightedSample& data, Transform t) {
    std::vector<double> y(data.values);
    if (t == Transform::negate) {
        for (auto& v : y) {
            v = -v;
        }
    }
    return y;
}

void check_support(const ModelSpec& model, const std::vector<double>& y) {
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (model.point_mass && y[i] == model.atom_location) {
            continue;
        }
        bool ok = true;
        if (has_positive_support(model.family)) {
            ok = y[i] > 0.0;
        } else if (model.family == Family::truncated_normal) {
            ok = y[i] >= model.lower && y[i] <= model.upper;
        }
        if (!ok) {
            throw Error(ErrorCode::support, "observation " + std::to_string(i) + " (native value " +
                                                text::format_double(y[i]) + ") is outside the support of " +
                                                model.name());
        }
    }
}

}  // namespace

ModelInstance PosteriorFit::model_at(std::size_t s) const {
    const auto row = draw(s);
    const double pi = model.point_mass ? row[model.dimension()] : 0.0;
    return instantiate(model, row.first(model.dimension()), pi);
}

bool PosteriorFit::converged(double r_hat_limit) const {
    return std::all_of(diagnostics.begin(), diagnostics.end(),
                       [r_hat_limit](const ParamDiagnostics& d) { return d.r_hat <= r_hat_limit; });
}

std::size_t PosteriorFit::free_parameter_count() const {
    std::size_t n = model.point_mass ? 1 : 0;
    for (const auto& p : prior.params) {
        n += p.kind == PriorKind::fixed ? 0 : 1;
    }
    return n;
}

PosteriorFit fit(const WeightedSample& data, const ModelSpec& model, const PriorSpec& prior,
                 const SamplerConfig& cfg, FitLabels labels, Exec exec) {
    cfg.validate();
    prior.validate(model.family);
    data.validate();
    if (model.family == Family::truncated_normal && !(model.lower < model.upper)) {
        throw Error(ErrorCode::config, "truncated_normal bounds must satisfy lower < upper");
    }

    const std::vector<double> y = native_values(data, model.transform);
    check_support(model, y);
    const std::vector<double> w = data.likelihood_weights(cfg.weight_mode);

    SufficientStats stats;
    double atom_weight = 0.0;
    double off_atom_weight = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (model.point_mass && y[i] == model.atom_location) {
            atom_weight += w[i];
            continue;
        }
        off_atom_weight += w[i];
        const double ly = y[i] > 0.0 ? std::log(y[i]) : 0.0;
        stats.s0 += w[i];
        stats.s1 += w[i] * y[i];
        stats.s2 += w[i] * y[i] * y[i];
        stats.l1 += w[i] * ly;
        stats.l2 += w[i] * ly * ly;
        stats.min = std::min(stats.min, y[i]);
        stats.max = std::max(stats.max, y[i]);
        ++stats.count;
    }

    const Target target(model, prior, stats);
    const std::size_t d = target.dim();

    // start from the likelihood optimum, or the moment estimate if that fails
    std::vector<double> centre = moment_start(target);
    if (stats.count > 0 && d > 0) {
        auto ll = [&](std::span<const double> z) { return target.log_lik(target.params(z)); };
        auto opt = nelder_mead_max(ll, centre, 0.1);
        if (std::isfinite(target.log_post(opt))) {
            centre = std::move(opt);
        }
    }
    if (!std::isfinite(target.log_post(centre))) {
        auto lp = [&](std::span<const double> z) { return target.log_post(z); };
        centre = nelder_mead_max(lp, centre, 0.5);
    }
    const std::vector<double> cov = d > 0 ? laplace_covariance(target, centre) : std::vector<double>{};

    PosteriorFit out;
    out.model = model;
    out.prior = prior;
    for (auto name : param_names(model.family)) {
        out.param_names.emplace_back(name);
    }
    if (model.point_mass) {
        out.param_names.emplace_back("pi");
    }
    out.chains = cfg.chains;
    out.draws_per_chain = cfg.draws_per_chain;
    out.labels = std::move(labels);
    out.n_obs = data.size();
    out.weight_total = std::accumulate(data.weights.begin(), data.weights.end(), 0.0);
    out.weight_mode = cfg.weight_mode;
    out.seed = cfg.seed;

    const std::size_t dim = out.dimension();
    const std::size_t per_chain = cfg.draws_per_chain;
    out.draws.assign(cfg.chains * per_chain * dim, 0.0);
    std::vector<std::size_t> accepted(cfg.chains, 0);
    std::vector<std::optional<Error>> errors(cfg.chains);

    auto run_one = [&](std::size_t c) {
        const std::uint64_t chain_seed = derive_seed(cfg.seed, c);
        const ChainResult res = run_chain(target, centre, cov, cfg, chain_seed);
        accepted[c] = res.accepted;
        Rng pi_rng(derive_seed(chain_seed, 0x5049ULL));
        for (std::size_t k = 0; k < per_chain; ++k) {
            double* row = out.draws.data() + (c * per_chain + k) * dim;
            const auto theta = d > 0 ? target.params(std::span<const double>(res.z_draws.data() + k * d, d))
                                     : target.params({});
            for (std::size_t i = 0; i < model.dimension(); ++i) {
                row[i] = theta[i];
            }
            if (model.point_mass) {
                row[model.dimension()] = pi_rng.beta(prior.pi.a + atom_weight, prior.pi.b + off_atom_weight);
            }
        }
    };

    if (exec == Exec::serial) {
        for (std::size_t c = 0; c < cfg.chains; ++c) {
            run_one(c);
        }
    } else {
        const auto nc = static_cast<std::ptrdiff_t>(cfg.chains);
#pragma omp parallel for schedule(static, 1) num_threads(jobs())
        for (std::ptrdiff_t c = 0; c < nc; ++c) {
            try {
                run_one(static_cast<std::size_t>(c));
            } catch (const Error& e) {
                errors[c] = e;
            }
        }
        for (auto& e : errors) {
            if (e) {
                throw *e;
            }
        }
    }

    const std::size_t total_accepted = std::accumulate(accepted.begin(), accepted.end(), std::size_t{0});
    out.accept_rate = d > 0 ? static_cast<double>(total_accepted) / static_cast<double>(out.total_draws()) : 1.0;

    for (std::size_t p = 0; p < dim; ++p) {
        if (p < model.dimension() && prior.params[p].kind == PriorKind::fixed) {
            out.diagnostics.push_back(ParamDiagnostics{1.0, static_cast<double>(out.total_draws()), false});
            continue;
        }
        std::vector<std::vector<double>> per(cfg.chains, std::vector<double>(per_chain));
        for (std::size_t c = 0; c < cfg.chains; ++c) {
            for (std::size_t k = 0; k < per_chain; ++k) {
                per[c][k] = out.draws[(c * per_chain + k) * dim + p];
            }
        }
        out.diagnostics.push_back(diagnose(per));
        if (out.diagnostics.back().r_hat > 1.05) {
            out.warnings.push_back("non-convergence: r_hat(" + out.param_names[p] +
                                   ") = " + text::format_double(out.diagnostics.back().r_hat));
        }
        if (out.diagnostics.back().degenerate) {
            out.warnings.push_back("degenerate chain for " + out.param_names[p]);
        }
    }
    if (model.family == Family::normal && !data.values.empty()) {
        const bool one_sided = std::all_of(y.begin(), y.end(), [](double v) { return v >= 0.0; });
        if (one_sided) {
            out.warnings.push_back("support: normal model places mass below 0 for non-negative data");
        }
    }

    out.waic = compute_waic(out, data, exec);
    return out;
}

std::vector<double> log_lik_matrix(const PosteriorFit& fit, const WeightedSample& data) {
    const std::size_t n = data.size();
    std::vector<double> out(fit.total_draws() * n);
    for (std::size_t s = 0; s < fit.total_draws(); ++s) {
        const ModelInstance m = fit.model_at(s);
        for (std::size_t i = 0; i < n; ++i) {
            out[s * n + i] = log_density(m, data.values[i]);
        }
    }
    return out;
}

WaicResult compute_waic(const PosteriorFit& fit, const WeightedSample& data, Exec exec) {
    data.validate();
    const std::vector<double> w = data.likelihood_weights(fit.weight_mode);
    const std::vector<double> y = native_values(data, fit.model.transform);

    // pool identical observations
    std::vector<std::size_t> order(y.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return y[a] < y[b]; });
    std::vector<double> uy;
    std::vector<double> uw;
    std::vector<std::size_t> first_index;
    for (std::size_t idx : order) {
        if (!uy.empty() && uy.back() == y[idx]) {
            uw.back() += w[idx];
        } else {
            uy.push_back(y[idx]);
            uw.push_back(w[idx]);
            first_index.push_back(idx);
        }
    }

    const std::size_t draws = fit.total_draws();
    const std::size_t dim = fit.model.dimension();
    std::vector<LogDensityKernel> kernels(draws);
    std::vector<double> log_pi(draws, 0.0);
    std::vector<double> log_1mpi(draws, 0.0);
    for (std::size_t s = 0; s < draws; ++s) {
        const auto row = fit.draw(s);
        Continuous c{fit.model.family, {}, fit.model.lower, fit.model.upper};
        std::copy(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(dim), c.params.begin());
        kernels[s] = make_kernel(c);
        if (fit.model.point_mass) {
            log_pi[s] = std::log(row[dim]);
            log_1mpi[s] = std::log1p(-row[dim]);
        }
    }

    const std::size_t groups = uy.size();
    std::vector<double> lme(groups);
    std::vector<double> var(groups);
    std::vector<std::optional<Error>> errors(groups);

    auto eval_group = [&](std::size_t g, std::vector<double>& buf) {
        const double yv = uy[g];
        const bool at_atom = fit.model.point_mass && yv == fit.model.atom_location;
        const double ly = yv > 0.0 ? std::log(yv) : 0.0;
        double mx = kNegInf;
        for (std::size_t s = 0; s < draws; ++s) {
            double v = 0.0;
            if (at_atom) {
                v = log_pi[s];
            } else {
                const LogDensityKernel& k = kernels[s];
                v = k.in_support(yv) ? k(yv, ly) + log_1mpi[s] : kNegInf;
            }
            if (!std::isfinite(v)) {
                throw Error(ErrorCode::numerical, "non-finite log-likelihood at draw " + std::to_string(s) +
                                                      ", observation " + std::to_string(first_index[g]));
            }
            buf[s] = v;
            mx = std::max(mx, v);
        }
        double sum_exp = 0.0;
        for (std::size_t s = 0; s < draws; ++s) {
            sum_exp += std::exp(buf[s] - mx);
        }
        lme[g] = mx + std::log(sum_exp / static_cast<double>(draws));
        var[g] = sample_variance(buf.data(), draws, 1);
    };

    if (exec == Exec::serial) {
        std::vector<double> buf(draws);
        for (std::size_t g = 0; g < groups; ++g) {
            eval_group(g, buf);
        }
    } else {
        const auto ng = static_cast<std::ptrdiff_t>(groups);
#pragma omp parallel num_threads(jobs())
        {
            std::vector<double> buf(draws);
#pragma omp for schedule(static)
            for (std::ptrdiff_t g = 0; g < ng; ++g) {
                try {
                    eval_group(static_cast<std::size_t>(g), buf);
                } catch (const Error& e) {
                    errors[g] = e;
                }
            }
        }
        for (auto& e : errors) {
            if (e) {
                throw *e;
            }
        }
    }

    WaicResult r;
    for (std::size_t g = 0; g < groups; ++g) {
        r.lppd += uw[g] * lme[g];
        r.p_waic += uw[g] * var[g];
    }
    r.waic = -2.0 * (r.lppd - r.p_waic);
    return r;
}

const PosteriorFit& select_model(std::span<const PosteriorFit> fits) {
    if (fits.empty()) {
        throw Error(ErrorCode::precondition, "model selection needs at least one fit");
    }
    const bool any_converged = std::any_of(fits.begin(), fits.end(), [](const PosteriorFit& f) { return f.converged(); });
    const PosteriorFit* best = nullptr;
    auto rank = [](const PosteriorFit& f) {
        return std::make_tuple(f.waic.waic, f.free_parameter_count(), static_cast<int>(f.model.family),
                               f.model.point_mass);
    };
    for (const auto& f : fits) {
        if (any_converged && !f.converged()) {
            continue;
        }
        if (!std::isfinite(f.waic.waic)) {
            continue;
        }
        if (best == nullptr || rank(f) < rank(*best)) {
            best = &f;
        }
    }
    if (best == nullptr) {
        throw Error(ErrorCode::numerical, "no fit with a finite WAIC to select from");
    }
    return *best;
}

}  // namespace equivcheck
