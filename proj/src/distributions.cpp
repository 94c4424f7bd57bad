#include "equivcheck/distributions.hpp"

#include "equivcheck/error.hpp"
#include "equivcheck/rng.hpp"
#include "equivcheck/special_functions.hpp"

#include <algorithm>
#include <cmath>

namespace equivcheck {

namespace sp = special;

std::string_view to_string(Family f) {
    switch (f) {
        case Family::exponential: return "exponential";
        case Family::normal: return "normal";
        case Family::log_normal: return "log_normal";
        case Family::gamma: return "gamma";
        case Family::truncated_normal: return "truncated_normal";
    }
    return "unknown";
}

std::optional<Family> family_from_string(std::string_view name) {
    for (Family f : kAllFamilies) {
        if (to_string(f) == name) {
            return f;
        }
    }
    return std::nullopt;
}

std::size_t param_count(Family f) { return f == Family::exponential ? 1 : 2; }

std::span<const std::string_view> param_names(Family f) {
    static constexpr std::array<std::string_view, 1> rate{"rate"};
    static constexpr std::array<std::string_view, 2> loc_scale{"mu", "sigma"};
    static constexpr std::array<std::string_view, 2> shape_rate{"shape", "rate"};
    switch (f) {
        case Family::exponential: return rate;
        case Family::gamma: return shape_rate;
        default: return loc_scale;
    }
}

bool has_positive_support(Family f) {
    return f == Family::exponential || f == Family::log_normal || f == Family::gamma;
}

std::string_view to_string(Transform t) { return t == Transform::identity ? "identity" : "negate"; }

std::optional<Transform> transform_from_string(std::string_view name) {
    if (name == "identity") {
        return Transform::identity;
    }
    if (name == "negate") {
        return Transform::negate;
    }
    return std::nullopt;
}

std::string_view to_string(TailSide s) { return s == TailSide::geq ? "geq" : "leq"; }

std::optional<TailSide> tail_side_from_string(std::string_view name) {
    if (name == "geq") {
        return TailSide::geq;
    }
    if (name == "leq") {
        return TailSide::leq;
    }
    return std::nullopt;
}

// ---- Continuous ----------------------------------------------------------

namespace {

[[noreturn]] void domain_fail(const std::string& what) { throw Error(ErrorCode::parameter_domain, what); }

bool positive_finite(double v) { return v > 0.0 && std::isfinite(v); }

// Truncated normal pieces in standardized form.
struct TruncStd {
    double alpha;
    double beta;
    double log_z;  // log(Phi(beta) - Phi(alpha))
};

TruncStd trunc_std(const Continuous& c) {
    const double mu = c.params[0];
    const double sigma = c.params[1];
    const double alpha = (c.lower - mu) / sigma;
    const double beta = (c.upper - mu) / sigma;
    double log_z = 0.0;
    if (std::isinf(beta)) {
        log_z = sp::log_normal_sf(alpha);
    } else if (alpha > 0.0) {
        log_z = std::log(sp::normal_sf(alpha) - sp::normal_sf(beta));
    } else {
        log_z = std::log(sp::normal_cdf(beta) - sp::normal_cdf(alpha));
    }
    return {alpha, beta, log_z};
}

double trunc_sf_std(const TruncStd& t, double z) {
    if (z <= t.alpha) {
        return 1.0;
    }
    if (z >= t.beta) {
        return 0.0;
    }
    if (std::isinf(t.beta)) {
        return std::exp(sp::log_normal_sf(z) - t.log_z);
    }
    return (sp::normal_sf(z) - sp::normal_sf(t.beta)) / std::exp(t.log_z);
}

double trunc_cdf_std(const TruncStd& t, double z) {
    if (z <= t.alpha) {
        return 0.0;
    }
    if (z >= t.beta) {
        return 1.0;
    }
    if (t.alpha > 0.0) {
        if (std::isinf(t.beta)) {
            return -std::expm1(sp::log_normal_sf(z) - t.log_z);
        }
        return (sp::normal_sf(t.alpha) - sp::normal_sf(z)) / std::exp(t.log_z);
    }
    return (sp::normal_cdf(z) - sp::normal_cdf(t.alpha)) / std::exp(t.log_z);
}

}  // namespace

void Continuous::validate() const {
    switch (family) {
        case Family::exponential:
            if (!positive_finite(params[0])) {
                domain_fail("exponential rate must be positive");
            }
            break;
        case Family::normal:
        case Family::log_normal:
        case Family::truncated_normal:
            if (!std::isfinite(params[0]) || !positive_finite(params[1])) {
                domain_fail(std::string(to_string(family)) + " requires finite mu and sigma > 0");
            }
            if (family == Family::truncated_normal && !(lower < upper)) {
                domain_fail("truncated_normal bounds must satisfy lower < upper");
            }
            break;
        case Family::gamma:
            if (!positive_finite(params[0]) || !positive_finite(params[1])) {
                domain_fail("gamma shape and rate must be positive");
            }
            break;
    }
}

LogDensityKernel make_kernel(const Continuous& c) {
    c.validate();
    LogDensityKernel k;
    const double p0 = c.params[0];
    const double p1 = c.params[1];
    switch (c.family) {
        case Family::exponential:
            k.c0 = std::log(p0);
            k.c_y = -p0;
            k.lower = 0.0;
            break;
        case Family::normal:
        case Family::truncated_normal: {
            const double inv_var = 1.0 / (p1 * p1);
            k.c0 = -std::log(p1) - sp::kLnSqrt2Pi - 0.5 * p0 * p0 * inv_var;
            k.c_y = p0 * inv_var;
            k.c_y2 = -0.5 * inv_var;
            if (c.family == Family::truncated_normal) {
                k.c0 -= trunc_std(c).log_z;
                k.lower = c.lower;
                k.upper = c.upper;
            }
            break;
        }
        case Family::log_normal: {
            const double inv_var = 1.0 / (p1 * p1);
            k.c0 = -std::log(p1) - sp::kLnSqrt2Pi - 0.5 * p0 * p0 * inv_var;
            k.c_logy = p0 * inv_var - 1.0;
            k.c_logy2 = -0.5 * inv_var;
            k.lower = 0.0;
            k.open_lower = true;
            break;
        }
        case Family::gamma:
            k.c0 = p0 * std::log(p1) - sp::log_gamma(p0);
            k.c_y = -p1;
            k.c_logy = p0 - 1.0;
            k.lower = 0.0;
            k.open_lower = true;
            break;
    }
    return k;
}

double Continuous::log_pdf(double y) const {
    const LogDensityKernel k = make_kernel(*this);
    if (family == Family::gamma && y == 0.0) {
        if (params[0] == 1.0) {
            return std::log(params[1]);
        }
        return params[0] < 1.0 ? kInf : -kInf;
    }
    if (!k.in_support(y)) {
        return -kInf;
    }
    return k(y, k.uses_log() ? std::log(y) : 0.0);
}

double Continuous::cdf(double y) const {
    validate();
    switch (family) {
        case Family::exponential:
            return y <= 0.0 ? 0.0 : -std::expm1(-params[0] * y);
        case Family::normal:
            return sp::normal_cdf((y - params[0]) / params[1]);
        case Family::log_normal:
            return y <= 0.0 ? 0.0 : sp::normal_cdf((std::log(y) - params[0]) / params[1]);
        case Family::gamma:
            return y <= 0.0 ? 0.0 : (std::isinf(y) ? 1.0 : sp::gamma_p(params[0], params[1] * y));
        case Family::truncated_normal:
            return trunc_cdf_std(trunc_std(*this), (y - params[0]) / params[1]);
    }
    return 0.0;
}

double Continuous::sf(double y) const {
    validate();
    switch (family) {
        case Family::exponential:
            return y <= 0.0 ? 1.0 : std::exp(-params[0] * y);
        case Family::normal:
            return sp::normal_sf((y - params[0]) / params[1]);
        case Family::log_normal:
            return y <= 0.0 ? 1.0 : sp::normal_sf((std::log(y) - params[0]) / params[1]);
        case Family::gamma:
            return y <= 0.0 ? 1.0 : (std::isinf(y) ? 0.0 : sp::gamma_q(params[0], params[1] * y));
        case Family::truncated_normal:
            return trunc_sf_std(trunc_std(*this), (y - params[0]) / params[1]);
    }
    return 1.0;
}

double Continuous::quantile(double p) const {
    validate();
    if (!(p >= 0.0 && p <= 1.0)) {
        domain_fail("quantile level must lie in [0, 1]");
    }
    switch (family) {
        case Family::exponential:
            return -std::log1p(-p) / params[0];
        case Family::normal:
            return params[0] + params[1] * sp::normal_quantile(p);
        case Family::log_normal:
            return std::exp(params[0] + params[1] * sp::normal_quantile(p));
        case Family::gamma:
            return sp::gamma_p_inv(params[0], p) / params[1];
        case Family::truncated_normal: {
            if (p <= 0.0) {
                return lower;
            }
            if (p >= 1.0) {
                return upper;
            }
            const TruncStd t = trunc_std(*this);
            const double z_mass = std::exp(t.log_z);
            double z = 0.0;
            if (t.alpha > 0.0) {
                z = sp::normal_sf_inv(sp::normal_sf(t.alpha) - p * z_mass);
            } else {
                z = sp::normal_quantile(sp::normal_cdf(t.alpha) + p * z_mass);
            }
            return std::clamp(params[0] + params[1] * z, lower, upper);
        }
    }
    return 0.0;
}

double Continuous::mean() const {
    validate();
    switch (family) {
        case Family::exponential: return 1.0 / params[0];
        case Family::normal: return params[0];
        case Family::log_normal: return std::exp(params[0] + 0.5 * params[1] * params[1]);
        case Family::gamma: return params[0] / params[1];
        case Family::truncated_normal: {
            const TruncStd t = trunc_std(*this);
            auto log_phi = [](double z) { return -0.5 * z * z - sp::kLnSqrt2Pi; };
            double num = std::exp(log_phi(t.alpha) - t.log_z);
            if (std::isfinite(t.beta)) {
                num -= std::exp(log_phi(t.beta) - t.log_z);
            }
            return params[0] + params[1] * num;
        }
    }
    return 0.0;
}

// ---- ModelInstance -------------------------------------------------------

void ModelInstance::validate() const {
    continuous.validate();
    if (atom && !(atom->pi >= 0.0 && atom->pi <= 1.0)) {
        domain_fail("point-mass probability must lie in [0, 1]");
    }
}

std::string ModelSpec::name() const {
    return point_mass ? "mixture:" + std::string(to_string(family)) : std::string(to_string(family));
}

std::optional<ModelSpec> model_spec_from_name(std::string_view name, Transform transform) {
    ModelSpec spec;
    spec.transform = transform;
    constexpr std::string_view prefix = "mixture:";
    if (name.substr(0, prefix.size()) == prefix) {
        spec.point_mass = true;
        name.remove_prefix(prefix.size());
    }
    const auto family = family_from_string(name);
    if (!family) {
        return std::nullopt;
    }
    spec.family = *family;
    return spec;
}

ModelInstance instantiate(const ModelSpec& spec, std::span<const double> params, double pi) {
    if (params.size() != spec.dimension()) {
        domain_fail("parameter vector has wrong dimension for " + spec.name());
    }
    ModelInstance m;
    m.continuous.family = spec.family;
    std::copy(params.begin(), params.end(), m.continuous.params.begin());
    m.continuous.lower = spec.lower;
    m.continuous.upper = spec.upper;
    if (spec.point_mass) {
        m.atom = PointMass{spec.atom_location, pi};
    }
    m.transform = spec.transform;
    m.validate();
    return m;
}

namespace {

double to_native(const ModelInstance& m, double x) { return m.transform == Transform::negate ? -x : x; }

double pi_of(const ModelInstance& m) { return m.atom ? m.atom->pi : 0.0; }

}  // namespace

std::optional<double> atom_location(const ModelInstance& m) {
    if (!m.atom) {
        return std::nullopt;
    }
    return to_native(m, m.atom->location);
}

double log_density(const ModelInstance& m, double x) {
    m.validate();
    const double y = to_native(m, x);
    if (m.atom) {
        if (y == m.atom->location) {
            return std::log(m.atom->pi);
        }
        return std::log1p(-m.atom->pi) + m.continuous.log_pdf(y);
    }
    return m.continuous.log_pdf(y);
}

double continuous_cdf(const ModelInstance& m, double x) {
    if (std::isinf(x)) {
        return x > 0 ? 1.0 : 0.0;
    }
    return m.transform == Transform::identity ? m.continuous.cdf(x) : m.continuous.sf(-x);
}

double continuous_sf(const ModelInstance& m, double x) {
    if (std::isinf(x)) {
        return x > 0 ? 0.0 : 1.0;
    }
    return m.transform == Transform::identity ? m.continuous.sf(x) : m.continuous.cdf(-x);
}

double continuous_quantile(const ModelInstance& m, double p) {
    return m.transform == Transform::identity ? m.continuous.quantile(p)
                                              : -m.continuous.quantile(1.0 - p);
}

double cdf(const ModelInstance& m, double x) {
    m.validate();
    const double pi = pi_of(m);
    double value = (1.0 - pi) * continuous_cdf(m, x);
    if (const auto loc = atom_location(m); loc && x >= *loc) {
        value += pi;
    }
    return std::min(value, 1.0);
}

double cdf_left(const ModelInstance& m, double x) {
    m.validate();
    const double pi = pi_of(m);
    double value = (1.0 - pi) * continuous_cdf(m, x);
    if (const auto loc = atom_location(m); loc && x > *loc) {
        value += pi;
    }
    return std::min(value, 1.0);
}

double mean_of(const ModelInstance& m) {
    m.validate();
    double native = m.continuous.mean();
    if (m.atom) {
        native = m.atom->pi * m.atom->location + (1.0 - m.atom->pi) * native;
    }
    return m.transform == Transform::negate ? -native : native;
}

double tail_mass(const ModelInstance& m, double threshold, TailSide side) {
    m.validate();
    if (side == TailSide::leq) {
        return cdf(m, threshold);
    }
    const double pi = pi_of(m);
    double value = (1.0 - pi) * continuous_sf(m, threshold);
    if (const auto loc = atom_location(m); loc && threshold <= *loc) {
        value += pi;
    }
    return std::min(value, 1.0);
}

std::vector<double> sample(const ModelInstance& m, std::size_t n, std::uint64_t seed) {
    m.validate();
    Rng rng(seed);
    std::vector<double> out(n);
    const Continuous& c = m.continuous;
    for (auto& v : out) {
        double y = 0.0;
        if (m.atom && rng.uniform() < m.atom->pi) {
            y = m.atom->location;
        } else {
            switch (c.family) {
                case Family::exponential: y = rng.exponential(c.params[0]); break;
                case Family::normal: y = rng.normal(c.params[0], c.params[1]); break;
                case Family::log_normal: y = std::exp(rng.normal(c.params[0], c.params[1])); break;
                case Family::gamma: y = rng.gamma(c.params[0]) / c.params[1]; break;
                case Family::truncated_normal: {
                    const TruncStd t = trunc_std(c);
                    if (std::isinf(t.beta) && t.alpha > 5.0) {
                        // exponential rejection for far tails
                        const double lam = 0.5 * (t.alpha + std::sqrt(t.alpha * t.alpha + 4.0));
                        double z = 0.0;
                        for (;;) {
                            z = t.alpha + rng.exponential(lam);
                            if (rng.uniform() <= std::exp(-0.5 * (z - lam) * (z - lam))) {
                                break;
                            }
                        }
                        y = c.params[0] + c.params[1] * z;
                    } else {
                        y = c.quantile(rng.uniform());
                    }
                    break;
                }
            }
        }
        v = m.transform == Transform::negate ? -y : y;
    }
    return out;
}

}  // namespace equivcheck
