#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace equivcheck {

enum class Family { exponential, normal, log_normal, gamma, truncated_normal };

inline constexpr std::array<Family, 5> kAllFamilies{Family::exponential, Family::normal,
                                                    Family::log_normal, Family::gamma,
                                                    Family::truncated_normal};

std::string_view to_string(Family f);
std::optional<Family> family_from_string(std::string_view name);
std::size_t param_count(Family f);
std::span<const std::string_view> param_names(Family f);
/// Exponential, log-normal and gamma live on (0, inf).
bool has_positive_support(Family f);

/// Maps the metric axis onto the axis the family is defined on. `negate`
/// lets positive-support families describe metrics that are <= 0
/// (no-return time, minimum accelerations) through their magnitudes.
enum class Transform { identity, negate };

std::string_view to_string(Transform t);
std::optional<Transform> transform_from_string(std::string_view name);

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// A parametric family with concrete parameters, on its native axis.
/// Parameterisations: exponential(rate), normal(mu, sigma),
/// log_normal(mu, sigma) of log y, gamma(shape, rate),
/// truncated_normal(mu, sigma) restricted to [lower, upper].
struct Continuous {
    Family family = Family::normal;
    std::array<double, 2> params{};
    double lower = 0.0;
    double upper = kInf;

    void validate() const;
    double log_pdf(double y) const;
    double cdf(double y) const;
    double sf(double y) const;
    double quantile(double p) const;
    double mean() const;
};

struct PointMass {
    double location = 0.0;  // native axis
    double pi = 0.0;        // probability of the atom
};

/// A fitted model on the metric axis: a continuous family, an optional
/// atom, and the transform from metric axis to native axis.
struct ModelInstance {
    Continuous continuous;
    std::optional<PointMass> atom;
    Transform transform = Transform::identity;

    void validate() const;
};

/// Recipe for a model: family, atom, transform and truncation bounds, but
/// no parameter values. Fits and persisted bundles carry one of these.
struct ModelSpec {
    Family family = Family::gamma;
    bool point_mass = false;
    double atom_location = 0.0;
    Transform transform = Transform::identity;
    double lower = 0.0;  // truncated_normal only
    double upper = kInf;

    std::size_t dimension() const { return param_count(family); }
    std::string name() const;
    friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

/// "gamma" or "mixture:gamma".
std::optional<ModelSpec> model_spec_from_name(std::string_view name, Transform transform);

ModelInstance instantiate(const ModelSpec& spec, std::span<const double> params, double pi = 0.0);

// ---- metric-axis functionals -------------------------------------------

/// Natural-log density w.r.t. Lebesgue measure plus counting measure at the
/// atom: log(pi) at the atom, log(1 - pi) + log f(x) elsewhere.
double log_density(const ModelInstance& m, double x);
/// Right-continuous CDF including the atom.
double cdf(const ModelInstance& m, double x);
/// Left limit P(X < x).
double cdf_left(const ModelInstance& m, double x);

/// Continuous component alone, on the metric axis.
double continuous_cdf(const ModelInstance& m, double x);
double continuous_sf(const ModelInstance& m, double x);
double continuous_quantile(const ModelInstance& m, double p);
/// Atom location on the metric axis, if any.
std::optional<double> atom_location(const ModelInstance& m);

double mean_of(const ModelInstance& m);

enum class TailSide { geq, leq };
std::string_view to_string(TailSide s);
std::optional<TailSide> tail_side_from_string(std::string_view name);

/// P(X >= threshold) or P(X <= threshold), atom included.
double tail_mass(const ModelInstance& m, double threshold, TailSide side);

std::vector<double> sample(const ModelInstance& m, std::size_t n, std::uint64_t seed);

// ---- likelihood kernel -------------------------------------------------

/// log f(y) = c0 + c_y y + c_y2 y^2 + c_logy log y + c_logy2 (log y)^2 on
/// [lower, upper] (native axis). Every supported family has this form, so
/// weighted log-likelihoods reduce to five weighted sums of the data.
struct LogDensityKernel {
    double c0 = 0.0;
    double c_y = 0.0;
    double c_y2 = 0.0;
    double c_logy = 0.0;
    double c_logy2 = 0.0;
    double lower = -kInf;
    double upper = kInf;
    bool open_lower = false;  // exclude y == lower

    bool in_support(double y) const {
        return (open_lower ? y > lower : y >= lower) && y <= upper;
    }
    /// `log_y` must be log(y) when the family uses it (ignored otherwise).
    double operator()(double y, double log_y) const {
        return c0 + y * (c_y + c_y2 * y) + log_y * (c_logy + c_logy2 * log_y);
    }
    bool uses_log() const { return c_logy != 0.0 || c_logy2 != 0.0; }
};

LogDensityKernel make_kernel(const Continuous& c);

}  // namespace equivcheck
