#include "equivcheck/equiv_stats.hpp"

#include "equivcheck/error.hpp"
#include "equivcheck/rng.hpp"
#include "equivcheck/text_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

namespace equivcheck {

std::string_view to_string(StatisticKind k) {
    switch (k) {
        case StatisticKind::mean_diff: return "mean_diff";
        case StatisticKind::ks_distance: return "ks_distance";
        case StatisticKind::proportion_ratio: return "proportion_ratio";
    }
    return "unknown";
}

std::optional<StatisticKind> statistic_kind_from_string(std::string_view name) {
    for (auto k : {StatisticKind::mean_diff, StatisticKind::ks_distance, StatisticKind::proportion_ratio}) {
        if (to_string(k) == name) {
            return k;
        }
    }
    return std::nullopt;
}

void StatisticSpec::validate() const {
    const std::string where = std::string(to_string(metric)) + "/" + std::string(to_string(kind));
    if (kind == StatisticKind::proportion_ratio && (!threshold || !std::isfinite(*threshold))) {
        throw Error(ErrorCode::config, where + ": proportion_ratio needs a finite threshold");
    }
    if (restriction) {
        if (kind != StatisticKind::ks_distance) {
            throw Error(ErrorCode::config, where + ": only ks_distance takes a restriction");
        }
        if (std::isnan(restriction->lo) || std::isnan(restriction->hi) || !(restriction->lo < restriction->hi)) {
            throw Error(ErrorCode::config, where + ": restriction bounds must satisfy lo < hi");
        }
    }
    if (conditional_on_nonmass && kind != StatisticKind::ks_distance) {
        throw Error(ErrorCode::config, where + ": conditional_on_nonmass applies to ks_distance only");
    }
}

std::string StatisticSpec::symbol() const {
    const std::string m(to_string(metric));
    switch (kind) {
        case StatisticKind::mean_diff: return "dmean(" + m + ")";
        case StatisticKind::ks_distance: return "D(" + m + ")";
        case StatisticKind::proportion_ratio: return "phi(" + m + ")";
    }
    return m;
}

double median(std::vector<double> values) {
    if (values.empty()) {
        throw Error(ErrorCode::precondition, "median of an empty sample");
    }
    const std::size_t n = values.size();
    const auto mid = values.begin() + static_cast<std::ptrdiff_t>(n / 2);
    std::nth_element(values.begin(), mid, values.end());
    if (n % 2 == 1) {
        return *mid;
    }
    const double upper = *mid;
    const double lower = *std::max_element(values.begin(), mid);
    return 0.5 * (lower + upper);
}

HdiInterval hdi(std::span<const double> draws, double mass) {
    if (!(mass > 0.0 && mass < 1.0)) {
        throw Error(ErrorCode::precondition, "HDI mass must lie in (0, 1)");
    }
    if (draws.size() < 20) {
        throw Error(ErrorCode::insufficient_data,
                    "HDI needs at least 20 draws, got " + std::to_string(draws.size()));
    }
    std::vector<double> s(draws.begin(), draws.end());
    for (double v : s) {
        if (!std::isfinite(v)) {
            throw Error(ErrorCode::numerical, "non-finite draw in HDI input");
        }
    }
    std::sort(s.begin(), s.end());
    const std::size_t n = s.size();
    const auto k = static_cast<std::size_t>(std::ceil(mass * static_cast<double>(n) - 1e-9));
    const std::size_t w = std::clamp<std::size_t>(k, 1, n);
    std::size_t best = 0;
    double best_width = s[w - 1] - s[0];
    for (std::size_t i = 1; i + w <= n; ++i) {
        const double width = s[i + w - 1] - s[i];
        if (width < best_width) {
            best_width = width;
            best = i;
        }
    }
    return HdiInterval{s[best], s[best + w - 1], mass};
}

// ---- KS distance between models -----------------------------------------

namespace {

constexpr std::size_t kQuantileLevels = 2048;
constexpr double kRegionFloor = 1e-12;

class RegionCdf {
public:
    RegionCdf(const ModelInstance& m, const KsOptions& opts) : m_(m), opts_(opts) {
        if (opts.restriction) {
            lo_ = opts.restriction->lo;
            hi_ = opts.restriction->hi;
            base_ = raw_left(lo_);
            mass_ = raw(hi_) - base_;
            if (!(mass_ > kRegionFloor)) {
                throw Error(ErrorCode::degenerate_region,
                            "restricted region [" + text::format_double(lo_) + ", " + text::format_double(hi_) +
                                "] has no mass under a model");
            }
        }
    }

    double value(double x) const { return scale(raw(x)); }
    double left(double x) const { return scale(raw_left(x)); }
    double lo() const { return lo_; }
    double hi() const { return hi_; }

    std::optional<double> atom() const {
        if (opts_.nonmass) {
            return std::nullopt;
        }
        auto loc = atom_location(m_);
        if (loc && (*loc < lo_ || *loc > hi_)) {
            return std::nullopt;
        }
        return loc;
    }

    void append_quantiles(std::vector<double>& out) const {
        const double p_lo = continuous_cdf(m_, lo_);
        const double p_hi = continuous_cdf(m_, hi_);
        if (!(p_hi > p_lo)) {
            return;
        }
        for (std::size_t k = 0; k < kQuantileLevels; ++k) {
            const double p = p_lo + (static_cast<double>(k) + 0.5) / kQuantileLevels * (p_hi - p_lo);
            const double x = continuous_quantile(m_, p);
            if (std::isfinite(x)) {
                out.push_back(std::clamp(x, lo_, hi_));
            }
        }
    }

private:
    double raw(double x) const { return opts_.nonmass ? continuous_cdf(m_, x) : cdf(m_, x); }
    double raw_left(double x) const { return opts_.nonmass ? continuous_cdf(m_, x) : cdf_left(m_, x); }
    double scale(double f) const { return opts_.conditional ? (f - base_) / mass_ : f; }

    const ModelInstance& m_;
    KsOptions opts_;
    double lo_ = -kInf;
    double hi_ = kInf;
    double base_ = 0.0;
    double mass_ = 1.0;
};

double golden_max(const std::function<double(double)>& f, double a, double b) {
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - invphi * (b - a);
    double d = a + invphi * (b - a);
    double fc = f(c);
    double fd = f(d);
    double best = std::max(fc, fd);
    for (int it = 0; it < 80 && (b - a) > 1e-12 * (1.0 + std::abs(a) + std::abs(b)); ++it) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = f(c);
            best = std::max(best, fc);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = f(d);
            best = std::max(best, fd);
        }
    }
    return best;
}

}  // namespace

double ks_distance_models(const ModelInstance& a, const ModelInstance& b, const KsOptions& opts) {
    if (opts.restriction && !(opts.restriction->lo < opts.restriction->hi)) {
        throw Error(ErrorCode::precondition, "KS restriction must satisfy lo < hi");
    }
    const RegionCdf fa(a, opts);
    const RegionCdf fb(b, opts);
    auto diff = [&](double x) { return std::abs(fa.value(x) - fb.value(x)); };

    std::vector<double> xs;
    xs.reserve(2 * kQuantileLevels + 4);
    fa.append_quantiles(xs);
    fb.append_quantiles(xs);
    for (double end : {fa.lo(), fa.hi()}) {
        if (std::isfinite(end)) {
            xs.push_back(end);
        }
    }
    double best = 0.0;
    for (const RegionCdf* f : {&fa, &fb}) {
        if (auto loc = f->atom()) {
            xs.push_back(*loc);
            best = std::max(best, std::abs(fa.left(*loc) - fb.left(*loc)));
        }
    }
    if (xs.empty()) {
        return best;
    }
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

    std::size_t arg = 0;
    double grid_best = -1.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double d = diff(xs[i]);
        if (d > grid_best) {
            grid_best = d;
            arg = i;
        }
    }
    best = std::max(best, grid_best);
    const double left = xs[arg == 0 ? 0 : arg - 1];
    const double right = xs[std::min(arg + 1, xs.size() - 1)];
    if (right > left) {
        best = std::max(best, golden_max(diff, left, right));
    }
    return std::min(best, 1.0);
}

// ---- statistics over posterior draws ------------------------------------

double statistic_value(const ModelInstance& reference, const ModelInstance& candidate, const StatisticSpec& spec) {
    switch (spec.kind) {
        case StatisticKind::mean_diff: return mean_of(reference) - mean_of(candidate);
        case StatisticKind::ks_distance:
            return ks_distance_models(reference, candidate,
                                      KsOptions{spec.restriction, spec.conditional, spec.conditional_on_nonmass});
        case StatisticKind::proportion_ratio: {
            const double ref = tail_mass(reference, *spec.threshold, spec.side);
            const double cand = tail_mass(candidate, *spec.threshold, spec.side);
            if (ref < 1e-12) {
                throw Error(ErrorCode::ratio_overflow,
                            "reference tail mass " + text::format_double(ref) + " below 1e-12");
            }
            return cand / ref;
        }
    }
    return 0.0;
}

std::vector<double> compute_statistic_draws(std::span<const ModelInstance> reference,
                                            std::span<const ModelInstance> candidate, const StatisticSpec& spec,
                                            Exec exec) {
    spec.validate();
    if (reference.size() != candidate.size()) {
        throw Error(ErrorCode::precondition, "statistic draws need equally many model pairs");
    }
    const std::size_t n = reference.size();
    std::vector<double> out(n);
    std::vector<std::optional<Error>> errors(n);
    auto one = [&](std::size_t s) {
        try {
            out[s] = statistic_value(reference[s], candidate[s], spec);
            if (!std::isfinite(out[s])) {
                throw Error(ErrorCode::numerical, "non-finite statistic value");
            }
        } catch (const Error& e) {
            errors[s] = Error(e.code(), std::string(e.what()) + " (draw " + std::to_string(s) + ")");
        }
    };
    if (exec == Exec::serial) {
        for (std::size_t s = 0; s < n; ++s) {
            one(s);
        }
    } else {
        const auto ns = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 16) num_threads(jobs())
        for (std::ptrdiff_t s = 0; s < ns; ++s) {
            one(static_cast<std::size_t>(s));
        }
    }
    for (auto& e : errors) {
        if (e) {
            throw *e;
        }
    }
    return out;
}

std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) {
        perm[i] = i;
    }
    Rng rng(seed);
    for (std::size_t i = n; i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.uniform_index(i));
        std::swap(perm[i - 1], perm[j]);
    }
    return perm;
}

StatisticPosterior posterior_statistic(const PosteriorFit& reference, const PosteriorFit& candidate,
                                       const StatisticSpec& spec, std::uint64_t pairing_seed, Pairing pairing,
                                       double mass, Exec exec) {
    spec.validate();
    if (!reference.labels.metric.empty() && !candidate.labels.metric.empty() &&
        reference.labels.metric != candidate.labels.metric) {
        throw Error(ErrorCode::precondition, "fits describe different metrics: " + reference.labels.metric +
                                                 " vs " + candidate.labels.metric);
    }
    if (reference.model.transform != candidate.model.transform) {
        throw Error(ErrorCode::precondition, "fits use different metric-axis transforms");
    }
    StatisticSpec effective = spec;
    const bool any_mixture = reference.model.point_mass || candidate.model.point_mass;
    if (effective.kind == StatisticKind::ks_distance && any_mixture) {
        effective.conditional_on_nonmass = true;
    }
    if (effective.conditional_on_nonmass && !any_mixture) {
        throw Error(ErrorCode::precondition, "conditional_on_nonmass needs a mixture model");
    }

    const std::size_t n = std::min(reference.total_draws(), candidate.total_draws());
    std::vector<std::size_t> perm;
    if (pairing == Pairing::permuted) {
        perm = seeded_permutation(candidate.total_draws(), pairing_seed);
    }
    std::vector<ModelInstance> ref_models;
    std::vector<ModelInstance> cand_models;
    ref_models.reserve(n);
    cand_models.reserve(n);
    for (std::size_t s = 0; s < n; ++s) {
        ref_models.push_back(reference.model_at(s));
        cand_models.push_back(candidate.model_at(pairing == Pairing::permuted ? perm[s] : s));
    }

    StatisticPosterior out;
    out.spec = effective;
    out.pairing_seed = pairing_seed;
    out.pairing = pairing;
    out.draws = compute_statistic_draws(ref_models, cand_models, effective, exec);
    out.hdi = hdi(out.draws, mass);
    out.point_estimate = median(out.draws);
    return out;
}

// ---- persistence ---------------------------------------------------------

void to_json(nlohmann::json& j, const StatisticSpec& spec) {
    using nlohmann::json;
    auto end = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
    j = json{{"metric", to_string(spec.metric)}, {"statistic", to_string(spec.kind)}};
    j["restriction"] = spec.restriction ? json::array({end(spec.restriction->lo), end(spec.restriction->hi)})
                                        : json(nullptr);
    j["conditional"] = spec.conditional;
    j["threshold"] = spec.threshold ? json(*spec.threshold) : json(nullptr);
    j["side"] = to_string(spec.side);
    j["conditional_on_nonmass"] = spec.conditional_on_nonmass;
}

void from_json(const nlohmann::json& j, StatisticSpec& spec) {
    const auto metric = metric_from_string(j.at("metric").get<std::string>());
    const auto kind = statistic_kind_from_string(j.at("statistic").get<std::string>());
    if (!metric || !kind) {
        throw Error(ErrorCode::config, "unknown metric or statistic in " + j.dump());
    }
    spec = StatisticSpec{};
    spec.metric = *metric;
    spec.kind = *kind;
    if (j.contains("restriction") && !j["restriction"].is_null()) {
        const auto& r = j["restriction"];
        if (!r.is_array() || r.size() != 2) {
            throw Error(ErrorCode::config, "restriction must be [lo, hi] (null for an open end)");
        }
        spec.restriction = Interval{r[0].is_null() ? -kInf : r[0].get<double>(),
                                    r[1].is_null() ? kInf : r[1].get<double>()};
    }
    if (j.contains("conditional")) {
        spec.conditional = j["conditional"].get<bool>();
    }
    if (j.contains("threshold") && !j["threshold"].is_null()) {
        spec.threshold = j["threshold"].get<double>();
    }
    if (j.contains("side")) {
        const auto side = tail_side_from_string(j["side"].get<std::string>());
        if (!side) {
            throw Error(ErrorCode::config, "side must be geq or leq");
        }
        spec.side = *side;
    }
    if (j.contains("conditional_on_nonmass")) {
        spec.conditional_on_nonmass = j["conditional_on_nonmass"].get<bool>();
    }
}

void save_statistic(const std::filesystem::path& dir, const std::string& stem, const StatisticPosterior& post) {
    using nlohmann::json;
    std::ostringstream csv;
    csv << "draw,value\n";
    for (std::size_t s = 0; s < post.draws.size(); ++s) {
        csv << s << ',' << text::format_double(post.draws[s]) << '\n';
    }
    const std::string draws_file = stem + ".draws.csv";
    json j{
        {"metric", to_string(post.spec.metric)},
        {"statistic", to_string(post.spec.kind)},
        {"draws_file", draws_file},
        {"hdi", {post.hdi.lo, post.hdi.hi}},
        {"mass", post.hdi.mass},
        {"point_estimate", post.point_estimate},
        {"symbol", post.spec.symbol()},
        {"spec", post.spec},
        {"pairing", post.pairing == Pairing::identity ? "identity" : "permuted"},
        {"pairing_seed", post.pairing_seed},
        {"n_draws", post.draws.size()},
    };
    text::write_file(dir / draws_file, csv.str());
    text::write_file(dir / (stem + ".json"), j.dump(2) + "\n");
}

StatisticPosterior load_statistic(const std::filesystem::path& json_path) {
    using nlohmann::json;
    if (!std::filesystem::exists(json_path)) {
        throw Error(ErrorCode::dependency, "missing statistic artifact " + json_path.string());
    }
    StatisticPosterior post;
    std::filesystem::path draws_path;
    try {
        const json j = json::parse(text::read_file(json_path));
        post.spec = j.at("spec").get<StatisticSpec>();
        post.hdi = HdiInterval{j.at("hdi").at(0).get<double>(), j.at("hdi").at(1).get<double>(),
                               j.at("mass").get<double>()};
        post.point_estimate = j.at("point_estimate").get<double>();
        post.pairing = j.at("pairing").get<std::string>() == "identity" ? Pairing::identity : Pairing::permuted;
        post.pairing_seed = j.at("pairing_seed").get<std::uint64_t>();
        draws_path = json_path.parent_path() / j.at("draws_file").get<std::string>();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::parse, json_path.string() + ": " + e.what());
    }
    if (!std::filesystem::exists(draws_path)) {
        throw Error(ErrorCode::dependency, "missing statistic artifact " + draws_path.string());
    }
    std::istringstream in(text::read_file(draws_path));
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        const auto fields = text::split(line, ',');
        double v = 0.0;
        if (fields.size() != 2 || !text::parse_double(fields[1], v)) {
            throw Error(ErrorCode::parse, draws_path.string() + ": malformed line '" + line + "'");
        }
        post.draws.push_back(v);
    }
    return post;
}

}  // namespace equivcheck
