#include "equivcheck/freq_ks.hpp"

#include "equivcheck/error.hpp"
#include "equivcheck/rng.hpp"
#include "equivcheck/special_functions.hpp"
#include "equivcheck/text_io.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace equivcheck {

namespace {

void require_usable(const WeightedSample& s, std::string_view name) {
    s.validate();
    if (s.values.empty()) {
        throw Error(ErrorCode::empty_input, std::string(name) + " sample is empty");
    }
}

struct Obs {
    double value;
    double weight;
    bool in_a;
};

// Weighted KS distance over obs sorted by value; group totals given.
double sorted_distance(const std::vector<Obs>& obs, double total_a, double total_b) {
    double fa = 0.0;
    double fb = 0.0;
    double d = 0.0;
    for (std::size_t i = 0; i < obs.size();) {
        const double v = obs[i].value;
        for (; i < obs.size() && obs[i].value == v; ++i) {
            (obs[i].in_a ? fa : fb) += obs[i].weight;
        }
        d = std::max(d, std::abs(fa / total_a - fb / total_b));
    }
    return std::min(d, 1.0);
}

std::vector<Obs> pooled(const WeightedSample& a, const WeightedSample& b) {
    std::vector<Obs> obs;
    obs.reserve(a.size() + b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        obs.push_back({a.values[i], a.weights[i], true});
    }
    for (std::size_t i = 0; i < b.size(); ++i) {
        obs.push_back({b.values[i], b.weights[i], false});
    }
    return obs;
}

}  // namespace

double WeightedEcdf::operator()(double value) const {
    const auto it = std::upper_bound(x.begin(), x.end(), value);
    if (it == x.begin()) {
        return 0.0;
    }
    return F[static_cast<std::size_t>(it - x.begin()) - 1];
}

WeightedEcdf weighted_ecdf(const WeightedSample& data) {
    require_usable(data, "ECDF");
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return data.values[i] < data.values[j]; });
    const double total = std::accumulate(data.weights.begin(), data.weights.end(), 0.0);
    WeightedEcdf e;
    double acc = 0.0;
    for (std::size_t idx : order) {
        acc += data.weights[idx];
        if (!e.x.empty() && e.x.back() == data.values[idx]) {
            e.F.back() = acc / total;
        } else {
            e.x.push_back(data.values[idx]);
            e.F.push_back(acc / total);
        }
    }
    e.F.back() = 1.0;
    return e;
}

double effective_sample_size(std::span<const double> weights) {
    double s = 0.0;
    double s2 = 0.0;
    for (double w : weights) {
        s += w;
        s2 += w * w;
    }
    if (!(s2 > 0.0)) {
        throw Error(ErrorCode::degenerate_weights, "effective sample size of all-zero weights");
    }
    return s * s / s2;
}

double ks_statistic(const WeightedSample& a, const WeightedSample& b) {
    require_usable(a, "first");
    require_usable(b, "second");
    auto obs = pooled(a, b);
    std::stable_sort(obs.begin(), obs.end(), [](const Obs& x, const Obs& y) { return x.value < y.value; });
    const double ta = std::accumulate(a.weights.begin(), a.weights.end(), 0.0);
    const double tb = std::accumulate(b.weights.begin(), b.weights.end(), 0.0);
    return sorted_distance(obs, ta, tb);
}

std::string_view to_string(KsMethod m) { return m == KsMethod::asymptotic ? "asymptotic" : "permutation"; }

KsTestResult two_sample_ks(const WeightedSample& a, const WeightedSample& b, const KsTestOptions& opts, Exec exec) {
    require_usable(a, "first");
    require_usable(b, "second");
    KsTestResult r;
    r.method = opts.method;
    r.n_eff_a = effective_sample_size(a.weights);
    r.n_eff_b = effective_sample_size(b.weights);
    r.d = ks_statistic(a, b);

    const double v0 = a.values.front();
    auto constant = [v0](const WeightedSample& s) {
        return std::all_of(s.values.begin(), s.values.end(), [v0](double v) { return v == v0; });
    };
    if (constant(a) && constant(b)) {
        r.degenerate = true;
        r.d = 0.0;
        r.p_value = 1.0;
        return r;
    }

    if (opts.method == KsMethod::asymptotic) {
        const double ne = r.n_eff_a * r.n_eff_b / (r.n_eff_a + r.n_eff_b);
        const double root = std::sqrt(ne);
        r.p_value = std::clamp(special::kolmogorov_sf((root + 0.12 + 0.11 / root) * r.d), 0.0, 1.0);
        return r;
    }

    if (opts.permutations < 2000) {
        throw Error(ErrorCode::config, "permutation KS needs at least 2000 replicates");
    }
    r.permutations = opts.permutations;
    const std::vector<Obs> base = pooled(a, b);
    const std::size_t na = a.size();
    const auto reps = static_cast<std::ptrdiff_t>(opts.permutations);
    std::vector<unsigned char> exceed(opts.permutations, 0);
    // tolerance keeps floating-point reorderings of an equal d from counting as smaller
    const double cut = r.d - 1e-12;

    auto replicate = [&](std::size_t rep, std::vector<Obs>& work) {
        work = base;
        Rng rng(derive_seed(opts.seed, rep));
        for (std::size_t i = work.size(); i > 1; --i) {
            std::swap(work[i - 1], work[rng.uniform_index(i)]);
        }
        double ta = 0.0;
        double tb = 0.0;
        for (std::size_t i = 0; i < work.size(); ++i) {
            work[i].in_a = i < na;
            (work[i].in_a ? ta : tb) += work[i].weight;
        }
        if (!(ta > 0.0) || !(tb > 0.0)) {
            exceed[rep] = 1;  // a group without weight cannot be compared; count as extreme
            return;
        }
        std::stable_sort(work.begin(), work.end(), [](const Obs& x, const Obs& y) { return x.value < y.value; });
        exceed[rep] = sorted_distance(work, ta, tb) >= cut ? 1 : 0;
    };

    if (exec == Exec::serial) {
        std::vector<Obs> work;
        for (std::ptrdiff_t rep = 0; rep < reps; ++rep) {
            replicate(static_cast<std::size_t>(rep), work);
        }
    } else {
#pragma omp parallel num_threads(jobs())
        {
            std::vector<Obs> work;
#pragma omp for schedule(static)
            for (std::ptrdiff_t rep = 0; rep < reps; ++rep) {
                replicate(static_cast<std::size_t>(rep), work);
            }
        }
    }
    const auto count = std::accumulate(exceed.begin(), exceed.end(), std::size_t{0});
    r.p_value = static_cast<double>(count) / static_cast<double>(opts.permutations);
    return r;
}

void to_json(nlohmann::json& j, const KsTestResult& r) {
    j = nlohmann::json{{"d", r.d},
                       {"p_value", r.p_value},
                       {"n_eff_a", r.n_eff_a},
                       {"n_eff_b", r.n_eff_b},
                       {"method", to_string(r.method)},
                       {"permutations", r.permutations},
                       {"degenerate", r.degenerate}};
}

void from_json(const nlohmann::json& j, KsTestResult& r) {
    r.d = j.at("d").get<double>();
    r.p_value = j.at("p_value").get<double>();
    r.n_eff_a = j.at("n_eff_a").get<double>();
    r.n_eff_b = j.at("n_eff_b").get<double>();
    r.method = j.at("method").get<std::string>() == "permutation" ? KsMethod::permutation : KsMethod::asymptotic;
    r.permutations = j.at("permutations").get<std::size_t>();
    r.degenerate = j.at("degenerate").get<bool>();
}

void write_ecdf(const std::filesystem::path& path, const WeightedEcdf& ecdf) {
    std::ostringstream out;
    out << "x,F\n";
    for (std::size_t i = 0; i < ecdf.x.size(); ++i) {
        out << text::format_double(ecdf.x[i]) << ',' << text::format_double(ecdf.F[i]) << '\n';
    }
    text::write_file(path, out.str());
}

}  // namespace equivcheck
