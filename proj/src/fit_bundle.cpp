#include "equivcheck/fit_bundle.hpp"

#include "equivcheck/error.hpp"
#include "equivcheck/text_io.hpp"

#include <json.hpp>

#include <cmath>
#include <sstream>

namespace equivcheck {

namespace {

using nlohmann::json;

json bound_to_json(double v) { return std::isfinite(v) ? json(v) : json(v > 0 ? "inf" : "-inf"); }

double bound_from_json(const json& j) {
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "inf") {
            return kInf;
        }
        if (s == "-inf") {
            return -kInf;
        }
        throw Error(ErrorCode::parse, "bad bound '" + s + "'");
    }
    return j.get<double>();
}

json prior_to_json(const ParamPrior& p) { return json{{"kind", to_string(p.kind)}, {"a", p.a}, {"b", p.b}}; }

ParamPrior prior_from_json(const json& j) {
    const auto kind = prior_kind_from_string(j.at("kind").get<std::string>());
    if (!kind) {
        throw Error(ErrorCode::parse, "unknown prior kind " + j.at("kind").dump());
    }
    return ParamPrior{*kind, j.at("a").get<double>(), j.at("b").get<double>()};
}

}  // namespace

void save_fit_bundle(const std::filesystem::path& dir, const PosteriorFit& fit) {
    std::ostringstream csv;
    csv << "chain,draw";
    for (const auto& name : fit.param_names) {
        csv << ',' << name;
    }
    csv << '\n';
    for (std::size_t c = 0; c < fit.chains; ++c) {
        for (std::size_t k = 0; k < fit.draws_per_chain; ++k) {
            csv << c << ',' << k;
            for (double v : fit.draw(c * fit.draws_per_chain + k)) {
                csv << ',' << text::format_double(v);
            }
            csv << '\n';
        }
    }

    json params = json::object();
    json r_hat = json::object();
    json ess = json::object();
    for (std::size_t p = 0; p < fit.dimension(); ++p) {
        double mean = 0.0;
        for (std::size_t s = 0; s < fit.total_draws(); ++s) {
            mean += fit.draw(s)[p];
        }
        params[fit.param_names[p]] = mean / static_cast<double>(std::max<std::size_t>(fit.total_draws(), 1));
        r_hat[fit.param_names[p]] = std::isfinite(fit.diagnostics[p].r_hat) ? json(fit.diagnostics[p].r_hat)
                                                                             : json("inf");
        ess[fit.param_names[p]] = fit.diagnostics[p].ess;
    }
    json degenerate = json::array();
    for (std::size_t p = 0; p < fit.dimension(); ++p) {
        if (fit.diagnostics[p].degenerate) {
            degenerate.push_back(fit.param_names[p]);
        }
    }
    json priors = json::array();
    for (const auto& p : fit.prior.params) {
        priors.push_back(prior_to_json(p));
    }

    json summary{
        {"family", fit.model.name()},
        {"params", params},
        {"r_hat", r_hat},
        {"ess", ess},
        {"waic", fit.waic.waic},
        {"lppd", fit.waic.lppd},
        {"p_waic", fit.waic.p_waic},
        {"seed", fit.seed},
        {"metric", fit.labels.metric},
        {"dataset", fit.labels.dataset},
        {"transform", to_string(fit.model.transform)},
        {"atom_location", fit.model.atom_location},
        {"lower", bound_to_json(fit.model.lower)},
        {"upper", bound_to_json(fit.model.upper)},
        {"param_names", fit.param_names},
        {"priors", priors},
        {"pi_prior", prior_to_json(fit.prior.pi)},
        {"chains", fit.chains},
        {"draws_per_chain", fit.draws_per_chain},
        {"n_obs", fit.n_obs},
        {"weight_total", fit.weight_total},
        {"weight_mode", fit.weight_mode == WeightMode::raw ? "raw" : "normalized"},
        {"accept_rate", fit.accept_rate},
        {"degenerate", degenerate},
        {"converged", fit.converged()},
        {"warnings", fit.warnings},
    };
    text::write_file(dir / "draws.csv", csv.str());
    text::write_file(dir / "summary.json", summary.dump(2) + "\n");
}

PosteriorFit load_fit_bundle(const std::filesystem::path& dir) {
    const auto summary_path = dir / "summary.json";
    const auto draws_path = dir / "draws.csv";
    for (const auto& p : {summary_path, draws_path}) {
        if (!std::filesystem::exists(p)) {
            throw Error(ErrorCode::dependency, "missing fit artifact " + p.string());
        }
    }
    PosteriorFit fit;
    try {
        const json j = json::parse(text::read_file(summary_path));
        const auto transform = transform_from_string(j.at("transform").get<std::string>());
        if (!transform) {
            throw Error(ErrorCode::parse, "unknown transform in " + summary_path.string());
        }
        const auto spec = model_spec_from_name(j.at("family").get<std::string>(), *transform);
        if (!spec) {
            throw Error(ErrorCode::parse, "unknown family in " + summary_path.string());
        }
        fit.model = *spec;
        fit.model.atom_location = j.at("atom_location").get<double>();
        fit.model.lower = bound_from_json(j.at("lower"));
        fit.model.upper = bound_from_json(j.at("upper"));
        for (const auto& p : j.at("priors")) {
            fit.prior.params.push_back(prior_from_json(p));
        }
        fit.prior.pi = prior_from_json(j.at("pi_prior"));
        fit.param_names = j.at("param_names").get<std::vector<std::string>>();
        fit.chains = j.at("chains").get<std::size_t>();
        fit.draws_per_chain = j.at("draws_per_chain").get<std::size_t>();
        fit.waic = WaicResult{j.at("waic").get<double>(), j.at("lppd").get<double>(), j.at("p_waic").get<double>()};
        fit.seed = j.at("seed").get<std::uint64_t>();
        fit.labels = FitLabels{j.at("metric").get<std::string>(), j.at("dataset").get<std::string>()};
        fit.n_obs = j.at("n_obs").get<std::size_t>();
        fit.weight_total = j.at("weight_total").get<double>();
        fit.weight_mode = j.at("weight_mode").get<std::string>() == "raw" ? WeightMode::raw : WeightMode::normalized;
        fit.accept_rate = j.at("accept_rate").get<double>();
        fit.warnings = j.at("warnings").get<std::vector<std::string>>();
        const auto degenerate = j.at("degenerate").get<std::vector<std::string>>();
        for (const auto& name : fit.param_names) {
            ParamDiagnostics d;
            const json& r = j.at("r_hat").at(name);
            d.r_hat = r.is_string() ? kInf : r.get<double>();
            d.ess = j.at("ess").at(name).get<double>();
            d.degenerate = std::find(degenerate.begin(), degenerate.end(), name) != degenerate.end();
            fit.diagnostics.push_back(d);
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::parse, summary_path.string() + ": " + e.what());
    }

    const std::string csv = text::read_file(draws_path);
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    const std::size_t dim = fit.dimension();
    fit.draws.reserve(fit.total_draws() * dim);
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        const auto fields = text::split(line, ',');
        if (fields.size() != dim + 2) {
            throw Error(ErrorCode::parse, draws_path.string() + " line " + std::to_string(row + 2) +
                                              ": expected " + std::to_string(dim + 2) + " fields");
        }
        for (std::size_t p = 0; p < dim; ++p) {
            double v = 0.0;
            if (!text::parse_double(fields[p + 2], v)) {
                throw Error(ErrorCode::parse, draws_path.string() + " line " + std::to_string(row + 2) +
                                                  ": bad number");
            }
            fit.draws.push_back(v);
        }
        ++row;
    }
    if (row != fit.total_draws()) {
        throw Error(ErrorCode::parse, draws_path.string() + ": expected " + std::to_string(fit.total_draws()) +
                                          " draws, found " + std::to_string(row));
    }
    return fit;
}

}  // namespace equivcheck
